#pragma once

#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/frame.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/orbit.hpp"

namespace blochbeam {

// Everything the local beam ansatz needs at one point ("foot") of the orbit:
// the curvature matrix and its flow derivative, the transverse band Hessian,
// the divergence rate, and the closed-form amplitude with its decay factor.
struct foot_jet {
  double s = 0.0;
  Vec2 khat, ydot, ydd;
  Mat2c M, Mdot;
  Mat2 C;
  cplx rho;               // tr(C M + B) = d/ds log det Y, complex
  cplx amp;               // f0(s), closed-form transported amplitude
  cplx amp_fac;           // A(s) = rho/2 + i (band + interband phase rates)
  double lambda_min = 0.0;  // smallest eigenvalue of Im M
  Eigen::VectorXcd c;     // band state at the foot, seeds nearby eigensolves
};

struct residual_point {
  double eps = 0.0;
  double sup_residual = 0.0;
};

struct residual_report {
  std::vector<residual_point> points;
  double slope = 0.0;        // log-log least-squares exponent of sup vs eps
  double tube_cap = 0.0;     // curvature-limited bound on the tube radius
  double min_transverse_curv = 0.0;  // min of 2 Im(phase) / offset^2 over the tube
};

struct transport_report {
  double max_route_gap = 0.0;   // closed form vs step-integrated amplitude
  double monodromy_gap = 0.0;   // |f0(T) - exp(-i(pi N_M + Theta_b + Theta_rw))|
  double det_ratio_gap = 0.0;   // | |det Y(T)| / |det Y(0)| - 1 |
  double arg_winding_gap = 0.0; // |arg det Y winding - 2 pi N_M|
};

struct quasimode_opts {
  double tube_factor = 0.4;  // transverse radius = tube_factor * sqrt(eps)
  int feet = 48;             // orbit points sampled per field strength
  int offsets = 9;           // transverse offsets per foot
  int threads = 0;           // 0 = hardware concurrency
};

// Evaluates the residual of the asymptotic beam ansatz on shrinking tubes
// around the orbit and checks the transport/monodromy identities.
class quasimode_builder {
 public:
  quasimode_builder(const bloch_solver& solver, const orbit_data& orbit,
                    const beam_frame& frame);

  foot_jet jet_at(double s) const;

  // |band continuation error| at signed transverse offset d from the foot,
  // using the full second-order momentum jet.
  double band_mismatch(const foot_jet& fj, double d) const;

  // Fitted vanishing order of the band mismatch at one foot over the given
  // offsets (the phase is stationary on the orbit to this order).
  double eikonal_order(double s, const std::vector<double>& deltas) const;

  // Sup of the two-term residual over tubes of radius
  // min(tube_factor * sqrt(eps), r_curv / 2) for each field strength.
  residual_report residual_scaling(const std::vector<double>& eps_list,
                                   const quasimode_opts& opt = quasimode_opts()) const;

  // Closed-form amplitude vs direct integration of the transport equation,
  // plus the period map of det Y and the amplitude monodromy.
  transport_report transport_consistency(int substeps = 4) const;

  double min_curvature_radius() const;

 private:
  const bloch_solver& solver_;
  const orbit_data& orbit_;
  const beam_frame& frame_;
  frame_propagator prop_;
  mutable double r_curv_ = -1.0;
};

}  // namespace blochbeam
