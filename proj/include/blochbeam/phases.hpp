#pragma once

#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/frame.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/orbit.hpp"

namespace blochbeam {

// Cumulative geometric/band data collected around one closed orbit.
struct phase_ledger {
  double theta_b = 0.0;       // band connection phase (Wilson loop)
  double theta_rw = 0.0;      // magnetic interband phase (integrated rate)
  int maslov = 0;             // winding of det Y around the orbit
  double gamma = 0.0;         // 1/2 when the Maslov count is odd, else 0
  double theta_b_rate = 0.0;  // same phase from the pointwise rate (cross-check)
  double orbit_period = 0.0;
  double orbit_area = 0.0;
  double k3 = 0.0;
  double mu = 1.0;
};

// Discrete Wilson loop over the cyclic sequence of eigenvectors.
// Invariant under per-point multiplication by unit-modulus factors.
double wilson_loop_phase(const std::vector<Eigen::VectorXcd>& states);

class phase_accumulator {
 public:
  explicit phase_accumulator(const bloch_solver& solver) : solver_(solver) {}

  // Assemble the full ledger for one traced orbit and its beam frame.
  phase_ledger compute(const orbit_data& orbit, const beam_frame& frame);

  // Eigenvectors at the orbit sample points (shared gauge-free input for the
  // Wilson loop and for rephasing-invariance checks).
  std::vector<Eigen::VectorXcd> orbit_states(const orbit_data& orbit);

  // Interband rate samples mu*R at the orbit grid points.
  std::vector<double> interband_rate(const orbit_data& orbit);

  // Pointwise band-connection rate samples along the orbit (gauge-fixed).
  std::vector<double> connection_rate(const orbit_data& orbit);

 private:
  const bloch_solver& solver_;
};

}  // namespace blochbeam
