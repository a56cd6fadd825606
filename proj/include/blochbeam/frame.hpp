#pragma once

#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/ode.hpp"
#include "blochbeam/orbit.hpp"

namespace blochbeam {

struct beam_opts {
    double rtol = 1e-11;
    double atol = 1e-13;
    double tol_frame = 1e-8;  // symplectic drift guard
    double d_min = 1e-6;      // |det Y| floor (no real caustics allowed)
    double p_min = 0.1;       // transverse Im M floor
};

struct frame_sample {
    double s = 0.0;
    Vec2 k;
    Mat2c Y, N, M;
    cplx detY;
    double arg_detY = 0.0;  // continuous branch
    double theta_b = 0.0;   // accumulated geometric phase of the band vector
    double theta_rw = 0.0;  // accumulated band-geometric correction phase
    Vec2 ydot, pdot;
};

struct frame_invariants {
    double sig12_drift = 0.0;     // pairing of the two complex solutions
    double sig2bar_drift = 0.0;   // pairing of G2 with its conjugate
    double msym_max = 0.0;        // max Frobenius asymmetry of M
    double m_period_gap = 0.0;    // |M(T) - M(0)|
    double mydot_gap = 0.0;       // max |M ydot - pdot|
    double min_transverse_imM = 0.0;
    double min_abs_detY = 0.0;
};

// Complex linearized frame (Y, N) along the orbit with M = N Y^-1 the
// complex phase Hessian; initialized so that M ydot = pdot, M symmetric,
// and Im M is the transverse rank-one projector.
struct beam_frame {
    double T = 0.0;
    Mat2c M0;
    std::vector<frame_sample> samples;  // at the orbit sample grid
    frame_sample terminal;              // s = T
    int maslov = 0;
    double theta_b_total = 0.0;
    double theta_rw_total = 0.0;
    frame_invariants inv;

    ode_solution sol;               // dense 20-component state
    std::vector<double> step_t;     // accepted step times
    std::vector<double> step_arg;   // unwrapped arg det Y at those times

    // Continuous branch of arg det Y at arbitrary time.
    double arg_detY_at(double t, const cplx& detY) const;
};

class frame_propagator {
public:
    frame_propagator(const bloch_solver& solver, const orbit_data& orbit)
        : solver_(solver), orbit_(orbit) {}

    beam_frame propagate(const beam_opts& opt = beam_opts()) const;

    // Decode the dense state at time t into a full sample (M, phases,
    // lifted velocities).
    frame_sample sample_at(const beam_frame& frame, double t) const;

    static Mat2c initial_hessian(const Vec2& ydot, const Vec2& pdot);

    // Blocks of the raw dense state [k1, k2, Y, N, theta_b, theta_rw].
    static Mat2c state_Y(const Eigen::VectorXd& y);
    static Mat2c state_N(const Eigen::VectorXd& y);

private:
    const bloch_solver& solver_;
    const orbit_data& orbit_;

    void rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const;
    frame_sample decode(double t, const Eigen::VectorXd& y) const;
};

}  // namespace blochbeam
