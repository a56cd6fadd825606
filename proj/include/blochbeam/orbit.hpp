#pragma once

#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/ode.hpp"

namespace blochbeam {

struct orbit_params {
    double E0 = 0.0;
    double k3 = 0.0;
    double mu = 1.0;        // magnetic coupling in the transverse flow
    Vec2 seed_dir = Vec2(1.0, 0.0);
    double seed_max = 0.5;  // ray search range for the energy root
    double t_guard = 1.0;   // period search ignores returns earlier than this
    double t_max = 100.0;
    double tol_closure = 1e-8;
    int samples = 256;
    double rtol = 1e-11;
    double atol = 1e-13;
};

// Closed constant-energy curve E(k1, k2, k3) = E0 traced by the transverse
// flow kdot = mu * (-dE/dk2, dE/dk1), with uniformly resampled states and a
// spectrally accurate enclosed-area quadrature.
struct orbit_data {
    double T = 0.0;
    double E0 = 0.0;
    double k3 = 0.0;
    double mu = 1.0;
    Vec2 seed;
    int J = 0;
    std::vector<double> s;       // J uniform sample times in [0, T)
    std::vector<Vec2> k;
    std::vector<Vec2> kdot;      // analytic flow velocity at the samples
    double area = 0.0;           // |closed integral k1 dk2|
    double orientation = 1.0;    // sign of the raw signed area
    double closure_error = 0.0;
    ode_solution flow;

    Vec2 k_at(double t) const {
        const Eigen::VectorXd y = flow.eval(t);
        return Vec2(y[0], y[1]);
    }
};

class orbit_tracer {
public:
    explicit orbit_tracer(const bloch_solver& solver) : solver_(solver) {}

    orbit_data trace(const orbit_params& par) const;

    // Seed on the ray t * dir with E(seed) = E0; throws when the ray never
    // crosses the level set.
    Vec2 find_seed(const orbit_params& par) const;

    // Signed area from the uniform samples using the analytic velocities;
    // resampling at J and 2J must agree to quadrature tolerance.
    static double signed_area(const orbit_data& orb);

    // Line integral of p . dy over the lifted closed orbit with lift
    // constants (p2_const, c); independent of both constants.
    static double lifted_action(const orbit_data& orb, double p2_const = 0.0,
                                double c = 0.0);

private:
    const bloch_solver& solver_;

    void check_simple(const std::vector<Vec2>& pts) const;
};

}  // namespace blochbeam
