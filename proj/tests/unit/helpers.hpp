#pragma once

#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/frame.hpp"
#include "blochbeam/lattice.hpp"
#include "blochbeam/orbit.hpp"

namespace testutil {

using namespace blochbeam;

inline potential empty_potential() { return potential(); }

// Fourier coefficient v on the +-e1, +-e2 stars: 2v (cos x1 + cos x2).
inline potential square_cosine(double v) {
    std::vector<fourier_coeff> list;
    const cplx c(v, 0.0);
    list.push_back({Eigen::Vector3i(1, 0, 0), c});
    list.push_back({Eigen::Vector3i(-1, 0, 0), c});
    list.push_back({Eigen::Vector3i(0, 1, 0), c});
    list.push_back({Eigen::Vector3i(0, -1, 0), c});
    return potential::from_list(list);
}

// square_cosine plus a z-axis modulation of the same strength.
inline potential cubic_cosine(double v) {
    std::vector<fourier_coeff> list;
    const cplx c(v, 0.0);
    for (int ax = 0; ax < 3; ++ax)
        for (int s : {1, -1}) {
            Eigen::Vector3i g = Eigen::Vector3i::Zero();
            g[ax] = s;
            list.push_back({g, c});
        }
    return potential::from_list(list);
}

// square_cosine(0.05) plus two complex coefficients on (1,1,0) and (1,0,1)
// (with conjugate partners). Breaks every reflection symmetry, so the
// geometric phases and the seed-velocity tilt are generically nonzero.
inline potential twisted_potential() {
    std::vector<fourier_coeff> list;
    const cplx c(0.05, 0.0);
    list.push_back({Eigen::Vector3i(1, 0, 0), c});
    list.push_back({Eigen::Vector3i(-1, 0, 0), c});
    list.push_back({Eigen::Vector3i(0, 1, 0), c});
    list.push_back({Eigen::Vector3i(0, -1, 0), c});
    const cplx a1(0.091781062474138614, -0.07730612246852292);
    const cplx a2(0.092106099400288521, -0.038941834230865058);
    list.push_back({Eigen::Vector3i(1, 1, 0), a1});
    list.push_back({Eigen::Vector3i(-1, -1, 0), std::conj(a1)});
    list.push_back({Eigen::Vector3i(1, 0, 1), a2});
    list.push_back({Eigen::Vector3i(-1, 0, -1), std::conj(a2)});
    return potential::from_list(list);
}

inline const bloch_solver& free_solver() {
    static const bloch_solver s(lattice::cubic(), empty_potential(), 1.5, 1);
    return s;
}

// Coarse basis: fast enough for structural tests of orbits, frames and
// phases. Converged-energy assertions use weak_solver3 instead.
inline const bloch_solver& weak_solver15() {
    static const bloch_solver s(lattice::cubic(), square_cosine(0.05), 1.5, 1);
    return s;
}

inline const bloch_solver& weak_solver3() {
    static const bloch_solver s(lattice::cubic(), square_cosine(0.05), 3.0, 1);
    return s;
}

inline const bloch_solver& twisted_solver15() {
    static const bloch_solver s(lattice::cubic(), twisted_potential(), 1.5, 1);
    return s;
}

inline const orbit_data& free_orbit() {
    static const orbit_data orb = [] {
        orbit_params par;
        par.E0 = 0.09;
        return orbit_tracer(free_solver()).trace(par);
    }();
    return orb;
}

inline const beam_frame& free_frame() {
    static const beam_frame fr =
        frame_propagator(free_solver(), free_orbit()).propagate();
    return fr;
}

inline const orbit_data& weak_orbit15() {
    static const orbit_data orb = [] {
        orbit_params par;
        par.E0 = 0.08;
        return orbit_tracer(weak_solver15()).trace(par);
    }();
    return orb;
}

inline const beam_frame& weak_frame15() {
    static const beam_frame fr =
        frame_propagator(weak_solver15(), weak_orbit15()).propagate();
    return fr;
}

}  // namespace testutil
