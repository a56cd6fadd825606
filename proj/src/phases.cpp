#include "blochbeam/phases.hpp"

#include <cmath>
#include <complex>

#include "blochbeam/errors.hpp"
#include "blochbeam/parallel.hpp"

namespace blochbeam {

double wilson_loop_phase(const std::vector<Eigen::VectorXcd>& states) {
  if (states.size() < 3) throw input_error("wilson loop needs at least 3 states");
  cplx prod(1.0, 0.0);
  const std::size_t n = states.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& a = states[j];
    const auto& b = states[(j + 1) % n];
    const cplx ov = a.dot(b);  // conjugates the first argument
    if (std::abs(ov) < 1e-8)
      throw accuracy_error("wilson loop overlap nearly vanishes; refine orbit sampling");
    prod *= ov / std::abs(ov);
  }
  return -std::arg(prod);
}

std::vector<Eigen::VectorXcd> phase_accumulator::orbit_states(const orbit_data& orbit) {
  std::vector<Eigen::VectorXcd> states(static_cast<std::size_t>(orbit.J));
  parallel_for(static_cast<std::size_t>(orbit.J), [&](std::size_t j) {
    const Vec3 k(orbit.k[j].x(), orbit.k[j].y(), orbit.k3);
    states[j] = solver_.solve(k).c;
  });
  return states;
}

std::vector<double> phase_accumulator::interband_rate(const orbit_data& orbit) {
  std::vector<double> rate(static_cast<std::size_t>(orbit.J));
  parallel_for(static_cast<std::size_t>(orbit.J), [&](std::size_t j) {
    const Vec3 k(orbit.k[j].x(), orbit.k[j].y(), orbit.k3);
    rate[j] = orbit.mu * solver_.rates(k).wr;
  });
  return rate;
}

std::vector<double> phase_accumulator::connection_rate(const orbit_data& orbit) {
  std::vector<double> rate(static_cast<std::size_t>(orbit.J));
  parallel_for(static_cast<std::size_t>(orbit.J), [&](std::size_t j) {
    const Vec3 k(orbit.k[j].x(), orbit.k[j].y(), orbit.k3);
    rate[j] = solver_.rates(k, orbit.mu).berry_rate;
  });
  return rate;
}

phase_ledger phase_accumulator::compute(const orbit_data& orbit, const beam_frame& frame) {
  phase_ledger pl;
  pl.orbit_period = orbit.T;
  pl.orbit_area = orbit.area;
  pl.k3 = orbit.k3;
  pl.mu = orbit.mu;
  pl.maslov = frame.maslov;
  pl.gamma = (frame.maslov % 2 != 0) ? 0.5 : 0.0;

  // One diagonalization per grid point covers all three ingredients.
  const std::size_t J = static_cast<std::size_t>(orbit.J);
  std::vector<Eigen::VectorXcd> states(J);
  std::vector<double> rw_rate(J), b_rate(J);
  parallel_for(J, [&](std::size_t j) {
    const Vec3 k(orbit.k[j].x(), orbit.k[j].y(), orbit.k3);
    const band_rates br = solver_.rates(k, orbit.mu);
    states[j] = br.state.c;
    rw_rate[j] = orbit.mu * br.wr;
    b_rate[j] = br.berry_rate;
  });

  pl.theta_b = wilson_loop_phase(states);
  pl.theta_rw = periodic_trapezoid(rw_rate, orbit.T);
  pl.theta_b_rate = periodic_trapezoid(b_rate, orbit.T);

  // The Wilson loop reports a representative in (-pi, pi]; fold the rate
  // integral's winding back in so both routes describe the same phase.
  const double shift = std::round((pl.theta_b_rate - pl.theta_b) / two_pi);
  pl.theta_b += shift * two_pi;
  return pl;
}

}  // namespace blochbeam
