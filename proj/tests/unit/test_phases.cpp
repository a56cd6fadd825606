#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "blochbeam/errors.hpp"
#include "blochbeam/phases.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blochbeam;

namespace {

std::vector<Eigen::VectorXcd> random_loop(int count, int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> pick(0.0, 1.0);
  std::vector<Eigen::VectorXcd> loop(static_cast<std::size_t>(count));
  for (auto& u : loop) {
    u.resize(dim);
    for (int i = 0; i < dim; ++i) u[i] = cplx(pick(gen), pick(gen));
    u.normalize();
  }
  return loop;
}

}  // namespace

TEST_CASE("wilson loop of three states matches the direct overlap product") {
  const auto loop = random_loop(3, 5, 11);
  const cplx prod =
      loop[0].dot(loop[1]) * loop[1].dot(loop[2]) * loop[2].dot(loop[0]);
  CHECK(std::abs(wilson_loop_phase(loop) - (-std::arg(prod))) < 1e-14);
}

TEST_CASE("wilson loop is invariant under per-state rephasing") {
  const auto loop = random_loop(24, 7, 29);
  const double base = wilson_loop_phase(loop);
  std::mt19937 gen(101);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  auto shifted = loop;
  for (auto& u : shifted) u *= std::exp(cplx(0.0, angle(gen)));
  CHECK(std::abs(wilson_loop_phase(shifted) - base) < 1e-12);
}

TEST_CASE("reversing loop orientation flips the wilson phase") {
  const auto loop = random_loop(12, 4, 47);
  const std::vector<Eigen::VectorXcd> rev(loop.rbegin(), loop.rend());
  const double fwd = wilson_loop_phase(loop);
  CHECK(std::abs(fwd) > 1e-3);  // generic loop, away from the branch cut
  CHECK(std::abs(fwd + wilson_loop_phase(rev)) < 1e-12);
}

TEST_CASE("wilson loop input validation") {
  CHECK_THROWS_AS(wilson_loop_phase(random_loop(2, 4, 3)), input_error);
  // Orthogonal consecutive states leave the overlap phase undefined.
  std::vector<Eigen::VectorXcd> loop(3, Eigen::VectorXcd::Zero(3));
  loop[0][0] = 1.0;
  loop[1][1] = 1.0;
  loop[2][2] = 1.0;
  CHECK_THROWS_AS(wilson_loop_phase(loop), accuracy_error);
}

TEST_CASE("reflection-symmetric potential carries no geometric phases") {
  const orbit_data& orb = testutil::weak_orbit15();
  const beam_frame& fr = testutil::weak_frame15();
  phase_accumulator acc(testutil::weak_solver15());
  const phase_ledger pl = acc.compute(orb, fr);

  CHECK(std::abs(pl.theta_b) < 1e-10);
  CHECK(std::abs(pl.theta_rw) < 1e-10);
  CHECK(pl.maslov == 1);
  CHECK(pl.gamma == 0.5);
  CHECK(std::abs(pl.theta_b_rate - pl.theta_b) < 1e-8);
  CHECK(pl.orbit_period == orb.T);
  CHECK(pl.orbit_area == orb.area);
  CHECK(pl.k3 == orb.k3);
  CHECK(pl.mu == orb.mu);

  // The interband rate vanishes pointwise for a real potential.
  for (double r : acc.interband_rate(orb)) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("complex potential: wilson loop, pointwise rate, and frame agree") {
  const bloch_solver& s = testutil::twisted_solver15();
  orbit_params par;
  par.E0 = 0.08;
  par.k3 = 0.15;
  const orbit_data orb = orbit_tracer(s).trace(par);
  const beam_frame fr = frame_propagator(s, orb).propagate();
  phase_accumulator acc(s);
  const phase_ledger pl = acc.compute(orb, fr);

  // Both phases are genuinely nonzero here, so route agreement is informative.
  CHECK(std::abs(pl.theta_b) > 1e-6);
  CHECK(std::abs(pl.theta_rw) > 1e-6);
  CHECK(pl.maslov == 1);
  CHECK(pl.gamma == 0.5);

  // Discrete Wilson loop vs. integrated pointwise connection rate.
  CHECK(std::abs(pl.theta_b_rate - pl.theta_b) < 1e-7);
  // Trapezoid over the orbit grid vs. the ODE-integrated frame totals.
  CHECK(std::abs(fr.theta_b_total - pl.theta_b_rate) < 1e-10);
  CHECK(std::abs(fr.theta_rw_total - pl.theta_rw) < 1e-10);

  // Rephasing every eigenvector leaves the loop phase untouched.
  auto states = acc.orbit_states(orb);
  const double base = wilson_loop_phase(states);
  CHECK(std::abs(base - pl.theta_b) < 1e-12);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (auto& u : states) u *= std::exp(cplx(0.0, angle(gen)));
  CHECK(std::abs(wilson_loop_phase(states) - base) < 1e-10);
}
