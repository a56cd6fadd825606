#include <cmath>
#include <vector>

#include "blochbeam/errors.hpp"
#include "blochbeam/levels.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/sweep.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blochbeam;

namespace {

phase_ledger sample_ledger() {
  phase_ledger pl;
  pl.orbit_area = 2.0;
  pl.mu = 0.5;
  pl.gamma = 0.5;
  pl.maslov = 3;
  pl.theta_b = 0.3;
  pl.theta_rw = -0.1;
  pl.k3 = 0.2;
  pl.orbit_period = 4.0;
  return pl;
}

}  // namespace

TEST_CASE("quantized levels follow the closed-form denominator") {
  const phase_ledger pl = sample_ledger();
  const auto levels = quantized_levels(pl, 0, 3);
  REQUIRE(levels.size() == 4);
  for (int n = 0; n <= 3; ++n) {
    const magnetic_level& lv = levels[static_cast<std::size_t>(n)];
    const double expect =
        pl.orbit_area / (pl.mu * (two_pi * (n + pl.gamma) + pl.theta_b + pl.theta_rw));
    CHECK(lv.n == n);
    CHECK(std::abs(lv.eps - expect) <= 1e-15 * expect);
    CHECK(lv.k3 == pl.k3);
    CHECK(lv.gamma == pl.gamma);
    CHECK(lv.theta_b == pl.theta_b);
    CHECK(lv.theta_rw == pl.theta_rw);
    CHECK(lv.maslov == pl.maslov);
    CHECK(quantization_residual(pl, lv) < 1e-12);
  }
}

TEST_CASE("doubling the field scale halves every level") {
  const phase_ledger pl = sample_ledger();
  phase_ledger doubled = pl;
  doubled.mu = 1.0;
  const auto a = quantized_levels(pl, 0, 4);
  const auto b = quantized_levels(doubled, 0, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i].eps == a[i].eps / 2.0);
}

TEST_CASE("indices with a non-positive denominator are skipped") {
  phase_ledger pl = sample_ledger();
  pl.gamma = 0.0;
  pl.maslov = 2;
  pl.theta_b = -0.5;
  pl.theta_rw = 0.0;
  // n = 0 gives denominator mu * (-0.5) < 0; n >= 1 is fine.
  const auto levels = quantized_levels(pl, 0, 2);
  REQUIRE(levels.size() == 2);
  CHECK(levels[0].n == 1);
  CHECK(levels[1].n == 2);
}

TEST_CASE("level quantization input validation") {
  const phase_ledger pl = sample_ledger();
  CHECK_THROWS_AS(quantized_levels(pl, -1, 3), input_error);
  CHECK_THROWS_AS(quantized_levels(pl, 3, 2), input_error);
  phase_ledger flat = pl;
  flat.orbit_area = 0.0;
  CHECK_THROWS_AS(quantized_levels(flat, 0, 3), assumption_error);
  flat.orbit_area = -1.0;
  CHECK_THROWS_AS(quantized_levels(flat, 0, 3), assumption_error);
}

TEST_CASE("free-electron ladder reproduces the odd-integer spacing") {
  const orbit_data& orb = testutil::free_orbit();
  const beam_frame& fr = testutil::free_frame();
  const phase_ledger pl = phase_accumulator(testutil::free_solver()).compute(orb, fr);
  const auto levels = quantized_levels(pl, 0, 5);
  REQUIRE(levels.size() == 6);
  for (int n = 0; n <= 5; ++n) {
    const magnetic_level& lv = levels[static_cast<std::size_t>(n)];
    const double expect = 0.09 / (2.0 * n + 1.0);
    CHECK(std::abs(lv.eps - expect) <= 1e-8 * expect);
    CHECK(lv.gamma == 0.5);
    CHECK(lv.maslov == 1);
    CHECK(quantization_residual(pl, lv) < 1e-10);
  }
}

TEST_CASE("free-electron transverse sweep locates the symmetry plane") {
  orbit_params base;
  base.E0 = 0.09;
  base.rtol = 1e-9;  // histogram bins are far wider than the trace error
  base.atol = 1e-12;
  beam_opts bo;
  bo.rtol = 1e-9;
  bo.atol = 1e-12;
  const level_sweep sweep(testutil::free_solver(), base, bo);

  sweep_opts so;
  so.k3_values = {0.1, -0.1, 0.0};  // deliberately unsorted

  SUBCASE("slice structure and area profile") {
    const sweep_result res = sweep.run(so);
    REQUIRE(res.slices.size() == 3);
    CHECK(res.slices[0].k3 == -0.1);
    CHECK(res.slices[1].k3 == 0.0);
    CHECK(res.slices[2].k3 == 0.1);
    for (const sweep_slice& sl : res.slices) {
      const double expect = M_PI * (0.09 - sl.k3 * sl.k3);
      CHECK(std::abs(sl.area - expect) < 1e-8);
      CHECK(sl.ledger.orbit_area == sl.area);
      CHECK(sl.levels.size() == 6);
    }
    CHECK(res.k3_extremal_area == 0.0);
    CHECK(std::abs(res.k3_step - 0.1) < 1e-12);
    CHECK(res.has_peak);
    int total = 0;
    for (const density_bin& b : res.density) total += b.count;
    CHECK(total == 18);
  }

  SUBCASE("narrow field window isolates the extremal slice") {
    so.eps_lo = 0.085;
    so.eps_hi = 0.095;
    so.density_bins = 5;
    const sweep_result res = sweep.run(so);
    REQUIRE(res.density.size() == 5);
    CHECK(res.has_peak);
    // Only the n = 0 level of the k3 = 0 slice (eps = 0.09) falls inside the
    // window; the side slices sit at eps = 0.08.
    CHECK(res.peak_bin == 2);
    CHECK(res.peak_count == 1);
    CHECK(res.peak_k3 == 0.0);
    CHECK(std::abs(res.density[2].eps_lo - 0.089) < 1e-12);
    CHECK(std::abs(res.density[2].eps_hi - 0.091) < 1e-12);
  }

  SUBCASE("empty field window reports a warning instead of a peak") {
    so.eps_lo = 0.5;
    so.eps_hi = 0.6;
    const sweep_result res = sweep.run(so);
    CHECK_FALSE(res.has_peak);
    CHECK(res.peak_bin == -1);
    CHECK_FALSE(res.warning.empty());
  }

  SUBCASE("sweep input validation") {
    sweep_opts bad = so;
    bad.k3_values = {0.0, 0.1};
    CHECK_THROWS_AS(sweep.run(bad), input_error);
    bad = so;
    bad.density_bins = 0;
    CHECK_THROWS_AS(sweep.run(bad), input_error);
    bad = so;
    bad.eps_lo = 0.1;
    bad.eps_hi = 0.1;
    CHECK_THROWS_AS(sweep.run(bad), input_error);
  }
}
