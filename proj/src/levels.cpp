#include "blochbeam/levels.hpp"

#include <cmath>

#include "blochbeam/errors.hpp"
#include "blochbeam/numeric.hpp"

namespace blochbeam {

std::vector<magnetic_level> quantized_levels(const phase_ledger& ledger, int n_min, int n_max) {
  if (n_min < 0 || n_max < n_min) throw input_error("level index range must satisfy 0 <= n_min <= n_max");
  if (!(ledger.orbit_area > 0.0)) throw assumption_error("orbit area must be positive to quantize");
  std::vector<magnetic_level> out;
  out.reserve(static_cast<std::size_t>(n_max - n_min + 1));
  for (int n = n_min; n <= n_max; ++n) {
    const double denom =
        ledger.mu * (two_pi * (static_cast<double>(n) + ledger.gamma) + ledger.theta_b + ledger.theta_rw);
    if (!(denom > 0.0)) continue;
    magnetic_level lv;
    lv.k3 = ledger.k3;
    lv.n = n;
    lv.eps = ledger.orbit_area / denom;
    lv.gamma = ledger.gamma;
    lv.theta_b = ledger.theta_b;
    lv.theta_rw = ledger.theta_rw;
    lv.maslov = ledger.maslov;
    out.push_back(lv);
  }
  return out;
}

double quantization_residual(const phase_ledger& ledger, const magnetic_level& level) {
  const double lhs = ledger.orbit_area / (ledger.mu * level.eps);
  const double rhs =
      two_pi * (static_cast<double>(level.n) + level.gamma) + ledger.theta_b + ledger.theta_rw;
  return std::abs(lhs - rhs);
}

}  // namespace blochbeam
