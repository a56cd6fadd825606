#pragma once

#include <vector>

#include "blochbeam/phases.hpp"

namespace blochbeam {

// One asymptotic magnetic level: the field strength eps at which the orbit
// encloses the quantized flux for integer index n.
struct magnetic_level {
  double k3 = 0.0;
  int n = 0;
  double eps = 0.0;
  double gamma = 0.0;
  double theta_b = 0.0;
  double theta_rw = 0.0;
  int maslov = 0;
};

// eps_n = S / (mu * (2*pi*(n + gamma) + theta_b + theta_rw)) for n in
// [n_min, n_max].  Indices whose quantization denominator is not positive are
// outside the asymptotic regime and are skipped.
std::vector<magnetic_level> quantized_levels(const phase_ledger& ledger, int n_min, int n_max);

// Residual of the quantization condition for a computed level; an algebraic
// identity up to roundoff, used as an internal consistency gate.
double quantization_residual(const phase_ledger& ledger, const magnetic_level& level);

}  // namespace blochbeam
