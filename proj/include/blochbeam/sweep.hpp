#pragma once

#include <limits>
#include <string>
#include <vector>

#include "blochbeam/bloch.hpp"
#include "blochbeam/frame.hpp"
#include "blochbeam/levels.hpp"
#include "blochbeam/orbit.hpp"
#include "blochbeam/phases.hpp"

namespace blochbeam {

struct sweep_opts {
  std::vector<double> k3_values;
  int n_min = 0;
  int n_max = 5;
  int density_bins = 24;
  // Optional field window for the histogram. When NaN the window spans the
  // pooled levels. A narrow window isolates one branch of the level family;
  // without it the lowest bins collect the closely spaced high-n levels from
  // every slice and mask the extremal-k3 accumulation.
  double eps_lo = std::numeric_limits<double>::quiet_NaN();
  double eps_hi = std::numeric_limits<double>::quiet_NaN();
  int threads = 0;
};

// Full pipeline output for one transverse slice.
struct sweep_slice {
  double k3 = 0.0;
  double area = 0.0;
  double T = 0.0;
  phase_ledger ledger;
  std::vector<magnetic_level> levels;
};

struct density_bin {
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  int count = 0;
};

// Slices ordered by k3, the pooled level-density histogram, and the
// locations of the area extremum and the density peak.
struct sweep_result {
  std::vector<sweep_slice> slices;
  std::vector<density_bin> density;
  bool has_peak = false;
  int peak_bin = -1;
  int peak_count = 0;
  double peak_k3 = 0.0;           // slice contributing most to the peak bin
  double k3_extremal_area = 0.0;  // interior grid extremum of the area
  double k3_step = 0.0;
  std::string warning;
};

// Repeats orbit tracing, frame propagation, phase accumulation and level
// quantization across a grid of transverse momenta at fixed energy.
class level_sweep {
 public:
  level_sweep(const bloch_solver& solver, const orbit_params& base,
              const beam_opts& beam = beam_opts())
      : solver_(solver), base_(base), beam_(beam) {}

  sweep_result run(const sweep_opts& opt) const;

 private:
  const bloch_solver& solver_;
  orbit_params base_;
  beam_opts beam_;
};

}  // namespace blochbeam
