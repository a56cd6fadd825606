#include "blochbeam/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "blochbeam/errors.hpp"
#include "blochbeam/parallel.hpp"

namespace blochbeam {

sweep_result level_sweep::run(const sweep_opts& opt) const {
  if (opt.k3_values.size() < 3)
    throw input_error("sweep needs at least 3 transverse momenta");
  if (opt.density_bins < 1) throw input_error("density_bins must be positive");

  sweep_result res;
  res.slices.resize(opt.k3_values.size());
  parallel_for(opt.k3_values.size(), [&](std::size_t i) {
    orbit_params par = base_;
    par.k3 = opt.k3_values[i];
    const orbit_tracer tracer(solver_);
    const orbit_data orb = tracer.trace(par);
    const beam_frame frame = frame_propagator(solver_, orb).propagate(beam_);
    const phase_ledger pl = phase_accumulator(solver_).compute(orb, frame);
    sweep_slice& sl = res.slices[i];
    sl.k3 = par.k3;
    sl.area = orb.area;
    sl.T = orb.T;
    sl.ledger = pl;
    sl.levels = quantized_levels(pl, opt.n_min, opt.n_max);
  }, static_cast<unsigned>(opt.threads));

  std::sort(res.slices.begin(), res.slices.end(),
            [](const sweep_slice& a, const sweep_slice& b) { return a.k3 < b.k3; });

  res.k3_step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < res.slices.size(); ++i)
    res.k3_step = std::min(res.k3_step, res.slices[i].k3 - res.slices[i - 1].k3);

  // Interior extremum of the area profile: strongest sign change of the
  // discrete derivative.
  double best_curv = -1.0;
  for (std::size_t i = 1; i + 1 < res.slices.size(); ++i) {
    const double dl = res.slices[i].area - res.slices[i - 1].area;
    const double dr = res.slices[i + 1].area - res.slices[i].area;
    if (dl * dr <= 0.0) {
      const double curv = std::abs(dr - dl);
      if (curv > best_curv) {
        best_curv = curv;
        res.k3_extremal_area = res.slices[i].k3;
      }
    }
  }
  if (best_curv < 0.0)
    throw assumption_error(
        "orbit area has no interior extremum on the transverse grid");

  // Pooled histogram of the quantized field strengths.
  std::vector<const magnetic_level*> all;
  for (const auto& sl : res.slices)
    for (const auto& lv : sl.levels) all.push_back(&lv);
  if (all.empty())
    throw assumption_error("no quantized levels found on the transverse grid");
  const bool windowed = std::isfinite(opt.eps_lo) && std::isfinite(opt.eps_hi);
  double lo, hi;
  if (windowed) {
    lo = opt.eps_lo;
    hi = opt.eps_hi;
    if (!(hi > lo)) throw input_error("field window must have eps_lo < eps_hi");
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto* lv : all) {
      lo = std::min(lo, lv->eps);
      hi = std::max(hi, lv->eps);
    }
    if (!(hi > lo)) hi = lo + std::max(1.0, std::abs(lo)) * 1e-12;
  }
  const double w = (hi - lo) / opt.density_bins;
  res.density.resize(static_cast<std::size_t>(opt.density_bins));
  for (int b = 0; b < opt.density_bins; ++b) {
    res.density[static_cast<std::size_t>(b)].eps_lo = lo + b * w;
    res.density[static_cast<std::size_t>(b)].eps_hi = lo + (b + 1) * w;
  }
  auto bin_of = [&](double eps) -> int {
    if (windowed && (eps < lo || eps >= hi)) return -1;
    int b = static_cast<int>((eps - lo) / w);
    return std::clamp(b, 0, opt.density_bins - 1);
  };
  int in_window = 0;
  for (const auto* lv : all) {
    const int b = bin_of(lv->eps);
    if (b < 0) continue;
    res.density[static_cast<std::size_t>(b)].count += 1;
    ++in_window;
  }

  if (in_window == 0) {
    res.has_peak = false;
    res.peak_bin = -1;
    res.warning = "no levels fall inside the field window; histogram is empty";
    return res;
  }

  res.has_peak = true;
  res.peak_bin = 0;
  for (int b = 1; b < opt.density_bins; ++b)
    if (res.density[static_cast<std::size_t>(b)].count >
        res.density[static_cast<std::size_t>(res.peak_bin)].count)
      res.peak_bin = b;
  res.peak_count = res.density[static_cast<std::size_t>(res.peak_bin)].count;

  // The slice contributing the most levels to the peak bin; ties go to the
  // slice closest to the symmetry plane, then to the smaller k3.
  std::map<double, int> by_k3;
  for (const auto* lv : all)
    if (bin_of(lv->eps) == res.peak_bin) by_k3[lv->k3] += 1;
  int best = -1;
  for (const auto& [k3, cnt] : by_k3) {
    const bool better =
        cnt > best ||
        (cnt == best && std::abs(k3) < std::abs(res.peak_k3) - 1e-15) ||
        (cnt == best && std::abs(std::abs(k3) - std::abs(res.peak_k3)) <= 1e-15 &&
         k3 < res.peak_k3);
    if (better) {
      best = cnt;
      res.peak_k3 = k3;
    }
  }
  return res;
}

}  // namespace blochbeam
