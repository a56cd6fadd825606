#include "blochbeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blochbeam/bloch.hpp"
#include "blochbeam/errors.hpp"
#include "blochbeam/io.hpp"
#include "blochbeam/levels.hpp"
#include "blochbeam/parallel.hpp"
#include "blochbeam/phases.hpp"
#include "blochbeam/quasimode.hpp"
#include "blochbeam/sweep.hpp"

namespace blochbeam {

namespace {

using nlohmann::json;

json ledger_json(const phase_ledger& pl) {
  return {{"theta_b", pl.theta_b},
          {"theta_rw", pl.theta_rw},
          {"N_M", pl.maslov},
          {"gamma", pl.gamma},
          {"orbit_period", pl.orbit_period},
          {"orbit_area", pl.orbit_area},
          {"k3", pl.k3},
          {"mu", pl.mu}};
}

json invariants_json(const frame_invariants& inv) {
  return {{"sig12_drift", inv.sig12_drift},
          {"sig2bar_drift", inv.sig2bar_drift},
          {"msym_max", inv.msym_max},
          {"m_period_gap", inv.m_period_gap},
          {"mydot_gap", inv.mydot_gap},
          {"min_transverse_imM", inv.min_transverse_imM},
          {"min_abs_detY", inv.min_abs_detY}};
}

json levels_json(const std::vector<magnetic_level>& levels) {
  json out = json::array();
  for (const auto& lv : levels)
    out.push_back({{"k3", lv.k3},
                   {"n", lv.n},
                   {"eps_n", lv.eps},
                   {"gamma", lv.gamma},
                   {"theta_b", lv.theta_b},
                   {"theta_rw", lv.theta_rw},
                   {"N_M", lv.maslov}});
  return out;
}

void check_ledger_routes(const phase_ledger& pl, const beam_frame& frame,
                         double tol_phase) {
  const double b_gap = std::abs(pl.theta_b - pl.theta_b_rate);
  const double b_ode = std::abs(pl.theta_b - frame.theta_b_total);
  const double rw_ode = std::abs(pl.theta_rw - frame.theta_rw_total);
  if (b_gap > tol_phase || b_ode > tol_phase || rw_ode > tol_phase)
    throw accuracy_error(
        "independent phase routes disagree beyond tol_phase (loop vs rate " +
        format_g17(b_gap) + ", loop vs transport " + format_g17(b_ode) +
        ", interband vs transport " + format_g17(rw_ode) + ")");
}

void check_level_algebra(const phase_ledger& pl,
                         const std::vector<magnetic_level>& levels) {
  for (const auto& lv : levels)
    if (quantization_residual(pl, lv) > 1e-10)
      throw accuracy_error("level quantization identity violated at n = " +
                           std::to_string(lv.n));
}

std::vector<band_path_point> band_path(const bloch_solver& solver,
                                       const run_config& cfg) {
  // Straight segment from the zone center halfway to the reciprocal-cell
  // boundary along the configured seed direction.
  const Vec2 d2 = cfg.orbit.seed_dir.normalized();
  const Vec3 kend =
      0.5 * (d2[0] * solver.lat().B.col(0) + d2[1] * solver.lat().B.col(1));
  const int npts = cfg.kpath_samples;
  const int nb = cfg.band_hi - cfg.band_lo + 1;
  std::vector<band_path_point> rows(
      static_cast<std::size_t>(npts) * static_cast<std::size_t>(nb));
  parallel_for(static_cast<std::size_t>(npts), [&](std::size_t i) {
    const double t = static_cast<double>(i) / (npts - 1);
    const Vec3 k = t * kend;
    const Eigen::VectorXd E = solver.energies(k, cfg.band_lo, cfg.band_hi);
    for (int n = cfg.band_lo; n <= cfg.band_hi; ++n) {
      band_path_point& row =
          rows[i * static_cast<std::size_t>(nb) +
               static_cast<std::size_t>(n - cfg.band_lo)];
      row.k = k;
      row.n = n;
      row.E = E[n - cfg.band_lo];
    }
  }, static_cast<unsigned>(cfg.threads));
  return rows;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "bands", "orbit", "beam", "phases", "levels", "verify", "sweep"};
  return names;
}

json run_command(const std::string& cmd, const run_config& cfg,
                 const std::string& out_dir) {
  if (std::find(command_names().begin(), command_names().end(), cmd) ==
      command_names().end())
    throw input_error("unknown command '" + cmd + "'");

  ensure_dir(out_dir);
  write_json_file(out_dir, "config_echo", cfg.echo());

  const lattice lat = lattice::from_basis(cfg.basis);
  const potential pot = potential::from_list(cfg.vhat);
  const bloch_solver solver(lat, pot, cfg.cutoff, cfg.band_index,
                            cfg.delta_gap, cfg.tol_eig);
  const bool dat = cfg.wants("dat");

  json summary;
  summary["command"] = cmd;
  summary["conventions"] = conventions_json();
  summary["config"] = cfg.echo();

  auto traced_orbit = [&]() { return orbit_tracer(solver).trace(cfg.orbit); };

  if (cmd == "bands") {
    const auto rows = band_path(solver, cfg);
    write_table(out_dir, bands_csv(rows), dat);
    summary["bands"] = {{"rows", rows.size()},
                        {"band_window", {cfg.band_lo, cfg.band_hi}},
                        {"kpath_samples", cfg.kpath_samples}};
  } else if (cmd == "orbit") {
    const orbit_data orb = traced_orbit();
    write_table(out_dir, orbit_csv(orb), dat);
    write_table(out_dir, area_csv({{orb.k3, orb.area}}), dat);
    summary["orbit"] = {{"T", orb.T},
                        {"S", orb.area},
                        {"k3", orb.k3},
                        {"seed", {orb.seed[0], orb.seed[1]}},
                        {"samples", orb.J},
                        {"orientation", orb.orientation},
                        {"closure_error", orb.closure_error}};
  } else if (cmd == "beam") {
    const orbit_data orb = traced_orbit();
    const beam_frame frame = frame_propagator(solver, orb).propagate(cfg.beam);
    write_table(out_dir, frame_csv(frame), dat);
    summary["beam"] = {{"N_M", frame.maslov},
                       {"theta_b_transport", frame.theta_b_total},
                       {"theta_rw_transport", frame.theta_rw_total},
                       {"invariants", invariants_json(frame.inv)}};
  } else if (cmd == "phases") {
    const orbit_data orb = traced_orbit();
    const beam_frame frame = frame_propagator(solver, orb).propagate(cfg.beam);
    const phase_ledger pl = phase_accumulator(solver).compute(orb, frame);
    check_ledger_routes(pl, frame, cfg.tol_phase);
    json pj = ledger_json(pl);
    pj["cross_checks"] = {{"theta_b_rate_integral", pl.theta_b_rate},
                          {"theta_b_transport", frame.theta_b_total},
                          {"theta_rw_transport", frame.theta_rw_total},
                          {"tol_phase", cfg.tol_phase}};
    write_json_file(out_dir, "phases", pj);
    summary["phases"] = pj;
  } else if (cmd == "levels") {
    const orbit_data orb = traced_orbit();
    const beam_frame frame = frame_propagator(solver, orb).propagate(cfg.beam);
    const phase_ledger pl = phase_accumulator(solver).compute(orb, frame);
    check_ledger_routes(pl, frame, cfg.tol_phase);
    const auto levels = quantized_levels(pl, cfg.n_min, cfg.n_max);
    check_level_algebra(pl, levels);
    write_table(out_dir, levels_csv(levels), dat);
    summary["levels"] = levels_json(levels);
    summary["phases"] = ledger_json(pl);
  } else if (cmd == "verify") {
    const orbit_data orb = traced_orbit();
    const beam_frame frame = frame_propagator(solver, orb).propagate(cfg.beam);
    const quasimode_builder builder(solver, orb, frame);

    const transport_report tr = builder.transport_consistency();
    const std::vector<double> deltas = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
    const double eik = builder.eikonal_order(0.37 * orb.T, deltas);
    quasimode_opts qopt;
    qopt.tube_factor = cfg.tube_factor;
    qopt.feet = cfg.feet;
    qopt.offsets = cfg.offsets;
    qopt.threads = cfg.threads;
    const residual_report rr = builder.residual_scaling(cfg.eps_list, qopt);

    bool monotone = true;
    for (std::size_t i = 1; i < rr.points.size(); ++i)
      if (rr.points[i].sup_residual > rr.points[i - 1].sup_residual)
        monotone = false;

    json vj;
    vj["transport"] = {{"max_route_gap", tr.max_route_gap},
                       {"monodromy_gap", tr.monodromy_gap},
                       {"det_ratio_gap", tr.det_ratio_gap},
                       {"arg_winding_gap", tr.arg_winding_gap},
                       {"tol_route", 1e-7},
                       {"tol_monodromy", 1e-6}};
    vj["eikonal"] = {{"order", std::isfinite(eik) ? json(eik) : json()},
                     {"vacuous", !std::isfinite(eik)},
                     {"offsets", deltas},
                     {"min_order", 2.8}};
    json pts = json::array();
    for (const auto& pt : rr.points)
      pts.push_back({{"eps", pt.eps}, {"sup_residual", pt.sup_residual}});
    vj["residual"] = {{"points", pts},
                      {"slope", rr.slope},
                      {"slope_window", {1.35, 1.65}},
                      {"within_window", rr.slope >= 1.35 && rr.slope <= 1.65},
                      {"tube_factor", cfg.tube_factor},
                      {"tube_cap", rr.tube_cap},
                      {"min_transverse_curv", rr.min_transverse_curv},
                      {"monotone", monotone}};
    write_table(out_dir, residual_csv(rr), dat);
    write_json_file(out_dir, "verify", vj);
    summary["verify"] = vj;

    if (tr.max_route_gap > 1e-7)
      throw accuracy_error("transport routes disagree: gap " +
                           format_g17(tr.max_route_gap));
    if (tr.monodromy_gap > 1e-6)
      throw accuracy_error("amplitude monodromy off by " +
                           format_g17(tr.monodromy_gap));
    if (std::isfinite(eik) && eik < 2.8)
      throw accuracy_error("band error vanishing order " + format_g17(eik) +
                           " below 2.8");
    if (rr.min_transverse_curv < 0.8 * frame.inv.min_transverse_imM)
      throw accuracy_error("transverse decay of the phase fell below its floor");
    // A slope above the window means faster decay than promised (exact on
    // quadratic bands); only undershooting the guaranteed rate is fatal.
    if (rr.slope < 1.35)
      throw accuracy_error("residual scaling exponent " + format_g17(rr.slope) +
                           " below 1.35");
  } else {  // sweep
    if (cfg.k3_grid.empty())
      throw input_error("sweep requires orbit.k3_grid in the configuration");
    sweep_opts sopt;
    sopt.k3_values = cfg.k3_grid;
    sopt.n_min = cfg.n_min;
    sopt.n_max = cfg.n_max;
    sopt.density_bins = cfg.density_bins;
    sopt.eps_lo = cfg.eps_window_lo;
    sopt.eps_hi = cfg.eps_window_hi;
    sopt.threads = cfg.threads;
    const sweep_result res = level_sweep(solver, cfg.orbit, cfg.beam).run(sopt);

    std::vector<std::pair<double, double>> prof;
    std::vector<magnetic_level> pooled;
    json slices = json::array();
    for (const auto& sl : res.slices) {
      prof.emplace_back(sl.k3, sl.area);
      pooled.insert(pooled.end(), sl.levels.begin(), sl.levels.end());
      slices.push_back({{"k3", sl.k3},
                        {"S", sl.area},
                        {"T", sl.T},
                        {"N_M", sl.ledger.maslov},
                        {"gamma", sl.ledger.gamma},
                        {"theta_b", sl.ledger.theta_b},
                        {"theta_rw", sl.ledger.theta_rw}});
    }
    write_table(out_dir, area_csv(prof), dat);
    write_table(out_dir, levels_csv(pooled), dat);
    write_table(out_dir, density_csv(res.density), dat);
    summary["sweep"] = {{"slices", slices},
                        {"k3_step", res.k3_step},
                        {"k3_extremal_area", res.k3_extremal_area}};
    if (res.has_peak) {
      const auto& peak = res.density[static_cast<std::size_t>(res.peak_bin)];
      summary["sweep"]["peak"] = {{"bin", res.peak_bin},
                                  {"eps_lo", peak.eps_lo},
                                  {"eps_hi", peak.eps_hi},
                                  {"count", peak.count},
                                  {"k3", res.peak_k3}};
    } else {
      summary["sweep"]["peak"] = nullptr;
      summary["sweep"]["warning"] = res.warning;
    }
  }

  write_json_file(out_dir, "summary", summary);
  return summary;
}

}  // namespace blochbeam
