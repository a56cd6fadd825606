#include "blochbeam/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "blochbeam/errors.hpp"

namespace blochbeam {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ctx, const std::string& what) {
  throw input_error("config: " + ctx + ": " + what);
}

// Tracks which keys of one object were consumed; everything else is fatal.
class strict_object {
 public:
  strict_object(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) fail(ctx_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double num(const char* key, double dflt) {
    if (!has(key)) return dflt;
    return num(key);
  }

  double num(const char* key) {
    const json& v = at(key);
    if (!v.is_number()) fail(ctx_, std::string("key '") + key + "' must be a number");
    return v.get<double>();
  }

  int integer(const char* key, int dflt) {
    if (!has(key)) return dflt;
    const json& v = at(key);
    if (!v.is_number_integer())
      fail(ctx_, std::string("key '") + key + "' must be an integer");
    return v.get<int>();
  }

  std::vector<double> num_list(const char* key) {
    const json& v = at(key);
    if (!v.is_array()) fail(ctx_, std::string("key '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number())
        fail(ctx_, std::string("key '") + key + "' must contain numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (seen_.find(item.key()) == seen_.end())
        fail(ctx_, "unknown key '" + item.key() + "'");
  }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw input_error("config: " + what + " must be positive");
}

}  // namespace

bool run_config::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

run_config parse_config_json(const json& j) {
  run_config cfg;
  cfg.basis = lattice::cubic().A;

  strict_object root(j, "top level");

  if (root.has("lattice")) {
    strict_object lat(root.at("lattice"), "lattice");
    if (lat.has("basis")) {
      const json& b = lat.at("basis");
      if (!b.is_array() || b.size() != 3) fail("lattice", "basis must be 3 vectors");
      for (int i = 0; i < 3; ++i) {
        const json& row = b[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != 3)
          fail("lattice", "each basis vector must have 3 components");
        for (int c = 0; c < 3; ++c) {
          const json& e = row[static_cast<std::size_t>(c)];
          if (!e.is_number()) fail("lattice", "basis entries must be numbers");
          cfg.basis(c, i) = e.get<double>();
        }
      }
    }
    if (lat.has("potential")) {
      const json& p = lat.at("potential");
      if (!p.is_array()) fail("lattice", "potential must be an array");
      for (const auto& entry : p) {
        strict_object coeff(entry, "potential entry");
        const json& g = coeff.at("g");
        if (!g.is_array() || g.size() != 3) fail("potential entry", "g must have 3 integers");
        fourier_coeff fc;
        for (int c = 0; c < 3; ++c) {
          const json& e = g[static_cast<std::size_t>(c)];
          if (!e.is_number_integer()) fail("potential entry", "g must have 3 integers");
          fc.g[c] = e.get<int>();
        }
        fc.v = cplx(coeff.num("re", 0.0), coeff.num("im", 0.0));
        coeff.finish();
        cfg.vhat.push_back(fc);
      }
    }
    lat.finish();
  }

  if (root.has("solver")) {
    strict_object sv(root.at("solver"), "solver");
    cfg.cutoff = sv.num("cutoff", cfg.cutoff);
    cfg.band_index = sv.integer("band_index", cfg.band_index);
    cfg.delta_gap = sv.num("delta_gap", cfg.delta_gap);
    cfg.tol_eig = sv.num("tol_eig", cfg.tol_eig);
    if (sv.has("band_window")) {
      const auto w = sv.num_list("band_window");
      if (w.size() != 2) fail("solver", "band_window must be [lo, hi]");
      cfg.band_lo = static_cast<int>(w[0]);
      cfg.band_hi = static_cast<int>(w[1]);
    }
    cfg.kpath_samples = sv.integer("kpath_samples", cfg.kpath_samples);
    sv.finish();
  }

  if (root.has("orbit")) {
    strict_object ob(root.at("orbit"), "orbit");
    if (!ob.has("E0")) fail("orbit", "missing required key 'E0'");
    cfg.orbit.E0 = ob.num("E0");
    cfg.orbit.k3 = ob.num("k3", cfg.orbit.k3);
    if (ob.has("k3_grid")) cfg.k3_grid = ob.num_list("k3_grid");
    cfg.orbit.mu = ob.num("mu", cfg.orbit.mu);
    if (ob.has("seed_dir")) {
      const auto d = ob.num_list("seed_dir");
      if (d.size() != 2) fail("orbit", "seed_dir must have 2 components");
      cfg.orbit.seed_dir = Vec2(d[0], d[1]);
      if (cfg.orbit.seed_dir.norm() < 1e-12) fail("orbit", "seed_dir must be nonzero");
    }
    cfg.orbit.seed_max = ob.num("seed_max", cfg.orbit.seed_max);
    cfg.orbit.t_guard = ob.num("t_guard", cfg.orbit.t_guard);
    cfg.orbit.t_max = ob.num("t_max", cfg.orbit.t_max);
    cfg.orbit.tol_closure = ob.num("tol_closure", cfg.orbit.tol_closure);
    cfg.orbit.samples = ob.integer("samples", cfg.orbit.samples);
    cfg.orbit.rtol = ob.num("rtol", cfg.orbit.rtol);
    cfg.orbit.atol = ob.num("atol", cfg.orbit.atol);
    ob.finish();
  } else {
    fail("top level", "missing required block 'orbit'");
  }

  if (root.has("beam")) {
    strict_object bm(root.at("beam"), "beam");
    cfg.beam.tol_frame = bm.num("tol_frame", cfg.beam.tol_frame);
    cfg.beam.d_min = bm.num("d_min", cfg.beam.d_min);
    cfg.beam.p_min = bm.num("p_min", cfg.beam.p_min);
    cfg.beam.rtol = bm.num("rtol", cfg.beam.rtol);
    cfg.beam.atol = bm.num("atol", cfg.beam.atol);
    bm.finish();
  }

  if (root.has("phases")) {
    strict_object ph(root.at("phases"), "phases");
    cfg.tol_phase = ph.num("tol_phase", cfg.tol_phase);
    if (ph.has("n_range")) {
      const auto r = ph.num_list("n_range");
      if (r.size() != 2) fail("phases", "n_range must be [n_min, n_max]");
      cfg.n_min = static_cast<int>(r[0]);
      cfg.n_max = static_cast<int>(r[1]);
    }
    if (ph.has("eps_window")) {
      const auto w = ph.num_list("eps_window");
      if (w.size() != 2) fail("phases", "eps_window must be [eps_lo, eps_hi]");
      cfg.eps_window_lo = w[0];
      cfg.eps_window_hi = w[1];
    }
    ph.finish();
  }

  if (root.has("residual")) {
    strict_object rs(root.at("residual"), "residual");
    if (rs.has("eps_list")) cfg.eps_list = rs.num_list("eps_list");
    cfg.tube_factor = rs.num("tube_factor", cfg.tube_factor);
    cfg.feet = rs.integer("feet", cfg.feet);
    cfg.offsets = rs.integer("offsets", cfg.offsets);
    rs.finish();
  }

  if (root.has("output")) {
    strict_object out(root.at("output"), "output");
    if (out.has("formats")) {
      const json& f = out.at("formats");
      if (!f.is_array()) fail("output", "formats must be an array");
      cfg.formats.clear();
      for (const auto& e : f) {
        if (!e.is_string()) fail("output", "formats must contain strings");
        const std::string s = e.get<std::string>();
        if (s != "csv" && s != "json" && s != "dat")
          fail("output", "unknown format '" + s + "'");
        cfg.formats.push_back(s);
      }
    }
    cfg.density_bins = out.integer("density_bins", cfg.density_bins);
    out.finish();
  }

  cfg.threads = root.integer("threads", cfg.threads);
  root.finish();

  // Invariants.
  require_positive(cfg.cutoff, "solver.cutoff");
  if (cfg.band_index < 1) throw input_error("config: solver.band_index must be >= 1");
  require_positive(cfg.delta_gap, "solver.delta_gap");
  require_positive(cfg.tol_eig, "solver.tol_eig");
  if (cfg.band_lo < 1 || cfg.band_hi < cfg.band_lo)
    throw input_error("config: solver.band_window must satisfy 1 <= lo <= hi");
  if (cfg.kpath_samples < 2)
    throw input_error("config: solver.kpath_samples must be >= 2");
  require_positive(cfg.orbit.mu, "orbit.mu");
  require_positive(cfg.orbit.seed_max, "orbit.seed_max");
  require_positive(cfg.orbit.t_guard, "orbit.t_guard");
  require_positive(cfg.orbit.t_max, "orbit.t_max");
  require_positive(cfg.orbit.tol_closure, "orbit.tol_closure");
  require_positive(cfg.orbit.rtol, "orbit.rtol");
  require_positive(cfg.orbit.atol, "orbit.atol");
  if (cfg.orbit.samples < 16) throw input_error("config: orbit.samples must be >= 16");
  require_positive(cfg.beam.tol_frame, "beam.tol_frame");
  require_positive(cfg.beam.d_min, "beam.d_min");
  require_positive(cfg.beam.p_min, "beam.p_min");
  require_positive(cfg.beam.rtol, "beam.rtol");
  require_positive(cfg.beam.atol, "beam.atol");
  require_positive(cfg.tol_phase, "phases.tol_phase");
  if (cfg.n_min < 0 || cfg.n_max < cfg.n_min)
    throw input_error("config: phases.n_range must satisfy 0 <= n_min <= n_max");
  if (std::isfinite(cfg.eps_window_lo) != std::isfinite(cfg.eps_window_hi) ||
      (std::isfinite(cfg.eps_window_lo) &&
       !(cfg.eps_window_lo < cfg.eps_window_hi && cfg.eps_window_lo >= 0.0)))
    throw input_error(
        "config: phases.eps_window must satisfy 0 <= eps_lo < eps_hi");
  if (cfg.eps_list.size() < 4)
    throw input_error("config: residual.eps_list needs at least 4 values");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    require_positive(cfg.eps_list[i], "residual.eps_list entries");
    if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
      throw input_error("config: residual.eps_list must be strictly decreasing");
  }
  require_positive(cfg.tube_factor, "residual.tube_factor");
  if (cfg.feet < 4) throw input_error("config: residual.feet must be >= 4");
  if (cfg.offsets < 3) throw input_error("config: residual.offsets must be >= 3");
  if (!std::is_sorted(cfg.k3_grid.begin(), cfg.k3_grid.end()))
    throw input_error("config: orbit.k3_grid must be sorted ascending");
  if (cfg.density_bins < 1) throw input_error("config: output.density_bins must be >= 1");
  if (cfg.threads < 0) throw input_error("config: threads must be >= 0");

  // Constructing the potential validates Hermitian pairing and duplicates.
  (void)potential::from_list(cfg.vhat);
  (void)lattice::from_basis(cfg.basis);
  return cfg;
}

run_config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("config: ") + e.what());
  }
  return parse_config_json(j);
}

nlohmann::json run_config::echo() const {
  json pot = json::array();
  for (const auto& fc : vhat)
    pot.push_back({{"g", {fc.g[0], fc.g[1], fc.g[2]}},
                   {"re", fc.v.real()},
                   {"im", fc.v.imag()}});
  json basis_rows = json::array();
  for (int i = 0; i < 3; ++i)
    basis_rows.push_back({basis(0, i), basis(1, i), basis(2, i)});
  json j = {
      {"lattice", {{"basis", basis_rows}, {"potential", pot}}},
      {"solver",
       {{"cutoff", cutoff},
        {"band_index", band_index},
        {"delta_gap", delta_gap},
        {"tol_eig", tol_eig},
        {"band_window", {band_lo, band_hi}},
        {"kpath_samples", kpath_samples}}},
      {"orbit",
       {{"E0", orbit.E0},
        {"k3", orbit.k3},
        {"mu", orbit.mu},
        {"seed_dir", {orbit.seed_dir[0], orbit.seed_dir[1]}},
        {"seed_max", orbit.seed_max},
        {"t_guard", orbit.t_guard},
        {"t_max", orbit.t_max},
        {"tol_closure", orbit.tol_closure},
        {"samples", orbit.samples},
        {"rtol", orbit.rtol},
        {"atol", orbit.atol}}},
      {"beam",
       {{"tol_frame", beam.tol_frame},
        {"d_min", beam.d_min},
        {"p_min", beam.p_min},
        {"rtol", beam.rtol},
        {"atol", beam.atol}}},
      {"phases", {{"tol_phase", tol_phase}, {"n_range", {n_min, n_max}}}},
      {"residual",
       {{"eps_list", eps_list},
        {"tube_factor", tube_factor},
        {"feet", feet},
        {"offsets", offsets}}},
      {"output", {{"formats", formats}, {"density_bins", density_bins}}},
      {"threads", threads}};
  if (!k3_grid.empty()) j["orbit"]["k3_grid"] = k3_grid;
  if (std::isfinite(eps_window_lo))
    j["phases"]["eps_window"] = {eps_window_lo, eps_window_hi};
  return j;
}

}  // namespace blochbeam
