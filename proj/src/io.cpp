#include "blochbeam/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "blochbeam/errors.hpp"
#include "blochbeam/version.hpp"

namespace blochbeam {

namespace {

std::string join(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += f;
    first = false;
  }
  return out;
}

std::string g(double v) { return format_g17(v); }
std::string i(int v) { return std::to_string(v); }

}  // namespace

csv_table orbit_csv(const orbit_data& orb) {
  csv_table t;
  t.name = "orbit";
  t.header = "s,k1,k2,vy1,vy2";
  for (int j = 0; j < orb.J; ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    t.rows.push_back(join({g(orb.s[u]), g(orb.k[u][0]), g(orb.k[u][1]),
                           g(orb.kdot[u][1] / orb.mu),
                           g(-orb.kdot[u][0] / orb.mu)}));
  }
  return t;
}

csv_table area_csv(const std::vector<std::pair<double, double>>& k3_area) {
  csv_table t;
  t.name = "area";
  t.header = "k3,S";
  for (const auto& [k3, S] : k3_area) t.rows.push_back(join({g(k3), g(S)}));
  return t;
}

csv_table frame_csv(const beam_frame& frame) {
  csv_table t;
  t.name = "frame";
  std::string h = "s,k1,k2";
  for (const char* m : {"Y", "N", "M"})
    for (const char* e : {"11", "12", "21", "22"}) {
      h += std::string(",re") + m + e;
      h += std::string(",im") + m + e;
    }
  h += ",abs_detY,arg_detY,theta_b,theta_rw";
  t.header = h;
  auto row = [&](const frame_sample& fs) {
    std::string r = join({g(fs.s), g(fs.k[0]), g(fs.k[1])});
    for (const Mat2c* m : {&fs.Y, &fs.N, &fs.M})
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          r += ',' + g((*m)(a, b).real());
          r += ',' + g((*m)(a, b).imag());
        }
    r += ',' + g(std::abs(fs.detY));
    r += ',' + g(fs.arg_detY);
    r += ',' + g(fs.theta_b);
    r += ',' + g(fs.theta_rw);
    return r;
  };
  for (const auto& fs : frame.samples) t.rows.push_back(row(fs));
  t.rows.push_back(row(frame.terminal));
  return t;
}

csv_table levels_csv(const std::vector<magnetic_level>& levels) {
  csv_table t;
  t.name = "levels";
  t.header = "k3,n,eps_n,gamma,theta_b,theta_rw,N_M";
  for (const auto& lv : levels)
    t.rows.push_back(join({g(lv.k3), i(lv.n), g(lv.eps), g(lv.gamma),
                           g(lv.theta_b), g(lv.theta_rw), i(lv.maslov)}));
  return t;
}

csv_table density_csv(const std::vector<density_bin>& bins) {
  csv_table t;
  t.name = "density";
  t.header = "eps_bin,count";
  for (const auto& b : bins)
    t.rows.push_back(join({g(0.5 * (b.eps_lo + b.eps_hi)), i(b.count)}));
  return t;
}

csv_table residual_csv(const residual_report& rep) {
  csv_table t;
  t.name = "residual";
  t.header = "eps,sup_residual";
  for (const auto& pt : rep.points)
    t.rows.push_back(join({g(pt.eps), g(pt.sup_residual)}));
  return t;
}

csv_table bands_csv(const std::vector<band_path_point>& rows) {
  csv_table t;
  t.name = "bands";
  t.header = "k1,k2,k3,n,E";
  for (const auto& r : rows)
    t.rows.push_back(join({g(r.k[0]), g(r.k[1]), g(r.k[2]), i(r.n), g(r.E)}));
  return t;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + dir + "': " + ec.message());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << body;
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

}  // namespace

void write_table(const std::string& dir, const csv_table& table, bool dat_mirror) {
  std::string body = table.header + "\n";
  for (const auto& r : table.rows) body += r + "\n";
  write_file(std::filesystem::path(dir) / (table.name + ".csv"), body);
  if (dat_mirror) {
    std::string dat = "# " + table.header + "\n";
    for (const auto& r : table.rows) dat += r + "\n";
    for (auto& ch : dat)
      if (ch == ',') ch = ' ';
    write_file(std::filesystem::path(dir) / (table.name + ".dat"), dat);
  }
}

void write_json_file(const std::string& dir, const std::string& name,
                     const nlohmann::json& j) {
  write_file(std::filesystem::path(dir) / (name + ".json"), j.dump(2) + "\n");
}

nlohmann::json conventions_json() {
  return {
      {"version", version_string},
      {"units", "hbar^2/(2m) = 1, e = 1; cubic default lattice constant 2*pi"},
      {"flow", "kdot = mu * (-dE/dk2, +dE/dk1); orbits traced counterclockwise for mu > 0"},
      {"area_sign", "S = |closed integral of k1 dk2| > 0"},
      {"symplectic_pairing",
       "sigma(u, v) = y_u . n_v - n_u . y_v, bilinear without conjugation; "
       "sigma(G1, G2) and sigma(G2, conj G2) are conserved along the frame"},
      {"interband_sum",
       "R = sum_{m != n} Im[<n|v1|m><m|v2|n>] / (E_m - E_n)"},
      {"theta_rw_sign", "theta_rw = + integral over one period of mu * R"},
      {"theta_b_sign", "theta_b = -arg prod_j <c_j, c_{j+1}> (first slot conjugated)"},
      {"gamma_rule", "gamma = 1/2 when the det-Y winding N_M is odd, else 0"},
      {"level_rule",
       "eps_n = S / (mu * (2*pi*(n + gamma) + theta_b + theta_rw))"}};
}

}  // namespace blochbeam
