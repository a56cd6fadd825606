#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "blochbeam/frame.hpp"
#include "blochbeam/levels.hpp"
#include "blochbeam/numeric.hpp"
#include "blochbeam/orbit.hpp"
#include "blochbeam/quasimode.hpp"
#include "blochbeam/sweep.hpp"

namespace blochbeam {

struct band_path_point {
  Vec3 k;
  int n = 0;
  double E = 0.0;
};

// One output table: exact header line plus pre-rendered rows. All numeric
// fields use locale-independent shortest-faithful formatting, so identical
// inputs produce byte-identical bodies.
struct csv_table {
  std::string name;  // file stem
  std::string header;
  std::vector<std::string> rows;
};

csv_table orbit_csv(const orbit_data& orb);
csv_table area_csv(const std::vector<std::pair<double, double>>& k3_area);
csv_table frame_csv(const beam_frame& frame);
csv_table levels_csv(const std::vector<magnetic_level>& levels);
csv_table density_csv(const std::vector<density_bin>& bins);
csv_table residual_csv(const residual_report& rep);
csv_table bands_csv(const std::vector<band_path_point>& rows);

void ensure_dir(const std::string& dir);
// Writes dir/name.csv; with dat_mirror also dir/name.dat ('#'-header,
// space-separated).
void write_table(const std::string& dir, const csv_table& table, bool dat_mirror);
void write_json_file(const std::string& dir, const std::string& name,
                     const nlohmann::json& j);

// Sign and branch conventions echoed into every JSON summary.
nlohmann::json conventions_json();

}  // namespace blochbeam
