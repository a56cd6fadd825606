#pragma once

#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blochbeam/frame.hpp"
#include "blochbeam/lattice.hpp"
#include "blochbeam/orbit.hpp"

namespace blochbeam {

// Validated run configuration with defaults filled in. Parsing is strict:
// unknown keys, type mismatches and invariant violations are fatal.
struct run_config {
  // lattice block
  Mat3 basis;  // lattice vectors in the columns
  std::vector<fourier_coeff> vhat;

  // solver block
  double cutoff = 3.0;
  int band_index = 1;
  double delta_gap = 1e-8;
  double tol_eig = 1e-8;
  int band_lo = 1;
  int band_hi = 4;
  int kpath_samples = 64;

  // orbit block (k3_grid drives the sweep command; k3 the single-orbit ones)
  orbit_params orbit;
  std::vector<double> k3_grid;

  // beam block
  beam_opts beam;

  // phases block
  double tol_phase = 1e-6;
  int n_min = 0;
  int n_max = 5;
  // optional histogram window for the sweep command (NaN: span the levels)
  double eps_window_lo = std::numeric_limits<double>::quiet_NaN();
  double eps_window_hi = std::numeric_limits<double>::quiet_NaN();

  // residual block
  std::vector<double> eps_list = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  double tube_factor = 0.4;
  int feet = 48;
  int offsets = 9;

  // output block
  std::vector<std::string> formats = {"csv", "json"};
  int density_bins = 24;

  int threads = 0;

  bool wants(const std::string& format) const;

  // Effective configuration (defaults applied), echoed into every run.
  nlohmann::json echo() const;
};

run_config parse_config_json(const nlohmann::json& j);
run_config parse_config(const std::string& path);

}  // namespace blochbeam
