#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blochbeam/config.hpp"
#include "blochbeam/errors.hpp"
#include "blochbeam/pipeline.hpp"
#include "blochbeam/version.hpp"

namespace {

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const blochbeam::assumption_error*>(&e)) return "assumption";
  if (dynamic_cast<const blochbeam::input_error*>(&e)) return "input";
  if (dynamic_cast<const blochbeam::accuracy_error*>(&e)) return "accuracy";
  if (dynamic_cast<const blochbeam::io_error*>(&e)) return "io";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-beam construction for a Bloch electron in a weak "
               "constant magnetic field"};
  app.set_version_flag("--version", std::string(blochbeam::version_string));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool json_out = false;

  for (const auto& name : blochbeam::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--json", json_out, "print the JSON summary on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // Help/version exit with 0; every real parse problem is an input error.
    return rc == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const blochbeam::run_config cfg = blochbeam::parse_config(config_path);
    const nlohmann::json summary = blochbeam::run_command(cmd, cfg, out_dir);
    if (json_out) std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    const int code = blochbeam::exit_code_for(e);
    if (json_out) {
      const nlohmann::json err = {
          {"error", {{"kind", error_kind(e)}, {"message", e.what()}}},
          {"exit", code}};
      std::cerr << err.dump(2) << "\n";
    } else {
      std::cerr << "error (" << error_kind(e) << "): " << e.what() << "\n";
    }
    return code;
  }
}
