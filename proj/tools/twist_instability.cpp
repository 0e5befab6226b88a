// twist-instability: instability measures, shadowing orbits and entropy
// bounds for area-preserving twist maps given by a generating function.
//
//   twist-instability <command> --config <path> [--out <dir>] [--emit <what>]
//
// Commands: fixed-point, homoclinic, delta0, delta1, delta2, flow,
// audit-flux, shadow, entropy-bound, full.  The JSON report goes to standard
// output; --emit writes tidy CSV series (S-curve, homoclinics, flux-audit,
// orbit, trajectory) under --out.  Exit codes: 0 success, 2 configuration
// error, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twist/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"instability measures and shadowing orbits of twist maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> emits;
  bool stamp = false;

  const std::vector<std::string> commands = {"fixed-point", "homoclinic", "delta0",
                                             "delta1",      "delta2",     "flow",
                                             "audit-flux",  "shadow",     "entropy-bound",
                                             "full"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "directory for emitted CSV files");
    sub->add_option("--emit", emits,
                    "series to emit: S-curve, homoclinics, flux-audit, orbit, trajectory");
    sub->add_flag("--stamp", stamp, "include a timestamp in the provenance block");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json config_json;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cout << nlohmann::json{{"error",
                                   {{"code", "InvalidConfig"},
                                    {"message", "cannot open config file: " + config_path}}}}
                       .dump(2)
                << std::endl;
      return 2;
    }
    in >> config_json;
  } catch (const nlohmann::json::exception& e) {
    std::cout << nlohmann::json{{"error", {{"code", "InvalidConfig"}, {"message", e.what()}}}}
                     .dump(2)
              << std::endl;
    return 2;
  }

  try {
    const twist::cli::RunConfig cfg = twist::cli::RunConfig::from_json(config_json);
    const twist::cli::RunOutput out = twist::cli::run(command, cfg, stamp);
    std::cout << out.report.dump(2) << std::endl;
    for (const auto& what : emits) twist::cli::emit_plot_data(out, what, out_dir);
    return 0;
  } catch (const twist::Error& e) {
    std::cout << nlohmann::json{
                     {"error",
                      {{"code", twist::error_code_name(e.code())}, {"message", e.what()}}}}
                     .dump(2)
              << std::endl;
    return e.code() == twist::ErrorCode::InvalidConfig ? 2 : 3;
  } catch (const std::exception& e) {
    std::cout << nlohmann::json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump(2)
              << std::endl;
    return 3;
  }
}
