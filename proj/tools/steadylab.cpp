#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "steadylab/config.hpp"
#include "steadylab/error.hpp"
#include "steadylab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady Navier-Stokes experiments on the periodic box"};
  app.set_version_flag("--version", steadylab::kToolVersion);

  std::string command;
  std::string config_path;
  std::string out_dir;
  int workers = 1;
  bool echo = false;
  app.add_option("command", command, "build-steady | decay | stability | verify-bounds | sweep")
      ->required()
      ->check(CLI::IsMember({"build-steady", "decay", "stability", "verify-bounds", "sweep"}));
  app.add_option("--config", config_path, "key = value configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "concurrent sweep points")->check(CLI::Range(1, 256));
  app.add_flag("--echo-config", echo, "print the effective configuration and exit");
  CLI11_PARSE(app, argc, argv);

  nlohmann::json report;
  report["command"] = command;
  try {
    const steadylab::ExperimentConfig cfg = steadylab::load_config(config_path);
    if (echo) {
      std::cout << cfg.to_text();
      return 0;
    }
    if (out_dir.empty()) throw steadylab::ConfigError("--out is required");
    const auto manifest = steadylab::run_command(command, cfg, out_dir, workers);
    std::cout << steadylab::stdout_summary(manifest, out_dir).dump() << std::endl;
    return manifest.passed() ? 0 : 1;
  } catch (const steadylab::ConfigError& e) {
    report["passed"] = false;
    report["error"] = e.what();
    report["kind"] = "config";
    std::cout << report.dump() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    report["passed"] = false;
    report["error"] = e.what();
    report["kind"] = "runtime";
    std::cout << report.dump() << std::endl;
    return 3;
  }
}
