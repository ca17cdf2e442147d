// linf: batch runner for L-infinity estimate scenarios.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "linf/error.hpp"
#include "linf/parallel.hpp"
#include "linf/scenario.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"linf: subsolution certificates and L-infinity budgets on the torus"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  int threads = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", config, "scenario JSON");
    if (needs_config) c->required();
    cmd->add_option("--out", out, "output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "override the scenario seed");
    cmd->add_option("--tol", tol, "override the Newton tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  };
  auto* check = app.add_subcommand("check", "subsolution certificates for the configured data");
  auto* verify = app.add_subcommand("verify", "solve and run the full estimate chain");
  auto* sweep = app.add_subcommand("sweep", "uniformity sweep over a degenerating metric family");
  auto* budget = app.add_subcommand("budget", "closed-form constants only");
  auto* report = app.add_subcommand("report", "aggregate pass flags of an output directory");
  for (auto* c : {check, verify, sweep, budget}) add_common(c, true);
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    linf::set_threads(threads);
    linf::RunResult res;
    if (report->parsed()) {
      res = linf::run_report(out);
    } else {
      fs::create_directories(out);
      linf::Scenario s = linf::load_scenario(config);
      if (seed) s.seed = *seed;
      if (tol) s.tol.newton = *tol;
      if (check->parsed()) res = linf::run_check(s, out);
      if (verify->parsed()) res = linf::run_verify(s, out);
      if (sweep->parsed()) res = linf::run_sweep(s, out);
      if (budget->parsed()) res = linf::run_budget(s, out);
    }
    std::cout << res.summary.dump() << '\n';
    for (const auto& f : res.files) std::cerr << "wrote " << (fs::path(out) / f).string() << '\n';
    return res.exit_code;
  } catch (const linf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation error: " << e.what() << '\n';
    return 3;
  }
}
