// Command-line front end: run | estimate-pi | estimate-eta | selftest.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "driftshift/runner.hpp"
#include "driftshift/selfcheck.hpp"

namespace {

int default_jobs() {
  if (const char* env = std::getenv("DRIFTSHIFT_JOBS")) {
    try {
      const int jobs = std::stoi(env);
      if (jobs >= 1) return jobs;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring DRIFTSHIFT_JOBS=" << env << " (expected a positive integer)\n";
  }
  return 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size() || item.empty() || item[0] == '-') throw std::invalid_argument(item);
    seeds.push_back(v);
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classification under drifting label probabilities: simulations and estimators"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string seeds;
  int jobs = default_jobs();
  bool emit_plots = false;
  std::string grid = "-3:3:61";
  std::string fault;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seeds", seeds, "Comma-separated seed list (overrides the config)");
    cmd->add_option("--jobs", jobs, "Worker threads (default: DRIFTSHIFT_JOBS or 1)")->check(CLI::PositiveNumber);
    cmd->add_flag("--emit-plots", emit_plots, "Also write a gnuplot script");
  };

  auto* run = app.add_subcommand("run", "Sequential policy: per-round regret, summary and manifest");
  add_common(run);
  auto* est_pi = app.add_subcommand("estimate-pi", "Label-probability estimates per round");
  add_common(est_pi);
  auto* est_eta = app.add_subcommand("estimate-eta", "Density-ratio estimates on a grid");
  add_common(est_eta);
  est_eta->add_option("--grid", grid, "lo:hi:count for the real line")->capture_default_str();
  auto* selftest = app.add_subcommand("selftest", "Invariant suite with a pass/fail table");
  selftest->add_option("--inject-fault", fault)->group("")->check(CLI::IsMember({"legendre"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (selftest->parsed()) {
    const auto results =
        driftshift::run_selfcheck(fault == "legendre" ? driftshift::Basis::corrupted() : driftshift::Basis::library());
    std::cout << driftshift::format_report(results);
    if (driftshift::all_passed(results)) return driftshift::kExitOk;
    std::cerr << "failed invariants:";
    for (const auto& r : results)
      if (!r.passed) std::cerr << " " << r.name;
    std::cerr << "\n";
    return driftshift::kExitFailure;
  }

  driftshift::RunOptions options;
  options.jobs = jobs;
  options.emit_plots = emit_plots;
  options.grid = grid;
  if (!out_dir.empty()) options.out_dir = out_dir;
  if (!seeds.empty()) {
    try {
      options.seeds = parse_seeds(seeds);
    } catch (const std::exception&) {
      std::cerr << "config error [--seeds]: expected a comma-separated list of nonnegative integers\n";
      return driftshift::kExitBadConfig;
    }
  }

  if (run->parsed()) return driftshift::cmd_run(config, options, std::cout, std::cerr);
  if (est_pi->parsed()) return driftshift::cmd_estimate_pi(config, options, std::cout, std::cerr);
  return driftshift::cmd_estimate_eta(config, options, std::cout, std::cerr);
}
