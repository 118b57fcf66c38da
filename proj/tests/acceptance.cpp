// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "driftshift/classifier.hpp"
#include "driftshift/confbands.hpp"
#include "driftshift/densratio.hpp"
#include "driftshift/runner.hpp"
#include "driftshift/selfcheck.hpp"
#include "driftshift/sim.hpp"

using namespace driftshift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome summarize(const std::vector<CheckResult>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += c.name + (c.passed ? "" : " FAILED") + ": " + c.detail;
  }
  return o;
}

// 1. Appendix-lemma invariants.
Outcome lemma_suite() {
  const Basis basis = Basis::library();
  return summarize({check_orthonormality(basis), check_magnitude_bounds(basis), check_gram_eigenvalues(basis),
                    check_weight_norms(), check_clamped_ratio(100000, 7)});
}

// 2. Exactness oracles.
Outcome exactness() {
  return summarize({check_polynomial_reproduction(100, 11), check_two_point_weights(), check_error_identity(200, 13),
                    check_regret_resummation(19)});
}

// 3. Band coverage on every ball around a fixed query, N(0, 1) sample.
Outcome coverage() {
  const double delta = 0.05;
  const double x = 0.3;
  auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  std::string detail;
  bool ok = true;
  for (int n : {200, 1000}) {
    const int reps = 2000;
    std::vector<int> violated(reps, 0);
    parallel_for(reps, jobs(), [&](std::size_t rep) {
      Rng rng(0xc0ffee + static_cast<std::uint64_t>(n), rep);
      std::vector<double> dist(n);
      for (double& d : dist) d = std::abs(rng.normal() - x);
      std::sort(dist.begin(), dist.end());
      for (int k = 0; k < n; ++k) {
        // Closed balls: all points at distance <= dist[k].
        if (k + 1 < n && dist[k + 1] == dist[k]) continue;
        const double r = dist[k];
        const double mass = cdf(x + r) - cdf(x - r);
        if (!population_ci(mass, n, delta).contains(static_cast<double>(k + 1) / n)) {
          violated[rep] = 1;
          return;
        }
      }
    });
    int bad = 0;
    for (int v : violated) bad += v;
    const double freq = 1.0 - static_cast<double>(bad) / reps;
    ok = ok && freq >= 1.0 - delta - 0.02;
    detail += fmt("n=%g: event frequency %.4f (need >= %.2f); ", n, freq, 1.0 - delta - 0.02);
  }
  return {ok, detail};
}

// 4. Estimation rates.
Outcome rates() {
  const double delta = 0.05;
  auto prior_error = [&](int horizon) {
    std::vector<double> err(100);
    parallel_for(100, jobs(), [&](std::size_t i) {
      auto spec = sim::preset("stationary");
      spec.horizon = horizon;
      spec.seed = 1 + i;
      const auto draw = sim::generate(spec);
      const auto state = build_state(draw.pool, draw.stream.prefix(horizon), delta, 1, spec.space);
      err[i] = std::abs(estimate_prior_at(*state, horizon, delta).pi_hat - draw.pis[horizon]);
    });
    return median(err);
  };
  const double e2000 = prior_error(2000);
  const double e200 = prior_error(200);
  const double bound = 3.0 * std::sqrt(std::log(2000 / delta) / 2000);

  std::vector<double> eta_med;
  for (int n : {500, 1000, 2000}) {
    std::vector<double> err(50);
    parallel_for(50, jobs(), [&](std::size_t i) {
      auto spec = sim::preset("stationary");
      spec.n0 = spec.n1 = n;
      spec.horizon = 1;
      spec.seed = 100 * static_cast<std::uint64_t>(n) + i;
      const auto draw = sim::generate(spec);
      const DensityRatioEstimator est(std::make_shared<const LabeledPool>(draw.pool), spec.space, delta);
      double sum = 0.0;
      for (int k = 0; k <= 20; ++k) {
        const Point q = Point::real(-2.0 + 0.2 * k);
        sum += std::abs(est.estimate(q).value - sim::eta_oracle(spec, q).value);
      }
      err[i] = sum / 21.0;
    });
    eta_med.push_back(median(err));
  }
  const bool ok = e2000 <= bound && e2000 < e200 && eta_med[1] < eta_med[0] && eta_med[2] < eta_med[1];
  return {ok, fmt("median |pi_hat - pi|: T=2000 %.4f (bound %.4f), T=200 %.4f; ", e2000, bound, e200) +
                  fmt("median grid |eta_hat - eta| at n=500/1000/2000: %.4f %.4f %.4f", eta_med[0], eta_med[1],
                      eta_med[2])};
}

// 5. End-to-end regret on the slow-sine preset.
Outcome regret() {
  auto spec = sim::preset("slow-sine");
  spec.n0 = spec.n1 = 2000;
  spec.horizon = 2000;
  const auto& path = std::get<sim::HolderSinePath>(spec.trajectory);
  const double declared = path.holder_constant();
  const double certified = sim::holder_certificate([&](double u) { return path.value(u); }, path.beta);
  const double tv = sim::tv_oracle(spec);
  const int first = 1000;
  const int last = 2000;
  std::vector<double> ours(30);
  std::vector<double> fixed(30);
  parallel_for(30, jobs(), [&](std::size_t i) {
    auto s = spec;
    s.seed = 1 + i;
    const RegretTrace trace = regret_trace(s, 0.05, 1);
    ours[i] = sim::dynamic_regret(trace.rows, first, last);
    fixed[i] = fixed_rule_regret(s, first, last);
  });
  const double m = median(ours);
  const double b = median(fixed);
  const bool ok = certified <= declared * (1 + 1e-9) && tv >= 0.6 && m <= 0.10 && m <= b;
  return {ok, fmt("median regret over [T/2, T] %.4f (need <= 0.10 and <= baseline %.4f); ", m, b) +
                  fmt("TV %.4f, Hoelder certificate %.4f <= declared %.4f", tv, certified, declared)};
}

// 6. Byte-identical outputs across runs and thread counts.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("driftshift_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({
  "schema_version": 1,
  "scenario": { "preset": "J-jumps" },
  "estimator": { "delta": 0.05, "beta_bar": 2 },
  "sweep": { "n": [150], "T": [400], "seeds": [1, 2, 3, 4] },
  "regret": { "intervals": [[0.5, 1.0]], "grid_cells": 512 },
  "outputs": { "dir": "unused" }
})";
  auto run = [&](const std::string& cmd, const std::string& tag, int j) {
    const std::string line = std::string(DRIFTSHIFT_CLI) + " " + cmd + " --config " + cfg.string() + " --out " +
                             (root / tag).string() + " --jobs " + std::to_string(j) + " >/dev/null 2>&1";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  bool ok = true;
  int compared = 0;
  for (const std::string cmd : {"run", "estimate-pi", "estimate-eta"}) {
    ok = ok && run(cmd, cmd + "_a", 1) && run(cmd, cmd + "_b", 1) && run(cmd, cmd + "_c", 4);
    for (const auto& e : fs::recursive_directory_iterator(root / (cmd + "_a"))) {
      if (e.path().extension() != ".csv") continue;
      const fs::path rel = fs::relative(e.path(), root / (cmd + "_a"));
      const std::string a = slurp(e.path());
      ok = ok && a == slurp(root / (cmd + "_b") / rel) && a == slurp(root / (cmd + "_c") / rel);
      ++compared;
    }
  }
  ok = ok && compared == 12;
  fs::remove_all(root);
  return {ok, fmt("%g CSV files identical across two runs with --jobs 1 and one with --jobs 4", compared)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"appendix-lemma suite", lemma_suite, 30},   {"exactness oracles", exactness, 0},
      {"confidence-band coverage", coverage, 120}, {"estimation rates", rates, 300},
      {"end-to-end regret", regret, 600},          {"determinism", determinism, 0},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = criteria[i].run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].budget_seconds > 0 && secs >= criteria[i].budget_seconds) {
      o.passed = false;
      o.detail += fmt("; over the %g s budget", criteria[i].budget_seconds);
    }
    all = all && o.passed;
    std::printf("criterion %zu %s  %s (%.1f s): %s\n", i + 1, o.passed ? "PASS" : "FAIL", criteria[i].name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
