#include "driftshift/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "driftshift/classifier.hpp"
#include "driftshift/densratio.hpp"

#ifndef DRIFTSHIFT_VERSION
#define DRIFTSHIFT_VERSION "unknown"
#endif

namespace driftshift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class BayesErrorCache {
 public:
  explicit BayesErrorCache(const sim::ScenarioSpec& spec) : spec_(spec) {}
  double operator()(double pi) {
    auto it = table_.find(pi);
    if (it == table_.end()) it = table_.emplace(pi, sim::bayes_error(spec_, pi)).first;
    return it->second;
  }

 private:
  const sim::ScenarioSpec& spec_;
  std::map<double, double> table_;
};

}  // namespace

RegretTrace regret_trace(const sim::ScenarioSpec& spec, double delta, int beta_bar, int grid_cells) {
  const sim::ScenarioDraw draw = sim::generate(spec);
  const int horizon = spec.horizon;
  const auto state = build_state(draw.pool, draw.stream.prefix(static_cast<std::size_t>(horizon)), delta,
                                 beta_bar, spec.space);
  const sim::EvaluationGrid grid = sim::evaluation_grid(spec, grid_cells);
  std::vector<double> eta_nodes;
  eta_nodes.reserve(grid.nodes.size());
  for (const Point& node : grid.nodes) eta_nodes.push_back(state->estimator().estimate(node).value);

  BayesErrorCache bayes(spec);
  RegretTrace out;
  std::vector<int> labels(grid.nodes.size());
  for (int t = 1; t <= horizon; ++t) {
    const double pi = draw.pis[static_cast<std::size_t>(t)];
    const PriorAtTime prior = estimate_prior_at(*state, t, round_budget(t, delta).used);
    for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = plug_in_label(eta_nodes[k], prior.pi_hat);
    const double err = sim::test_error(grid, pi, labels);
    const double best = bayes(pi);
    out.rows.push_back({t, err, best, err - best});
    out.pi_true.push_back(pi);
    out.pi_hat.push_back(prior.pi_hat);
    out.q_hat.push_back(prior.q_hat);
  }
  return out;
}

double fixed_rule_regret(const sim::ScenarioSpec& spec, int first, int last) {
  if (first < 1 || last < first || last > spec.horizon)
    throw std::domain_error("fixed_rule_regret: interval must lie within [1, T]");
  const std::vector<double> pis = sim::realize_trajectory(spec.trajectory, spec.horizon, spec.seed);
  const sim::DecisionRule rule = [&spec](const Point& x) { return sim::eta_oracle(spec, x).value > 0.5 ? 1 : 0; };
  const bool line = spec.space.kind() == SpaceKind::euclidean_1d;
  const sim::PiecewiseRule piecewise = line ? sim::locate_switches(spec, rule) : sim::PiecewiseRule{};
  BayesErrorCache bayes(spec);
  std::vector<sim::RegretRow> rows;
  for (int t = first; t <= last; ++t) {
    const double pi = pis[static_cast<std::size_t>(t)];
    const double err = line ? sim::test_error(spec, pi, piecewise) : sim::test_error(spec, pi, rule);
    const double best = bayes(pi);
    rows.push_back({t, err, best, err - best});
  }
  return sim::dynamic_regret(rows, first, last);
}

std::vector<PiRow> prior_trace(const sim::ScenarioSpec& spec, double delta, int beta_bar) {
  const sim::ScenarioDraw draw = sim::generate(spec);
  const auto state = build_state(draw.pool, draw.stream.prefix(static_cast<std::size_t>(spec.horizon)), delta,
                                 beta_bar, spec.space);
  std::vector<PiRow> out;
  for (int t = 1; t <= spec.horizon; ++t) {
    const PriorAtTime prior = estimate_prior_at(*state, t, round_budget(t, delta).used);
    out.push_back({t, draw.pis[static_cast<std::size_t>(t)], prior.pi_hat, prior.q_hat});
  }
  return out;
}

std::vector<EtaRow> eta_trace(const sim::ScenarioSpec& spec, double delta, const std::vector<Point>& grid) {
  const sim::ScenarioDraw draw = sim::generate(spec);
  const DensityRatioEstimator estimator(std::make_shared<const LabeledPool>(draw.pool), spec.space, delta);
  std::vector<EtaRow> out;
  for (const Point& x : grid) {
    const EtaEstimate e = estimator.estimate(x);
    const double coord = x.is_symbol() ? x.symbol_index() : x.x();
    out.push_back({coord, sim::eta_oracle(spec, x).value, e.value, e.chosen_radius});
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw std::invalid_argument("grid must look like lo:hi:count");
  std::size_t used = 0;
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
  try {
    const std::string a = spec.substr(0, c1);
    const std::string b = spec.substr(c1 + 1, c2 - c1 - 1);
    const std::string c = spec.substr(c2 + 1);
    lo = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument("");
    hi = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument("");
    count = std::stol(c, &used);
    if (used != c.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must look like lo:hi:count");
  }
  if (count < 1 || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("grid needs lo <= hi and count >= 1");
  std::vector<double> out;
  for (long i = 0; i < count; ++i)
    out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct Cell {
  int n;
  int horizon;
  std::uint64_t seed;
  std::string dir;  // relative to the output root
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& content) {
  ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw OutputError("cannot write " + path.string());
}

std::string cell_dir(int n, int horizon, std::uint64_t seed) {
  return "n" + std::to_string(n) + "_T" + std::to_string(horizon) + "/seed" + std::to_string(seed);
}

sim::ScenarioSpec cell_scenario(const ExperimentConfig& c, int n, int horizon, std::uint64_t seed) {
  sim::ScenarioSpec s = c.scenario;
  s.n0 = n;
  s.n1 = n;
  s.horizon = horizon;
  s.seed = seed;
  return s;
}

struct Prepared {
  ExperimentConfig config;
  fs::path root;
  std::vector<Cell> cells;
};

// Loads the config and applies command-line overrides. Throws ConfigError.
Prepared prepare(const std::string& config_path, const RunOptions& options) {
  Prepared p;
  p.config = load_config(config_path);
  if (options.out_dir) p.config.out_dir = *options.out_dir;
  if (options.seeds) p.config.seeds = *options.seeds;
  p.config.emit_plots = p.config.emit_plots || options.emit_plots;
  p.config.validate();
  p.root = p.config.out_dir;
  for (int n : p.config.n_values)
    for (int horizon : p.config.horizons)
      for (std::uint64_t seed : p.config.seeds) p.cells.push_back({n, horizon, seed, cell_dir(n, horizon, seed)});
  return p;
}

json theory_overlay(const sim::ScenarioSpec& spec, double delta, int first, int last) {
  const double tv = sim::tv_oracle(spec);
  if (!(tv > 0.0)) return nullptr;
  sim::TheoryParams p;
  p.n_min = std::min(spec.n0, spec.n1);
  p.window = last - first + 1;
  p.interval_length = last - first + 1;
  p.t_max = spec.horizon;
  p.tv = tv;
  p.delta = delta;
  if (auto* h = std::get_if<sim::HolderSinePath>(&spec.trajectory)) {
    p.beta = h->beta;
    p.holder_c = h->holder_constant();
  }
  if (auto* j = std::get_if<sim::PiecewiseJumpsPath>(&spec.trajectory)) p.jumps = j->segments();
  if (auto* w = std::get_if<sim::TvWalkPath>(&spec.trajectory)) {
    const auto pis = sim::realize_trajectory(spec.trajectory, spec.horizon, spec.seed);
    p.beta_v = w->beta_v;
    p.path_variation = sim::tv_label_path(pis, w->beta_v, first, last);
  }
  const sim::TheoryOverlay o = sim::theory_bounds(p);
  return {{"lambda_labelled", o.lambda_labelled},
          {"lambda_unlabelled", o.lambda_unlabelled},
          {"psi", o.psi},
          {"unlabelled_jumps", o.unlabelled_jumps},
          {"unlabelled_tv", o.unlabelled_tv},
          {"single_time_rhs", o.single_time_rhs},
          {"jumps_regret_rhs", o.jumps_regret_rhs},
          {"tv_regret_rhs", o.tv_regret_rhs},
          {"note", o.note}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string plot_script(const std::vector<Cell>& cells, const std::string& csv, const std::string& ycol,
                        const std::string& ylabel) {
  std::ostringstream s;
  s << "# gnuplot script; run from the output directory: gnuplot plot.gp\n"
    << "set datafile separator ','\n"
    << "set terminal pngcairo size 1000,600\n"
    << "set output 'plot.png'\n"
    << "set xlabel 't'\n"
    << "set ylabel '" << ylabel << "'\n"
    << "set key outside right\n"
    << "plot \\\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    s << "  '" << cells[i].dir << "/" << csv << "' using 1:" << ycol << " skip 1 with lines title '" << cells[i].dir
      << "'" << (i + 1 < cells.size() ? ", \\\n" : "\n");
  }
  return s.str();
}

void write_manifest(const Prepared& p, const std::string& command, const std::vector<std::string>& files,
                    double seconds) {
  json runs = json::array();
  for (const Cell& c : p.cells) runs.push_back({{"n", c.n}, {"T", c.horizon}, {"seed", c.seed}, {"dir", c.dir}});
  const json m{{"command", command},
               {"code_version", DRIFTSHIFT_VERSION},
               {"config_hash", config_hash(p.config)},
               {"preset", p.config.preset},
               {"runs", runs},
               {"outputs", files},
               {"wall_clock_seconds", seconds}};
  write_file(p.root / "manifest.json", m.dump(2) + "\n");
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error";
    if (e.line() > 0) err << " (line " << e.line() << ")";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitUnwritable;
  } catch (const std::domain_error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int cmd_run(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const Prepared p = prepare(config_path, options);
    ensure_dir(p.root);
    const ExperimentConfig& c = p.config;

    // regret[cell][interval], baseline[cell][interval]
    std::vector<std::vector<double>> regret(p.cells.size());
    std::vector<std::vector<double>> baseline(p.cells.size());
    parallel_for(p.cells.size(), options.jobs, [&](std::size_t i) {
      const Cell& cell = p.cells[i];
      const sim::ScenarioSpec spec = cell_scenario(c, cell.n, cell.horizon, cell.seed);
      const RegretTrace trace = regret_trace(spec, c.delta, c.beta_bar, c.grid_cells);
      std::string csv = "t,test_error,bayes_error,excess,pi_true,pi_hat,q_hat\n";
      for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const sim::RegretRow& r = trace.rows[k];
        csv += std::to_string(r.t) + "," + format_real(r.test_error) + "," + format_real(r.bayes_error) + "," +
               format_real(r.excess) + "," + format_real(trace.pi_true[k]) + "," + format_real(trace.pi_hat[k]) +
               "," + std::to_string(trace.q_hat[k]) + "\n";
      }
      write_file(p.root / cell.dir / "regret.csv", csv);
      for (const auto& fraction : c.intervals) {
        const auto [first, last] = interval_rounds(fraction, cell.horizon);
        regret[i].push_back(sim::dynamic_regret(trace.rows, first, last));
        baseline[i].push_back(fixed_rule_regret(spec, first, last));
      }
    });

    // Single-threaded reduce in a fixed order.
    std::vector<std::string> files;
    for (const Cell& cell : p.cells) files.push_back(cell.dir + "/regret.csv");
    json entries = json::array();
    for (int n : c.n_values) {
      for (int horizon : c.horizons) {
        json intervals = json::array();
        for (std::size_t f = 0; f < c.intervals.size(); ++f) {
          const auto [first, last] = interval_rounds(c.intervals[f], horizon);
          json per_seed = json::array();
          std::vector<double> values;
          std::vector<double> base;
          for (std::size_t i = 0; i < p.cells.size(); ++i) {
            if (p.cells[i].n != n || p.cells[i].horizon != horizon) continue;
            per_seed.push_back({{"seed", p.cells[i].seed}, {"regret", regret[i][f]}, {"fixed_rule", baseline[i][f]}});
            values.push_back(regret[i][f]);
            base.push_back(baseline[i][f]);
          }
          double sum = 0.0;
          for (double v : values) sum += v;
          const sim::ScenarioSpec spec = cell_scenario(c, n, horizon, c.seeds.front());
          intervals.push_back({{"fraction", {c.intervals[f].first, c.intervals[f].second}},
                               {"first", first},
                               {"last", last},
                               {"per_seed", per_seed},
                               {"mean_regret", sum / static_cast<double>(values.size())},
                               {"median_regret", median(values)},
                               {"median_fixed_rule_regret", median(base)},
                               {"overlay", theory_overlay(spec, c.delta, first, last)}});
        }
        entries.push_back({{"n", n}, {"T", horizon}, {"intervals", intervals}});
      }
    }
    const json summary{{"config_hash", config_hash(c)}, {"cells", entries}};
    write_file(p.root / "summary.json", summary.dump(2) + "\n");
    files.push_back("summary.json");
    if (c.emit_plots) {
      write_file(p.root / "plot.gp", plot_script(p.cells, "regret.csv", "4", "excess test error"));
      files.push_back("plot.gp");
    }
    files.push_back("manifest.json");
    write_manifest(p, "run", files, elapsed_since(start));
    out << "wrote " << p.cells.size() << " regret.csv files under " << p.root.string() << "\n";
    return kExitOk;
  });
}

int cmd_estimate_pi(const std::string& config_path, const RunOptions& options, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    const Prepared p = prepare(config_path, options);
    ensure_dir(p.root);
    const ExperimentConfig& c = p.config;
    parallel_for(p.cells.size(), options.jobs, [&](std::size_t i) {
      const Cell& cell = p.cells[i];
      const auto rows = prior_trace(cell_scenario(c, cell.n, cell.horizon, cell.seed), c.delta, c.beta_bar);
      std::string csv = "t,pi_true,pi_hat,q_hat,abs_err\n";
      for (const PiRow& r : rows)
        csv += std::to_string(r.t) + "," + format_real(r.pi_true) + "," + format_real(r.pi_hat) + "," +
               std::to_string(r.q_hat) + "," + format_real(std::abs(r.pi_hat - r.pi_true)) + "\n";
      write_file(p.root / cell.dir / "pi.csv", csv);
    });
    std::vector<std::string> files;
    for (const Cell& cell : p.cells) files.push_back(cell.dir + "/pi.csv");
    if (c.emit_plots) {
      write_file(p.root / "plot.gp", plot_script(p.cells, "pi.csv", "5", "|pi_hat - pi|"));
      files.push_back("plot.gp");
    }
    files.push_back("manifest.json");
    write_manifest(p, "estimate-pi", files, elapsed_since(start));
    out << "wrote " << p.cells.size() << " pi.csv files under " << p.root.string() << "\n";
    return kExitOk;
  });
}

int cmd_estimate_eta(const std::string& config_path, const RunOptions& options, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    Prepared p = prepare(config_path, options);
    const ExperimentConfig& c = p.config;
    std::vector<Point> grid;
    if (c.scenario.space.kind() == SpaceKind::discrete) {
      for (int s = 0; s < c.scenario.space.alphabet_size(); ++s) grid.push_back(Point::symbol(s));
    } else {
      std::vector<double> xs;
      try {
        xs = parse_grid(options.grid);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("--grid", 0, e.what());
      }
      for (double x : xs) grid.push_back(Point::real(x));
    }
    // The stream plays no part here, so one cell per (n, seed).
    std::vector<Cell> cells;
    for (int n : c.n_values)
      for (std::uint64_t seed : c.seeds)
        cells.push_back({n, c.horizons.front(), seed, "n" + std::to_string(n) + "/seed" + std::to_string(seed)});
    p.cells = cells;
    ensure_dir(p.root);
    parallel_for(cells.size(), options.jobs, [&](std::size_t i) {
      const Cell& cell = cells[i];
      const auto rows = eta_trace(cell_scenario(c, cell.n, cell.horizon, cell.seed), c.delta, grid);
      std::string csv = "x,eta_true,eta_hat,chosen_radius\n";
      for (const EtaRow& r : rows)
        csv += format_real(r.x) + "," + format_real(r.eta_true) + "," + format_real(r.eta_hat) + "," +
               format_real(r.chosen_radius) + "\n";
      write_file(p.root / cell.dir / "eta.csv", csv);
    });
    std::vector<std::string> files;
    for (const Cell& cell : cells) files.push_back(cell.dir + "/eta.csv");
    if (c.emit_plots) {
      std::string script = plot_script(cells, "eta.csv", "3", "eta_hat");
      script.replace(script.find("set xlabel 't'"), 14, "set xlabel 'x'");
      write_file(p.root / "plot.gp", script);
      files.push_back("plot.gp");
    }
    files.push_back("manifest.json");
    write_manifest(p, "estimate-eta", files, elapsed_since(start));
    out << "wrote " << cells.size() << " eta.csv files under " << p.root.string() << "\n";
    return kExitOk;
  });
}

}  // namespace driftshift
