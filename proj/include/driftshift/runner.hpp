#ifndef DRIFTSHIFT_RUNNER_HPP
#define DRIFTSHIFT_RUNNER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftshift/config.hpp"
#include "driftshift/sim.hpp"

namespace driftshift {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitUnwritable = 3;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-round record of one replication of the sequential policy.
struct RegretTrace {
  std::vector<sim::RegretRow> rows;  // t = 1..T
  std::vector<double> pi_true;
  std::vector<double> pi_hat;
  std::vector<int> q_hat;
};

/// Runs the policy on a freshly generated scenario. The rule at round t is
/// evaluated on the cells of evaluation_grid(spec, grid_cells); the Bayes
/// error is exact.
RegretTrace regret_trace(const sim::ScenarioSpec& spec, double delta, int beta_bar, int grid_cells = 4096);

/// Regret of the fixed rule 1{eta(x) > 1/2}, the Bayes rule for a balanced
/// prior, on the spec's trajectory over rounds [first, last].
double fixed_rule_regret(const sim::ScenarioSpec& spec, int first, int last);

struct PiRow {
  int t;
  double pi_true;
  double pi_hat;
  int q_hat;
};

/// pi_hat for t = 1..T with the per-round budget.
std::vector<PiRow> prior_trace(const sim::ScenarioSpec& spec, double delta, int beta_bar);

struct EtaRow {
  double x;
  double eta_true;
  double eta_hat;
  double chosen_radius;
};

std::vector<EtaRow> eta_trace(const sim::ScenarioSpec& spec, double delta, const std::vector<Point>& grid);

/// "lo:hi:count", count >= 1 evenly spaced points (lo alone when count is 1).
std::vector<double> parse_grid(const std::string& spec);

/// 17-significant-digit rendering used in every CSV (round-trips doubles).
std::string format_real(double v);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
  int jobs = 1;
  bool emit_plots = false;
  std::string grid = "-3:3:61";
};

/// Runs task(0..count-1) on `jobs` threads. The first exception is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Each command returns a process exit code and reports problems on err.
int cmd_run(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_estimate_pi(const std::string& config_path, const RunOptions& options, std::ostream& out,
                    std::ostream& err);
int cmd_estimate_eta(const std::string& config_path, const RunOptions& options, std::ostream& out,
                     std::ostream& err);

}  // namespace driftshift

#endif  // DRIFTSHIFT_RUNNER_HPP
