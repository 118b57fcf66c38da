#ifndef DRIFTSHIFT_CONFIG_HPP
#define DRIFTSHIFT_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftshift/sim.hpp"

namespace driftshift {

inline constexpr int kSchemaVersion = 1;

/// Malformed configuration. field is a JSON pointer ("/estimator/delta");
/// line is 1-based, or 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string preset;  // empty when the scenario is fully custom
  sim::ScenarioSpec scenario;

  double delta = 0.05;
  int beta_bar = 1;

  std::vector<int> n_values{1000};  // n0 = n1 = n
  std::vector<int> horizons{2000};
  std::vector<std::uint64_t> seeds{1};

  /// Regret intervals as fractions of the horizon.
  std::vector<std::pair<double, double>> intervals{{0.5, 1.0}};
  int grid_cells = 4096;

  std::string out_dir = "out";
  bool emit_plots = false;

  void validate() const;
};

/// [first, last] rounds of a fractional interval at horizon T.
std::pair<int, int> interval_rounds(const std::pair<double, double>& fraction, int horizon);

/// Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Sorted-key JSON of everything that determines the results; equal for
/// semantically equal inputs. The preset name is not part of it, only what it
/// resolved to, and neither are the output settings.
std::string canonical_json(const ExperimentConfig& config);

/// 64-bit FNV-1a of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace driftshift

#endif  // DRIFTSHIFT_CONFIG_HPP
