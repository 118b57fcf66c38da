#ifndef DRIFTSHIFT_SIM_HPP
#define DRIFTSHIFT_SIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftshift/core.hpp"

namespace driftshift::sim {

// ------------------------------------------------------------------------
// Class-conditional distributions
// ------------------------------------------------------------------------

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sds;

  void validate() const;
  double pdf(double x) const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  /// [min(mean - 10 sd), max(mean + 10 sd)]
  std::pair<double, double> support() const;
};

struct DiscretePmf {
  std::vector<double> probs;

  void validate() const;
  int sample(Rng& rng) const;
};

using ClassConditional = std::variant<GaussianMixture, DiscretePmf>;

// ------------------------------------------------------------------------
// Label-probability trajectories
// ------------------------------------------------------------------------

struct ConstantPath {
  double pi = 0.5;
};

/// pi(u) = center + amplitude sin(2 pi cycles u + phase), u = l / T, with the
/// Hoelder constant for exponent beta in [0, 2] derived from the shape.
struct HolderSinePath {
  double beta = 1.0;
  double amplitude = 0.3;
  double cycles = 1.0;
  double center = 0.5;
  double phase = 0.0;

  double holder_constant() const;
  double value(double u) const;
};

/// Piecewise constant: levels[j] on the j-th segment; boundaries are
/// strictly increasing fractions of the horizon in (0, 1).
struct PiecewiseJumpsPath {
  std::vector<double> levels;
  std::vector<double> boundaries;

  int segments() const { return static_cast<int>(levels.size()); }
};

/// Lazy +-s walk on [0.1, 0.9] starting at 0.5, with s chosen so that the
/// realised variation (sum |d|^(1/beta_v))^beta_v equals total_variation.
struct TvWalkPath {
  double total_variation = 1.0;
  double beta_v = 1.0;
  std::uint64_t path_id = 0;
  double move_prob = 0.05;
};

using TrajectorySpec = std::variant<ConstantPath, HolderSinePath, PiecewiseJumpsPath, TvWalkPath>;

std::string trajectory_kind(const TrajectorySpec& spec);

/// pi_0 .. pi_T. Throws std::domain_error for an invalid specification.
std::vector<double> realize_trajectory(const TrajectorySpec& spec, int horizon, std::uint64_t seed);

/// Smallest C consistent with the Hoelder condition of exponent beta on a
/// uniform grid of [0, 1] (finite differences for beta > 1).
double holder_certificate(const std::function<double(double)>& g, double beta, int grid = 401);

/// Number of maximal constant runs in a realised path.
int count_segments(std::span<const double> pis);

// ------------------------------------------------------------------------
// Scenarios
// ------------------------------------------------------------------------

struct ScenarioSpec {
  MetricSpace space = MetricSpace::euclidean_1d();
  ClassConditional class0 = GaussianMixture{{1.0}, {-1.0}, {1.0}};
  ClassConditional class1 = GaussianMixture{{1.0}, {1.0}, {1.0}};
  TrajectorySpec trajectory = ConstantPath{0.3};
  int n0 = 1000;
  int n1 = 1000;
  int horizon = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// stationary | slow-sine | J-jumps | tv-walk
ScenarioSpec preset(std::string_view name);
std::vector<std::string> preset_names();

struct ScenarioDraw {
  LabeledPool pool;
  UnlabeledStream stream;    // X_0 .. X_T
  std::vector<int> labels;   // simulator side only
  std::vector<double> pis;   // pi_0 .. pi_T
};

ScenarioDraw generate(const ScenarioSpec& spec);

// ------------------------------------------------------------------------
// Oracles
// ------------------------------------------------------------------------

struct EtaOracle {
  double value;
  bool null_point;  // both densities vanish; value is 1/2
};

EtaOracle eta_oracle(const ScenarioSpec& spec, const Point& x);

/// sup_A |P_1(A) - P_0(A)|
double tv_oracle(const ScenarioSpec& spec);

using DecisionRule = std::function<int(const Point&)>;

/// Piecewise-constant rule on the line: labels[k] on (breaks[k-1], breaks[k]],
/// with breaks[-1] = -inf and breaks[size] = +inf.
struct PiecewiseRule {
  std::vector<double> breaks;
  std::vector<int> labels;
};

/// Switch points of a black-box rule, located on a grid of the support and
/// refined by bisection.
PiecewiseRule locate_switches(const ScenarioSpec& spec, const DecisionRule& rule, int grid = 4096);

/// pi P_1(rule = 0) + (1 - pi) P_0(rule = 1)
double test_error(const ScenarioSpec& spec, double pi, const DecisionRule& rule);
double test_error(const ScenarioSpec& spec, double pi, const PiecewiseRule& rule);

DecisionRule bayes_rule(const ScenarioSpec& spec, double pi);
double bayes_error(const ScenarioSpec& spec, double pi);

/// A finite partition of the space with class masses per cell. On the line
/// the cells are the Voronoi cells of evenly spaced nodes; on a discrete
/// space they are the symbols. A rule that is constant on cells has its
/// test error computed exactly from these masses.
struct EvaluationGrid {
  std::vector<Point> nodes;
  std::vector<double> mass0;
  std::vector<double> mass1;
};

EvaluationGrid evaluation_grid(const ScenarioSpec& spec, int cells = 4096);

double test_error(const EvaluationGrid& grid, double pi, std::span<const int> labels);

// ------------------------------------------------------------------------
// Regret
// ------------------------------------------------------------------------

struct RegretRow {
  int t;
  double test_error;
  double bayes_error;
  double excess;
};

/// Mean excess over rows whose t lies in [first, last].
/// Throws std::domain_error if some t in the interval has no row.
double dynamic_regret(std::span<const RegretRow> rows, int first, int last);

/// (sum_{l=first}^{last-1} |pi_l - pi_{l+1}|^(1/beta_v))^beta_v
double tv_label_path(std::span<const double> pis, double beta_v, int first, int last);

// ------------------------------------------------------------------------
// Theoretical overlays (all unspecified constants set to 1)
// ------------------------------------------------------------------------

/// {r^(q-1) (1 + int_1^r z^-q dz)}^(1/q) in closed form; log r at q = 1.
double power_transform(double r, double q);

struct TheoryParams {
  double n_min = 1000;
  double window = 1000;          // m: informative unlabelled window
  double interval_length = 1000; // |T|
  double jumps = 1;              // J
  double t_max = 2000;
  double beta = 1.0;             // temporal Hoelder exponent
  double holder_c = 0.0;
  double gamma = 1.0;            // spatial smoothness exponent
  double c_gamma = 0.0;
  double alpha = 1.0;            // margin exponent
  double c_alpha = 1.0;
  double tv = 1.0;               // TV(P_0, P_1)
  double delta = 0.05;
  double path_variation = 0.0;   // V_{1/beta_v}
  double beta_v = 1.0;
};

struct TheoryOverlay {
  double lambda_labelled;
  double lambda_unlabelled;
  double psi;
  double unlabelled_jumps;
  double unlabelled_tv;
  double single_time_rhs;
  double jumps_regret_rhs;
  double tv_regret_rhs;
  std::string note = "shape-only reference; up to unspecified constants";
};

/// Throws std::domain_error when tv <= 0.
TheoryOverlay theory_bounds(const TheoryParams& params);

}  // namespace driftshift::sim

#endif  // DRIFTSHIFT_SIM_HPP
