#ifndef DRIFTSHIFT_CLASSIFIER_HPP
#define DRIFTSHIFT_CLASSIFIER_HPP

#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "driftshift/core.hpp"
#include "driftshift/densratio.hpp"
#include "driftshift/labelprob.hpp"

namespace driftshift {

/// Everything the plug-in classifier fixes before the first round:
/// eta_hat from the first halves, f_hat = 1{2 eta_hat >= 1}, the
/// second-half means of f_hat, and f_hat over the observed stream.
class ClassifierState {
 public:
  ClassifierState(std::shared_ptr<const LabeledPool> pool, MetricSpace space, double delta, int beta_bar);

  /// Memoised eta_hat; the cache never changes results.
  EtaEstimate eta(const Point& x) const;
  int f_hat(const Point& x) const { return indicator_from_eta(eta(x).value); }

  /// Appends f_hat(X_l) for each covariate to the trace.
  void observe(std::span<const Point> covariates);

  const FunctionalTrace& trace() const { return trace_; }
  double mean_f0() const { return mean_f0_; }
  double mean_f1() const { return mean_f1_; }
  double delta() const { return delta_; }
  int beta_bar() const { return beta_bar_; }
  const DensityRatioEstimator& estimator() const { return estimator_; }

 private:
  DensityRatioEstimator estimator_;
  double delta_;
  int beta_bar_;
  FunctionalTrace trace_;
  double mean_f0_ = 0.0;
  double mean_f1_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<Point, EtaEstimate, PointHash> eta_cache_;
};

/// Builds the state and feeds it the stream prefix.
std::unique_ptr<ClassifierState> build_state(const LabeledPool& pool, std::span<const Point> prefix,
                                             double delta, int beta_bar, const MetricSpace& space);

struct PriorAtTime {
  double pi_hat;
  int q_hat;
  bool degenerate;
};

/// pi_hat at round t from trace[0, t) with confidence deltaT.
PriorAtTime estimate_prior_at(const ClassifierState& state, int t, double delta_t);

struct Prediction {
  int label;
  double pi_hat;
  double eta_at_x;
  int q_hat;
};

/// 1{eta_hat(x) + pi_hat > 1}; a tie goes to 0.
inline int plug_in_label(double eta, double pi_hat) { return eta + pi_hat > 1.0 ? 1 : 0; }

/// Throws std::domain_error if t < 1 or the trace does not cover [0, t).
Prediction classify_at(const ClassifierState& state, int t, const Point& x, double delta_t);

/// Single-time classifier: t is the trace length and the budget is delta.
Prediction classify_single(const ClassifierState& state, const Point& x);

struct RoundBudget {
  double raw;      // 6 delta / (pi^2 t^2), summing to delta over t >= 1
  double used;     // min(raw, 0.5)
  bool clamped;
};

RoundBudget round_budget(int t, double delta);

/// Predictions for t = first..last, each using delta_t and only X_0..X_t.
std::vector<Prediction> sequential_policy(const LabeledPool& pool, const UnlabeledStream& stream, double delta,
                                          int beta_bar, const MetricSpace& space, int first, int last);

}  // namespace driftshift

#endif  // DRIFTSHIFT_CLASSIFIER_HPP
