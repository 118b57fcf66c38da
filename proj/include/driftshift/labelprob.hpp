#ifndef DRIFTSHIFT_LABELPROB_HPP
#define DRIFTSHIFT_LABELPROB_HPP

#include <functional>
#include <span>
#include <vector>

#include "driftshift/core.hpp"
#include "driftshift/legendre.hpp"

namespace driftshift {

/// f(X_0), f(X_1), ... for a fixed functional f with values in [0, 1].
class FunctionalTrace {
 public:
  FunctionalTrace() = default;
  // Throws std::domain_error if any value lies outside [0, 1].
  explicit FunctionalTrace(std::vector<double> values);

  void append(double value);
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t l) const { return values_[l]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// 8 beta_bar^2 (beta_bar + 1)^2
int q_min(int beta_bar);

/// sum_{i=1}^{q} v_i^(q) trace[t - i]. Never reads trace[t].
/// Throws std::domain_error when q > t, q < 1 or the trace is too short.
double marginal_estimate(const FunctionalTrace& trace, int t, int q, int beta_bar,
                         WeightCache& cache = WeightCache::shared());

struct WindowOptions {
  /// Restrict candidate windows to q_min 2^k and t. Off by default; the
  /// exact rule scans every integer window.
  bool geometric_grid = false;
};

struct WindowSelection {
  int q_hat = 0;
  double mu_hat = 0.0;
  /// Candidate windows in ascending order with their estimates and
  /// variance terms.
  std::vector<int> windows;
  std::vector<double> estimates;
  std::vector<double> var_terms;
};

/// Lepski window: the largest q in [q_min, t] whose estimate lies within
/// 2 (R_q + R_qb) of the estimate at every smaller candidate qb. For
/// t < q_min the window is t itself.
WindowSelection lepski_window(const FunctionalTrace& trace, int t, double delta, int beta_bar,
                              WindowOptions options = {}, WeightCache& cache = WeightCache::shared());

/// Mean of f over the second half of class y.
double second_half_mean(const LabeledPool& pool, int y, const std::function<double(const Point&)>& f);

struct PriorEstimate {
  double pi_hat = 0.5;
  double mu_hat = 0.0;
  double mean_f0 = 0.0;
  double mean_f1 = 0.0;
  bool degenerate = false;
};

/// clamp((mu - m0) / (m1 - m0), 0, 1), or 1/2 flagged degenerate when m0 == m1.
PriorEstimate prior_estimate(double mu_hat, double mean_f0, double mean_f1);

}  // namespace driftshift

#endif  // DRIFTSHIFT_LABELPROB_HPP
