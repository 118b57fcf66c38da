#include "driftshift/labelprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace driftshift {

FunctionalTrace::FunctionalTrace(std::vector<double> values) {
  values_.reserve(values.size());
  for (double v : values) append(v);
}

void FunctionalTrace::append(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::domain_error("FunctionalTrace: value outside [0,1]");
  values_.push_back(value);
}

int q_min(int beta_bar) {
  if (beta_bar < 1) throw std::domain_error("q_min: beta_bar must be >= 1");
  return 8 * beta_bar * beta_bar * (beta_bar + 1) * (beta_bar + 1);
}

double marginal_estimate(const FunctionalTrace& trace, int t, int q, int beta_bar, WeightCache& cache) {
  if (q < 1 || q > t) throw std::domain_error("marginal_estimate: require 1 <= q <= t");
  if (static_cast<std::size_t>(t) > trace.size())
    throw std::domain_error("marginal_estimate: insufficient history");
  const ExtrapolationWeights& w = cache.get(q, beta_bar);
  double sum = 0.0;
  for (int i = 1; i <= q; ++i) sum += w.v(i - 1) * trace[static_cast<std::size_t>(t - i)];
  return sum;
}

namespace {

// Estimates for every window in [lo, t] from running moment sums
// M_m(q) = sum_{i<=q} i^m trace[t - i], so each window costs O(p).
void all_window_estimates(const FunctionalTrace& trace, int t, int lo, int beta_bar, WeightCache& cache,
                          WindowSelection& sel) {
  std::vector<double> moments(static_cast<std::size_t>(beta_bar), 0.0);
  for (int i = 1; i <= t; ++i) {
    const double f = trace[static_cast<std::size_t>(t - i)];
    double power = 1.0;
    for (double& m : moments) {
      m += power * f;
      power *= i;
    }
    if (i < lo) continue;
    const ExtrapolationWeights& w = cache.get(i, beta_bar);
    double est = 0.0;
    double scale = 1.0;
    for (int m = 0; m <= w.p; ++m) {
      est += w.monomial(m) * moments[static_cast<std::size_t>(m)] * scale;
      scale /= i;
    }
    sel.windows.push_back(i);
    sel.estimates.push_back(est);
  }
}

}  // namespace

WindowSelection lepski_window(const FunctionalTrace& trace, int t, double delta, int beta_bar,
                              WindowOptions options, WeightCache& cache) {
  if (t < 1) throw std::domain_error("lepski_window: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("lepski_window: delta must lie in (0,1)");
  if (static_cast<std::size_t>(t) > trace.size()) throw std::domain_error("lepski_window: insufficient history");
  const int lo = q_min(beta_bar);

  WindowSelection sel;
  if (t < lo) {
    sel.windows = {t};
    sel.estimates = {marginal_estimate(trace, t, t, beta_bar, cache)};
  } else if (options.geometric_grid) {
    for (long q = lo; q < t; q *= 2) sel.windows.push_back(static_cast<int>(q));
    sel.windows.push_back(t);
    for (int q : sel.windows) sel.estimates.push_back(marginal_estimate(trace, t, q, beta_bar, cache));
  } else {
    all_window_estimates(trace, t, lo, beta_bar, cache, sel);
  }
  for (int q : sel.windows) sel.var_terms.push_back(variance_term(cache.get(q, beta_bar), delta));

  // Scan downward; the first window compatible with every smaller one wins.
  // The smallest window passes vacuously. Running envelopes of the smaller
  // windows reject most candidates in O(1); survivors get the full check.
  const auto& mu = sel.estimates;
  const auto& r = sel.var_terms;
  const std::size_t count = sel.windows.size();
  std::vector<double> upper(count);  // min_{b<k} mu_b + 2 r_b
  std::vector<double> lower(count);  // max_{b<k} mu_b - 2 r_b
  double up = std::numeric_limits<double>::infinity();
  double down = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    upper[k] = up;
    lower[k] = down;
    up = std::min(up, mu[k] + 2.0 * r[k]);
    down = std::max(down, mu[k] - 2.0 * r[k]);
  }
  constexpr double slack = 1e-9;
  std::size_t chosen = 0;
  for (std::size_t k = count; k-- > 0;) {
    if (mu[k] - 2.0 * r[k] > upper[k] + slack || mu[k] + 2.0 * r[k] < lower[k] - slack) continue;
    bool ok = true;
    for (std::size_t b = 0; b < k && ok; ++b) ok = std::abs(mu[k] - mu[b]) <= 2.0 * (r[k] + r[b]);
    if (ok) {
      chosen = k;
      break;
    }
  }
  sel.q_hat = sel.windows[chosen];
  sel.mu_hat = mu[chosen];
  return sel;
}

double second_half_mean(const LabeledPool& pool, int y, const std::function<double(const Point&)>& f) {
  double sum = 0.0;
  const auto half = pool.second_half(y);
  for (const Point& p : half) sum += f(p);
  return sum / static_cast<double>(half.size());
}

PriorEstimate prior_estimate(double mu_hat, double mean_f0, double mean_f1) {
  PriorEstimate out;
  out.mu_hat = mu_hat;
  out.mean_f0 = mean_f0;
  out.mean_f1 = mean_f1;
  if (mean_f0 == mean_f1) {
    out.pi_hat = 0.5;
    out.degenerate = true;
    return out;
  }
  out.pi_hat = std::clamp((mu_hat - mean_f0) / (mean_f1 - mean_f0), 0.0, 1.0);
  return out;
}

}  // namespace driftshift
