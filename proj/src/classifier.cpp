#include "driftshift/classifier.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace driftshift {

ClassifierState::ClassifierState(std::shared_ptr<const LabeledPool> pool, MetricSpace space, double delta,
                                 int beta_bar)
    : estimator_(std::move(pool), std::move(space), delta), delta_(delta), beta_bar_(beta_bar) {
  if (beta_bar < 1) throw std::domain_error("ClassifierState: beta_bar must be >= 1");
  const auto f = [this](const Point& p) { return static_cast<double>(f_hat(p)); };
  mean_f0_ = second_half_mean(estimator_.pool(), 0, f);
  mean_f1_ = second_half_mean(estimator_.pool(), 1, f);
}

EtaEstimate ClassifierState::eta(const Point& x) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = eta_cache_.find(x); it != eta_cache_.end()) return it->second;
  }
  const EtaEstimate e = estimator_.estimate(x);
  std::lock_guard lock(cache_mutex_);
  eta_cache_.emplace(x, e);
  return e;
}

void ClassifierState::observe(std::span<const Point> covariates) {
  for (const Point& p : covariates) trace_.append(f_hat(p));
}

std::unique_ptr<ClassifierState> build_state(const LabeledPool& pool, std::span<const Point> prefix,
                                             double delta, int beta_bar, const MetricSpace& space) {
  auto state = std::make_unique<ClassifierState>(std::make_shared<const LabeledPool>(pool), space, delta,
                                                 beta_bar);
  state->observe(prefix);
  return state;
}

PriorAtTime estimate_prior_at(const ClassifierState& state, int t, double delta_t) {
  if (t < 1) throw std::domain_error("estimate_prior_at: t must be >= 1");
  if (static_cast<std::size_t>(t) > state.trace().size())
    throw std::domain_error("estimate_prior_at: trace does not cover [0, t)");
  const WindowSelection w = lepski_window(state.trace(), t, delta_t, state.beta_bar());
  const PriorEstimate prior = prior_estimate(w.mu_hat, state.mean_f0(), state.mean_f1());
  return {prior.pi_hat, w.q_hat, prior.degenerate};
}

Prediction classify_at(const ClassifierState& state, int t, const Point& x, double delta_t) {
  const PriorAtTime prior = estimate_prior_at(state, t, delta_t);
  const double eta = state.eta(x).value;
  return {plug_in_label(eta, prior.pi_hat), prior.pi_hat, eta, prior.q_hat};
}

Prediction classify_single(const ClassifierState& state, const Point& x) {
  return classify_at(state, static_cast<int>(state.trace().size()), x, state.delta());
}

RoundBudget round_budget(int t, double delta) {
  if (t < 1) throw std::domain_error("round_budget: t must be >= 1");
  const double tt = t;
  const double raw = 6.0 * delta / (std::numbers::pi * std::numbers::pi * tt * tt);
  const double used = std::min(raw, 0.5);
  return {raw, used, used != raw};
}

std::vector<Prediction> sequential_policy(const LabeledPool& pool, const UnlabeledStream& stream, double delta,
                                          int beta_bar, const MetricSpace& space, int first, int last) {
  if (first < 1 || last < first || static_cast<std::size_t>(last) >= stream.size())
    throw std::domain_error("sequential_policy: interval must lie within [1, stream length - 1]");
  auto state = build_state(pool, stream.prefix(static_cast<std::size_t>(last)), delta, beta_bar, space);
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (int t = first; t <= last; ++t)
    out.push_back(classify_at(*state, t, stream.at(static_cast<std::size_t>(t)), round_budget(t, delta).used));
  return out;
}

}  // namespace driftshift
