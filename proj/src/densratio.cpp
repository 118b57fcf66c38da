#include "driftshift/densratio.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace driftshift {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("density ratio: delta must lie in (0,1)");
}

// Groups an ascending (distance, label) sequence into cumulative levels.
template <typename Next>
RadiusProfile build_levels(std::size_t total, int n0, int n1, Next next) {
  RadiusProfile out;
  out.radii.reserve(total);
  int c[2] = {0, 0};
  for (std::size_t k = 0; k < total; ++k) {
    const auto [d, y] = next();
    if (!out.radii.empty() && d != out.radii.back())
      out.levels.push_back({out.radii.back(), BallCounts{c[0], c[1], n0, n1}});
    out.radii.push_back(d);
    ++c[y];
  }
  out.levels.push_back({out.radii.back(), BallCounts{c[0], c[1], n0, n1}});
  return out;
}

}  // namespace

RadiusProfile radius_profile(const Point& x, const LabeledPool& pool, const MetricSpace& space) {
  std::vector<std::pair<double, int>> tagged;
  tagged.reserve(static_cast<std::size_t>(pool.n(0) + pool.n(1)));
  for (int y = 0; y < 2; ++y)
    for (const Point& p : pool.first_half(y)) tagged.emplace_back(space.distance(x, p), y);
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t k = 0;
  return build_levels(tagged.size(), pool.n(0), pool.n(1), [&] { return tagged[k++]; });
}

LepskiRadius lepski_radius(const RadiusProfile& profile, double delta) {
  if (profile.levels.empty()) throw std::domain_error("lepski_radius: empty profile");
  const BallCounts& first = profile.levels.front().counts;
  const ClassRates rates = ClassRates::make(first.n0, first.n1, delta);
  Interval running = Interval::universal();
  LepskiRadius out{profile.levels.front().radius, 0, 0};
  for (std::size_t k = 0; k < profile.levels.size(); ++k) {
    running = intersect(running, eta_bounds(profile.levels[k].counts, rates).interval);
    ++out.intervals_inspected;
    if (running.is_empty()) break;
    out.radius = profile.levels[k].radius;
    out.level = k;
  }
  return out;
}

namespace {

EtaEstimate estimate_from_profile(const RadiusProfile& profile, double delta) {
  const LepskiRadius r = lepski_radius(profile, delta);
  const EtaBounds b = eta_bounds(profile.levels[r.level].counts, delta);
  return {b.mid, r.radius, r.intervals_inspected};
}

}  // namespace

EtaEstimate eta_hat(const Point& x, const LabeledPool& pool, const MetricSpace& space, double delta) {
  check_delta(delta);
  return estimate_from_profile(radius_profile(x, pool, space), delta);
}

int f_hat(const Point& x, const LabeledPool& pool, const MetricSpace& space, double delta) {
  return indicator_from_eta(eta_hat(x, pool, space, delta).value);
}

// ---- DensityRatioEstimator -------------------------------------------------

DensityRatioEstimator::DensityRatioEstimator(std::shared_ptr<const LabeledPool> pool,
                                             MetricSpace space, double delta)
    : pool_(std::move(pool)), space_(std::move(space)), delta_(delta) {
  check_delta(delta);
  if (!pool_) throw std::domain_error("DensityRatioEstimator: null pool");
  for (int y = 0; y < 2; ++y)
    for (const Point& p : pool_->first_half(y))
      if (!space_.contains(p)) throw std::domain_error("DensityRatioEstimator: pool point foreign to space");

  if (space_.kind() == SpaceKind::euclidean_1d) {
    std::vector<std::pair<double, unsigned char>> tagged;
    for (int y = 0; y < 2; ++y)
      for (const Point& p : pool_->first_half(y)) tagged.emplace_back(p.x(), static_cast<unsigned char>(y));
    std::sort(tagged.begin(), tagged.end());
    for (const auto& [c, y] : tagged) {
      sorted_coords_.push_back(c);
      sorted_labels_.push_back(y);
    }
  }
}

RadiusProfile DensityRatioEstimator::profile_1d(double x) const {
  const auto& a = sorted_coords_;
  const std::size_t total = a.size();
  std::size_t right = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), x) - a.begin());
  std::size_t left = right;  // next left candidate is left - 1
  return build_levels(total, pool_->n(0), pool_->n(1), [&]() -> std::pair<double, int> {
    const bool has_left = left > 0;
    const bool has_right = right < total;
    const double dl = has_left ? x - a[left - 1] : 0.0;
    const double dr = has_right ? a[right] - x : 0.0;
    if (has_left && (!has_right || dl <= dr)) {
      --left;
      return {dl, sorted_labels_[left]};
    }
    return {dr, sorted_labels_[right++]};
  });
}

RadiusProfile DensityRatioEstimator::profile(const Point& x) const {
  if (!space_.contains(x)) throw std::domain_error("DensityRatioEstimator: query foreign to space");
  if (space_.kind() == SpaceKind::euclidean_1d) return profile_1d(x.x());
  return radius_profile(x, *pool_, space_);
}

EtaEstimate DensityRatioEstimator::estimate(const Point& x) const {
  return estimate_from_profile(profile(x), delta_);
}

}  // namespace driftshift
