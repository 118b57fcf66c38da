#include "driftshift/confbands.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftshift/core.hpp"

namespace driftshift {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw std::domain_error("Interval: require lo <= hi");
}

Interval Interval::universal() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Interval(-inf, inf, State::universal);
}

Interval Interval::empty() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return Interval(nan, nan, State::empty);
}

bool Interval::contains(double v) const {
  if (is_empty()) return false;
  return lo_ <= v && v <= hi_;
}

bool Interval::contains(const Interval& other) const {
  if (other.is_empty()) return true;
  if (is_empty()) return false;
  return lo_ <= other.lo_ && other.hi_ <= hi_;
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (a.is_universal()) return b;
  if (b.is_universal()) return a;
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  if (lo > hi) return Interval::empty();
  return Interval(lo, hi);
}

BallCounts BallCounts::make(int count0, int count1, int n0, int n1) {
  if (n0 < 1 || n1 < 1) throw std::domain_error("BallCounts: sample sizes must be positive");
  if (count0 < 0 || count0 > n0 || count1 < 0 || count1 > n1)
    throw std::domain_error("BallCounts: count outside [0, n]");
  return {count0, count1, n0, n1};
}

double sigma_sq(double q) { return q * (1.0 - q); }

double empirical_uncertainty_flat(double q, double eps) {
  return 8.0 * (std::sqrt(eps * sigma_sq(q) + eps * eps) + (1.0 - 2.0 * q) * eps) /
         (3.0 * (1.0 + 2.0 * eps));
}

double population_uncertainty_flat(double p, double eps) {
  return 8.0 * (std::sqrt(9.0 * eps * sigma_sq(p) + eps * eps) + (1.0 - 2.0 * p) * eps) /
         (9.0 + 2.0 * eps);
}

double empirical_uncertainty(double q, double n, double delta) {
  return std::max(empirical_uncertainty_flat(q, eps_iterlog(n, delta)), 1.0 / n);
}

double population_uncertainty(double p, double n, double delta) {
  return std::max(population_uncertainty_flat(p, eps_iterlog(n, delta)), 1.0 / n);
}

Interval empirical_ci(double q, double n, double delta) {
  return Interval(q - empirical_uncertainty(1.0 - q, n, delta), q + empirical_uncertainty(q, n, delta));
}

Interval population_ci(double p, double n, double delta) {
  return Interval(p - population_uncertainty(1.0 - p, n, delta), p + population_uncertainty(p, n, delta));
}

namespace {

double uncertainty_at(double q, double n, double eps) {
  return std::max(empirical_uncertainty_flat(q, eps), 1.0 / n);
}

double bound_at(const BallCounts& counts, int y, int sign, double eps) {
  const double phat = counts.proportion(y);
  const double n = counts.size(y);
  if (sign < 0) return phat - uncertainty_at(1.0 - phat, n, eps);
  return phat + uncertainty_at(phat, n, eps);
}

}  // namespace

double class_cond_bound(const BallCounts& counts, int y, int sign, double delta) {
  return bound_at(counts, y, sign, eps_iterlog(counts.size(y), delta));
}

ClassRates ClassRates::make(int n0, int n1, double delta) {
  return {eps_iterlog(n0, delta), eps_iterlog(n1, delta)};
}

EtaBounds eta_bounds(const BallCounts& counts, double delta) {
  return eta_bounds(counts, ClassRates::make(counts.n0, counts.n1, delta));
}

EtaBounds eta_bounds(const BallCounts& counts, const ClassRates& rates) {
  auto ratio_bound = [&](int sign) {
    const double num = bound_at(counts, 1, sign, rates.eps1);
    const double den = bound_at(counts, 0, -sign, rates.eps0) + num;
    if (!(den > 0.0)) return (sign + 1) / 2.0;
    return std::clamp(num / den, 0.0, 1.0);
  };
  const double lo = ratio_bound(-1);
  const double hi = ratio_bound(+1);
  const double mid = 0.5 * (lo + hi);
  const double width = hi - lo;
  return EtaBounds{lo, hi, mid, width, Interval(mid - width, mid + width)};
}

}  // namespace driftshift
