#ifndef DRIFTSHIFT_CONFBANDS_HPP
#define DRIFTSHIFT_CONFBANDS_HPP

#include <limits>

namespace driftshift {

/// Closed real interval. Emptiness is an explicit state; so is the
/// universal interval, which is the identity for intersection folds.
class Interval {
 public:
  // Throws std::domain_error when lo > hi or either end is NaN.
  Interval(double lo, double hi);

  static Interval universal();
  static Interval empty();

  bool is_empty() const { return state_ == State::empty; }
  bool is_universal() const { return state_ == State::universal; }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double midpoint() const { return 0.5 * (lo_ + hi_); }
  double width() const { return hi_ - lo_; }

  bool contains(double v) const;
  bool contains(const Interval& other) const;

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  enum class State { bounded, universal, empty };
  Interval(double lo, double hi, State s) : lo_(lo), hi_(hi), state_(s) {}

  double lo_;
  double hi_;
  State state_ = State::bounded;
};

Interval intersect(const Interval& a, const Interval& b);

/// Empirical ball masses: count_y points of the n_y first-half points of
/// class y fall inside the ball.
struct BallCounts {
  int count0 = 0;
  int count1 = 0;
  int n0 = 1;
  int n1 = 1;

  // Throws std::domain_error on out-of-range counts or sizes.
  static BallCounts make(int count0, int count1, int n0, int n1);

  int count(int y) const { return y ? count1 : count0; }
  int size(int y) const { return y ? n1 : n0; }
  double proportion(int y) const { return static_cast<double>(count(y)) / size(y); }
};

/// Bernoulli variance q (1 - q).
double sigma_sq(double q);

double empirical_uncertainty_flat(double q, double eps);
double population_uncertainty_flat(double p, double eps);

/// flat part at eps_iterlog(n, delta), floored at 1/n.
double empirical_uncertainty(double q, double n, double delta);
double population_uncertainty(double p, double n, double delta);

/// [q - U(1-q), q + U(q)] with the empirical uncertainty.
Interval empirical_ci(double q, double n, double delta);
/// [p - U(1-p), p + U(p)] with the population uncertainty.
Interval population_ci(double p, double n, double delta);

/// Lower (sign = -1) or upper (sign = +1) confidence bound for P_y(ball).
/// Deliberately not clamped to [0, 1].
double class_cond_bound(const BallCounts& counts, int y, int sign, double delta);

struct EtaBounds {
  double lo;
  double hi;
  double mid;
  double width;
  /// [mid - width, mid + width]: twice the raw band.
  Interval interval;
};

EtaBounds eta_bounds(const BallCounts& counts, double delta);

/// eps_iterlog(n_y, delta) for both classes. Sizes are fixed across the
/// levels of one profile, so scans compute these once.
struct ClassRates {
  double eps0;
  double eps1;
  static ClassRates make(int n0, int n1, double delta);
};

/// Same result as eta_bounds(counts, delta) for counts of sizes (n0, n1).
EtaBounds eta_bounds(const BallCounts& counts, const ClassRates& rates);

}  // namespace driftshift

#endif  // DRIFTSHIFT_CONFBANDS_HPP
