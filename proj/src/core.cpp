#include "driftshift/core.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace driftshift {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

// ---- Point ---------------------------------------------------------------

Point Point::real(double x) {
  if (!std::isfinite(x)) throw std::domain_error("Point::real: non-finite coordinate");
  Point p;
  p.coords_ = Eigen::VectorXd::Constant(1, x);
  return p;
}

Point Point::vector(Eigen::VectorXd coords) {
  if (coords.size() < 1) throw std::domain_error("Point::vector: empty coordinates");
  if (!coords.allFinite()) throw std::domain_error("Point::vector: non-finite coordinate");
  Point p;
  p.coords_ = std::move(coords);
  return p;
}

Point Point::symbol(int index) {
  if (index < 0) throw std::domain_error("Point::symbol: negative index");
  Point p;
  p.symbol_ = index;
  return p;
}

bool operator==(const Point& a, const Point& b) {
  if (a.symbol_ != b.symbol_) return false;
  if (a.is_symbol()) return true;
  return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
}

std::size_t PointHash::operator()(const Point& p) const {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(p.symbol_index() + 1));
  for (Eigen::Index i = 0; i < p.dimension(); ++i) {
    // +0.0 and -0.0 compare equal, so they must hash equal.
    const double c = p.coords()(i) == 0.0 ? 0.0 : p.coords()(i);
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(c));
  }
  return static_cast<std::size_t>(h);
}

// ---- MetricSpace -----------------------------------------------------------

MetricSpace MetricSpace::euclidean_1d() { return MetricSpace{}; }

MetricSpace MetricSpace::euclidean_nd(int dimension) {
  if (dimension < 1) throw std::domain_error("euclidean_nd: dimension must be >= 1");
  MetricSpace s;
  s.kind_ = dimension == 1 ? SpaceKind::euclidean_1d : SpaceKind::euclidean_nd;
  s.dimension_ = dimension;
  return s;
}

MetricSpace MetricSpace::discrete(Eigen::MatrixXd table) {
  if (table.rows() < 1 || table.rows() != table.cols())
    throw std::domain_error("discrete: distance table must be square and nonempty");
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    if (table(i, i) != 0.0) throw std::domain_error("discrete: nonzero diagonal entry");
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (!std::isfinite(table(i, j))) throw std::domain_error("discrete: non-finite distance");
      if (table(i, j) != table(j, i)) throw std::domain_error("discrete: asymmetric table");
      if (i != j && !(table(i, j) > 0.0))
        throw std::domain_error("discrete: distinct symbols need positive distance");
    }
  }
  MetricSpace s;
  s.kind_ = SpaceKind::discrete;
  s.dimension_ = 0;
  s.table_ = std::move(table);
  return s;
}

bool MetricSpace::contains(const Point& p) const {
  if (kind_ == SpaceKind::discrete)
    return p.is_symbol() && p.symbol_index() < alphabet_size();
  return !p.is_symbol() && p.dimension() == dimension_;
}

double MetricSpace::distance(const Point& a, const Point& b) const {
  if (!contains(a) || !contains(b))
    throw std::domain_error("distance: point does not belong to the space");
  switch (kind_) {
    case SpaceKind::euclidean_1d:
      return std::abs(a.x() - b.x());
    case SpaceKind::euclidean_nd:
      return (a.coords() - b.coords()).norm();
    case SpaceKind::discrete:
      return table_(a.symbol_index(), b.symbol_index());
  }
  return 0.0;
}

double distance(const Point& a, const Point& b, const MetricSpace& space) {
  return space.distance(a, b);
}

// ---- Samples ---------------------------------------------------------------

LabeledPool::LabeledPool(std::vector<Point> class0, std::vector<Point> class1) {
  for (auto* v : {&class0, &class1}) {
    if (v->empty() || v->size() % 2 != 0)
      throw std::domain_error("LabeledPool: each class needs a nonempty even-sized sample");
  }
  samples_[0] = std::move(class0);
  samples_[1] = std::move(class1);
}

int LabeledPool::n(int y) const {
  return static_cast<int>(samples_[y != 0].size() / 2);
}

std::span<const Point> LabeledPool::first_half(int y) const {
  return std::span<const Point>(samples_[y != 0]).first(static_cast<std::size_t>(n(y)));
}

std::span<const Point> LabeledPool::second_half(int y) const {
  return std::span<const Point>(samples_[y != 0]).last(static_cast<std::size_t>(n(y)));
}

std::span<const Point> LabeledPool::all(int y) const { return samples_[y != 0]; }

std::span<const Point> UnlabeledStream::prefix(std::size_t length) const {
  if (length > covariates_.size())
    throw std::out_of_range("UnlabeledStream::prefix: length exceeds stream");
  return std::span<const Point>(covariates_).first(length);
}

// ---- Rates -----------------------------------------------------------------

RateParams RateParams::make(long n, double delta) {
  if (n < 1) throw std::domain_error("RateParams: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("RateParams: delta must lie in (0,1)");
  return {n, delta};
}

double log_bar(double z) {
  if (!(z > 0.0)) throw std::domain_error("log_bar: argument must be positive");
  return z > std::numbers::e ? std::log(z) : 1.0;
}

double eps_base(double n, double dtil) {
  if (!(n >= 1.0)) throw std::domain_error("eps_base: n must be >= 1");
  if (!(dtil > 0.0)) throw std::domain_error("eps_base: dtil must be positive");
  return log_bar(1.0 / dtil) / n;
}

double eps_log(double n, double delta) { return eps_base(n, delta / n); }

double eps_iterlog(double n, double delta) { return eps_base(n, delta / log_bar(n)); }

// ---- Rng -------------------------------------------------------------------

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ull))) {}

Rng Rng::split(std::uint64_t stream_id) const {
  return Rng(seed_, splitmix64(stream_ ^ 0xA0761D6478BD642Full) + stream_id);
}

std::uint64_t Rng::next_u64() {
  return splitmix64(key_ + 0x9E3779B97F4A7C15ull * (++counter_));
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // Round-off can leave u just above the running sum; return the last
  // index with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  throw std::domain_error("categorical: all weights are zero");
}

}  // namespace driftshift
