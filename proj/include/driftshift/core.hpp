#ifndef DRIFTSHIFT_CORE_HPP
#define DRIFTSHIFT_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace driftshift {

// ------------------------------------------------------------------------
// Points and metric spaces
// ------------------------------------------------------------------------

enum class SpaceKind { euclidean_1d, euclidean_nd, discrete };

/// A covariate value: a real vector, or a symbol index for discrete spaces.
class Point {
 public:
  Point() = default;

  static Point real(double x);
  static Point vector(Eigen::VectorXd coords);
  static Point symbol(int index);

  bool is_symbol() const { return symbol_ >= 0; }
  int symbol_index() const { return symbol_; }
  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index dimension() const { return coords_.size(); }

  /// First coordinate; only meaningful for real points.
  double x() const { return coords_(0); }

  friend bool operator==(const Point& a, const Point& b);

 private:
  Eigen::VectorXd coords_;
  int symbol_ = -1;
};

struct PointHash {
  std::size_t operator()(const Point& p) const;
};

/// Metric on points. Discrete spaces carry an explicit distance table.
class MetricSpace {
 public:
  static MetricSpace euclidean_1d();
  static MetricSpace euclidean_nd(int dimension);
  // Throws std::domain_error unless the table is square, symmetric,
  // nonnegative, zero on the diagonal and strictly positive elsewhere.
  static MetricSpace discrete(Eigen::MatrixXd table);

  SpaceKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  int alphabet_size() const { return static_cast<int>(table_.rows()); }
  const Eigen::MatrixXd& table() const { return table_; }

  bool contains(const Point& p) const;

  // Throws std::domain_error when either point is foreign to the space.
  double distance(const Point& a, const Point& b) const;

 private:
  SpaceKind kind_ = SpaceKind::euclidean_1d;
  int dimension_ = 1;
  Eigen::MatrixXd table_;
};

double distance(const Point& a, const Point& b, const MetricSpace& space);

// ------------------------------------------------------------------------
// Samples
// ------------------------------------------------------------------------

/// The two class-conditional samples X^0 (size 2 n0) and X^1 (size 2 n1).
/// Indices [0, n_y) feed the density-ratio estimate; [n_y, 2 n_y) feed the
/// class-conditional means used by the label-probability plug-in.
class LabeledPool {
 public:
  LabeledPool(std::vector<Point> class0, std::vector<Point> class1);

  int n(int y) const;
  std::span<const Point> first_half(int y) const;
  std::span<const Point> second_half(int y) const;
  std::span<const Point> all(int y) const;

 private:
  std::vector<Point> samples_[2];
};

/// Time-ordered covariates X_0, X_1, ... as seen by the estimators.
class UnlabeledStream {
 public:
  UnlabeledStream() = default;
  explicit UnlabeledStream(std::vector<Point> covariates)
      : covariates_(std::move(covariates)) {}

  std::size_t size() const { return covariates_.size(); }
  const Point& at(std::size_t l) const { return covariates_.at(l); }
  std::span<const Point> covariates() const { return covariates_; }
  std::span<const Point> prefix(std::size_t length) const;

 private:
  std::vector<Point> covariates_;
};

// ------------------------------------------------------------------------
// Rates
// ------------------------------------------------------------------------

struct RateParams {
  long n;
  double delta;

  // Throws std::domain_error outside n >= 1, 0 < delta < 1.
  static RateParams make(long n, double delta);
};

/// max(1, ln z). Throws std::domain_error for z <= 0.
double log_bar(double z);

/// log_bar(1/dtil) / n
double eps_base(double n, double dtil);

/// eps_base(n, delta / n)
double eps_log(double n, double delta);

/// eps_base(n, delta / log_bar(n))
double eps_iterlog(double n, double delta);

// ------------------------------------------------------------------------
// Randomness
// ------------------------------------------------------------------------

/// Counter-based generator. The output is a pure function of
/// (seed, stream, counter), so split() children are reproducible no matter
/// which thread consumes them or in which order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  bool bernoulli(double p);
  /// Index drawn with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace driftshift

#endif  // DRIFTSHIFT_CORE_HPP
