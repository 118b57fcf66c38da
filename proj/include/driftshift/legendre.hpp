#ifndef DRIFTSHIFT_LEGENDRE_HPP
#define DRIFTSHIFT_LEGENDRE_HPP

#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <utility>

#include <Eigen/Dense>

namespace driftshift {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/** Standard Legendre polynomial L_k(x) on [-1, 1].
 *
 *  Evaluated with the three-term recurrence
 *    (l + 1) L_{l+1}(x) = (2l + 1) x L_l(x) - l L_{l-1}(x).
 */
template <typename Scalar>
Scalar legendre_p(int k, Scalar x) {
  assert(k >= 0);
  if (k == 0) return Scalar(1);
  Scalar prev(1);
  Scalar cur = x;
  for (int l = 1; l < k; ++l) {
    const Scalar next = (Scalar(2 * l + 1) * x * cur - Scalar(l) * prev) / Scalar(l + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

/** Derivative L'_k(x) from the recurrence L'_{l+1} = L'_{l-1} + (2l + 1) L_l. */
template <typename Scalar>
Scalar legendre_p_derivative(int k, Scalar x) {
  assert(k >= 0);
  if (k == 0) return Scalar(0);
  Scalar d_prev(0);  // L'_0
  Scalar d_cur(1);   // L'_1
  Scalar l_prev(1);  // L_0
  Scalar l_cur = x;  // L_1
  for (int l = 1; l < k; ++l) {
    const Scalar d_next = d_prev + Scalar(2 * l + 1) * l_cur;
    const Scalar l_next = (Scalar(2 * l + 1) * x * l_cur - Scalar(l) * l_prev) / Scalar(l + 1);
    d_prev = d_cur;
    d_cur = d_next;
    l_prev = l_cur;
    l_cur = l_next;
  }
  return d_cur;
}

/// Orthonormal shifted Legendre polynomial on [0, 1]:
/// phi_k(z) = sqrt(2k + 1) L_k(2z - 1).
template <typename Scalar>
Scalar shifted_legendre(int k, Scalar z) {
  using std::sqrt;
  return sqrt(Scalar(2 * k + 1)) * legendre_p(k, Scalar(2) * z - Scalar(1));
}

template <typename Scalar>
Scalar shifted_legendre_derivative(int k, Scalar z) {
  using std::sqrt;
  return Scalar(2) * sqrt(Scalar(2 * k + 1)) * legendre_p_derivative(k, Scalar(2) * z - Scalar(1));
}

/// q x (p + 1) matrix with entries phi_{j}(i / q), i = 1..q, j = 0..p.
template <typename Scalar = double>
Matrix<Scalar> design_matrix(int q, int p) {
  assert(q >= 1 && p >= 0);
  Matrix<Scalar> u(q, p + 1);
  for (int i = 1; i <= q; ++i)
    for (int j = 0; j <= p; ++j) u(i - 1, j) = shifted_legendre(j, Scalar(i) / Scalar(q));
  return u;
}

/// Row (phi_0(0), ..., phi_p(0)): the design row for the extrapolation target.
template <typename Scalar = double>
Vector<Scalar> design_row_at_zero(int p) {
  Vector<Scalar> row(p + 1);
  for (int j = 0; j <= p; ++j) row(j) = shifted_legendre(j, Scalar(0));
  return row;
}

/// Full column rank iff the smallest singular value exceeds 1e-9 sqrt(q).
bool has_full_column_rank(const Matrix<double>& u);

/// Largest p in [0, beta_bar - 1] for which design_matrix(q, p) has rank p + 1.
int p_of_q(int q, int beta_bar);

/// v_i = U_{0,:} (U^T U)^+ U_{i,:}^T for i = 1..q, with U = design_matrix(q, p_of_q(q, beta_bar)).
/// v reproduces every polynomial of degree <= p at zero:
/// sum_i v_i h(i / q) = h(0).
struct ExtrapolationWeights {
  int q = 0;
  int p = 0;
  Eigen::VectorXd v;
  double norm2 = 0.0;
  /// v_i = sum_m monomial(m) (i / q)^m
  Eigen::VectorXd monomial;
};

ExtrapolationWeights extrapolation_weights(int q, int beta_bar);

/// ||v||_2 sqrt(2 ln(pi^2 q^2 / delta))
double variance_term(const ExtrapolationWeights& w, double delta);

/// Thread-safe memo of extrapolation weights keyed by (q, beta_bar).
class WeightCache {
 public:
  const ExtrapolationWeights& get(int q, int beta_bar);

  /// Process-wide instance.
  static WeightCache& shared();

 private:
  std::shared_mutex mutex_;
  std::map<std::pair<int, int>, std::unique_ptr<const ExtrapolationWeights>> table_;
};

}  // namespace driftshift

#endif  // DRIFTSHIFT_LEGENDRE_HPP
