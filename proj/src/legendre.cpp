#include "driftshift/legendre.hpp"

#include <numbers>
#include <stdexcept>

namespace driftshift {

bool has_full_column_rank(const Matrix<double>& u) {
  if (u.rows() < u.cols()) return false;
  Eigen::JacobiSVD<Matrix<double>> svd(u);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 1e-9 * std::sqrt(static_cast<double>(u.rows()));
}

int p_of_q(int q, int beta_bar) {
  if (q < 1) throw std::domain_error("p_of_q: q must be >= 1");
  if (beta_bar < 1) throw std::domain_error("p_of_q: beta_bar must be >= 1");
  for (int p = beta_bar - 1; p > 0; --p)
    if (has_full_column_rank(design_matrix<double>(q, p))) return p;
  return 0;
}

ExtrapolationWeights extrapolation_weights(int q, int beta_bar) {
  ExtrapolationWeights w;
  w.q = q;
  w.p = p_of_q(q, beta_bar);
  const Matrix<double> u = design_matrix<double>(q, w.p);
  const Eigen::VectorXd target = design_row_at_zero<double>(w.p);
  // U^T U is positive definite at the selected degree.
  const Eigen::MatrixXd gram = u.transpose() * u;
  const Eigen::VectorXd coef = gram.llt().solve(target);
  w.v = u * coef;
  w.norm2 = w.v.norm();
  // phi_k(z) = sqrt(2k + 1) sum_j (-1)^(k + j) C(k, j) C(k + j, j) z^j
  w.monomial = Eigen::VectorXd::Zero(w.p + 1);
  for (int k = 0; k <= w.p; ++k) {
    double binom_k = 1.0;   // C(k, j)
    double binom_kj = 1.0;  // C(k + j, j)
    for (int j = 0; j <= k; ++j) {
      if (j > 0) {
        binom_k = binom_k * (k - j + 1) / j;
        binom_kj = binom_kj * (k + j) / j;
      }
      const double sign = (k + j) % 2 == 0 ? 1.0 : -1.0;
      w.monomial(j) += coef(k) * std::sqrt(2.0 * k + 1.0) * sign * binom_k * binom_kj;
    }
  }
  return w;
}

double variance_term(const ExtrapolationWeights& w, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("variance_term: delta must be positive");
  const double q = w.q;
  return w.norm2 * std::sqrt(2.0 * std::log(std::numbers::pi * std::numbers::pi * q * q / delta));
}

const ExtrapolationWeights& WeightCache::get(int q, int beta_bar) {
  const auto key = std::make_pair(q, beta_bar);
  {
    std::shared_lock lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) return *it->second;
  }
  auto fresh = std::make_unique<const ExtrapolationWeights>(extrapolation_weights(q, beta_bar));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = table_.try_emplace(key, std::move(fresh));
  return *it->second;
}

WeightCache& WeightCache::shared() {
  static WeightCache cache;
  return cache;
}

}  // namespace driftshift
