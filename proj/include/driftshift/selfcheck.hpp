#ifndef DRIFTSHIFT_SELFCHECK_HPP
#define DRIFTSHIFT_SELFCHECK_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace driftshift {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// The orthonormal basis under test. Swappable so a deliberately broken
/// recurrence can be fed through the same checks.
struct Basis {
  std::function<double(int, double)> value;
  std::function<double(int, double)> derivative;

  static Basis library();
  /// Recurrence with a wrong coefficient; fails orthonormality.
  static Basis corrupted();
};

/// m-point Gauss-Legendre rule on [0, 1] from the Golub-Welsch eigenproblem.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_01(int m);

CheckResult check_orthonormality(const Basis& basis, int max_degree = 6, double tol = 1e-8);
CheckResult check_magnitude_bounds(const Basis& basis, int max_degree = 6, int grid = 10000);
CheckResult check_gram_eigenvalues(const Basis& basis);
CheckResult check_weight_norms();
CheckResult check_clamped_ratio(int tuples = 100000, std::uint64_t seed = 7);
CheckResult check_polynomial_reproduction(int polynomials = 100, std::uint64_t seed = 11);
CheckResult check_two_point_weights();
CheckResult check_error_identity(int rules = 200, std::uint64_t seed = 13);
CheckResult check_bayes_dominance(int rules = 100, std::uint64_t seed = 17);
CheckResult check_regret_resummation(std::uint64_t seed = 19);
CheckResult check_window_fast_path(std::uint64_t seed = 23);
CheckResult check_trajectory_certificates();

std::vector<CheckResult> run_selfcheck(const Basis& basis = Basis::library());

/// One line per check; deterministic.
std::string format_report(const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace driftshift

#endif  // DRIFTSHIFT_SELFCHECK_HPP
