#include "driftshift/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "driftshift/core.hpp"
#include "driftshift/labelprob.hpp"
#include "driftshift/legendre.hpp"
#include "driftshift/sim.hpp"

namespace driftshift {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// L_k with the first recurrence coefficient off by one.
double broken_legendre(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int l = 1; l < k; ++l) {
    const double next = ((2 * l + 2) * x * cur - l * prev) / (l + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

sim::ScenarioSpec random_discrete_scenario(Rng& rng, int symbols) {
  sim::ScenarioSpec s;
  Eigen::MatrixXd table = Eigen::MatrixXd::Ones(symbols, symbols);
  table.diagonal().setZero();
  s.space = MetricSpace::discrete(table);
  for (auto* c : {&s.class0, &s.class1}) {
    std::vector<double> p(static_cast<std::size_t>(symbols));
    double total = 0.0;
    for (double& v : p) total += (v = rng.uniform() + 0.01);
    for (double& v : p) v /= total;
    // Absorb the rounding residue so the pmf sums to one.
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) rest -= p[i];
    p.back() = rest;
    *c = sim::DiscretePmf{p};
  }
  s.trajectory = sim::ConstantPath{0.5};
  return s;
}

}  // namespace

Basis Basis::library() {
  return {[](int k, double z) { return shifted_legendre(k, z); },
          [](int k, double z) { return shifted_legendre_derivative(k, z); }};
}

Basis Basis::corrupted() {
  Basis b = library();
  b.value = [](int k, double z) { return std::sqrt(2.0 * k + 1.0) * broken_legendre(k, 2.0 * z - 1.0); };
  return b;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_01(int m) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    const double off = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Eigen::VectorXd nodes = (eig.eigenvalues().array() + 1.0) / 2.0;
  Eigen::VectorXd weights = eig.eigenvectors().row(0).transpose().array().square();  // sums to 1 on [0, 1]
  return {nodes, weights};
}

CheckResult check_orthonormality(const Basis& basis, int max_degree, double tol) {
  const auto [z, w] = gauss_legendre_01(64);
  double worst = 0.0;
  for (int j = 0; j <= max_degree; ++j) {
    for (int k = 0; k <= max_degree; ++k) {
      double inner = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) inner += w(i) * basis.value(j, z(i)) * basis.value(k, z(i));
      worst = std::max(worst, std::abs(inner - (j == k ? 1.0 : 0.0)));
    }
  }
  return {"orthonormality", worst <= tol, fmt("max |<phi_j, phi_k> - [j == k]| = %.3e", worst)};
}

CheckResult check_magnitude_bounds(const Basis& basis, int max_degree, int grid) {
  double worst_value = 0.0;
  double worst_slope = 0.0;
  for (int k = 0; k <= max_degree; ++k) {
    const double value_bound = std::sqrt(2.0 * k + 1.0);
    const double slope_bound = 2.0 * k * k * std::sqrt(2.0 * k + 1.0);
    for (int i = 0; i < grid; ++i) {
      const double z = static_cast<double>(i) / (grid - 1);
      worst_value = std::max(worst_value, std::abs(basis.value(k, z)) / value_bound);
      if (k > 0) worst_slope = std::max(worst_slope, std::abs(basis.derivative(k, z)) / slope_bound);
    }
  }
  const bool ok = worst_value <= 1.0 + 1e-12 && worst_slope <= 1.0 + 1e-12;
  return {"magnitude bounds", ok, fmt("max |phi|/bound = %.6f, max |phi'|/bound = %.6f", worst_value, worst_slope)};
}

CheckResult check_gram_eigenvalues(const Basis& basis) {
  double worst = 0.0;  // largest deviation as a fraction of the allowed one
  bool ok = true;
  for (int p = 0; p <= 3; ++p) {
    const double allowed = 2.0 * p * p * (p + 1) * (2 * p + 1);
    for (int q : {50, 200, 1000}) {
      Eigen::MatrixXd u(q, p + 1);
      for (int i = 1; i <= q; ++i)
        for (int j = 0; j <= p; ++j) u(i - 1, j) = basis.value(j, static_cast<double>(i) / q);
      const Eigen::MatrixXd gram = u.transpose() * u;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
      const double dev = (eig.eigenvalues().array() - q).abs().maxCoeff();
      if (dev > allowed + 1e-9 * q) ok = false;
      if (allowed > 0) worst = std::max(worst, dev / allowed);
      else if (dev > 1e-9 * q) worst = std::max(worst, 1e9);
    }
  }
  return {"gram eigenvalues", ok, fmt("max |lambda - q| / allowed = %.6f", worst)};
}

CheckResult check_weight_norms() {
  bool ok = true;
  double worst = 0.0;
  for (int beta_bar : {1, 2, 3}) {
    const int lo = q_min(beta_bar);
    for (int q : {lo, lo + 1, 2 * lo, 3 * lo + 7, 5000}) {
      const ExtrapolationWeights w = extrapolation_weights(q, beta_bar);
      const double bound = beta_bar * std::sqrt(2.0 / q);
      if (w.p != beta_bar - 1 || w.norm2 > bound) ok = false;
      worst = std::max(worst, w.norm2 / bound);
    }
  }
  return {"weight norm bound", ok, fmt("max ||v|| / (beta_bar sqrt(2/q)) = %.6f", worst)};
}

CheckResult check_clamped_ratio(int tuples, std::uint64_t seed) {
  Rng rng(seed);
  int violations = 0;
  int drawn = 0;
  while (drawn < tuples) {
    const double b = 2.0 * rng.uniform() - 1.0;
    const double a = b * rng.uniform();
    if (b == 0.0) continue;
    const double ratio = a / b;
    if (!(ratio >= 0.0 && ratio <= 1.0)) continue;
    const double scale = rng.uniform();
    const double a_hat = a + 0.3 * scale * rng.normal();
    const double b_hat = b + 0.3 * scale * rng.normal();
    if (b_hat == 0.0) continue;
    ++drawn;
    const double lhs = std::abs(clamp01(a_hat / b_hat) - ratio);
    const double rhs = (std::abs(a_hat - a) + std::abs(b_hat - b)) / std::abs(b);
    if (lhs > rhs) ++violations;
  }
  return {"clamped ratio", violations == 0,
          fmt("%.0f violations in %.0f tuples", violations, tuples)};
}

CheckResult check_polynomial_reproduction(int polynomials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int beta_bar : {1, 2, 3}) {
    for (int q : {1, 2, 3, 5, 10, 50, 288, 1152, 2000}) {
      const ExtrapolationWeights w = extrapolation_weights(q, beta_bar);
      for (int r = 0; r < polynomials; ++r) {
        std::vector<double> coef(static_cast<std::size_t>(w.p) + 1);
        for (double& c : coef) c = 2.0 * rng.uniform() - 1.0;
        auto h = [&](double z) {
          double s = 0.0;
          for (std::size_t m = coef.size(); m-- > 0;) s = s * z + coef[m];
          return s;
        };
        double sum = 0.0;
        for (int i = 1; i <= q; ++i) sum += w.v(i - 1) * h(static_cast<double>(i) / q);
        worst = std::max(worst, std::abs(sum - h(0.0)));
      }
    }
  }
  return {"polynomial reproduction", worst <= 1e-9, fmt("max |sum v_i h(i/q) - h(0)| = %.3e", worst)};
}

CheckResult check_two_point_weights() {
  const ExtrapolationWeights w = extrapolation_weights(2, 2);
  const double dev = std::max(std::abs(w.v(0) - 2.0), std::abs(w.v(1) + 1.0));
  return {"two-point weights", w.p == 1 && dev <= 1e-12, fmt("max |v - (2, -1)| = %.3e", dev)};
}

CheckResult check_error_identity(int rules, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int r = 0; r < rules; ++r) {
    const int symbols = 2 + static_cast<int>(rng.next_u64() % 6);
    const sim::ScenarioSpec spec = random_discrete_scenario(rng, symbols);
    const double pi = rng.uniform();
    std::vector<int> phi(static_cast<std::size_t>(symbols));
    for (int& v : phi) v = rng.bernoulli(0.5) ? 1 : 0;
    const sim::DecisionRule rule = [&phi](const Point& x) { return phi[static_cast<std::size_t>(x.symbol_index())]; };

    const double computed = sim::test_error(spec, pi, rule);
    const auto& p0 = std::get<sim::DiscretePmf>(spec.class0).probs;
    const auto& p1 = std::get<sim::DiscretePmf>(spec.class1).probs;
    double identity = pi;
    double enumeration = 0.0;
    for (int s = 0; s < symbols; ++s) {
      const auto k = static_cast<std::size_t>(s);
      const double mixture = 0.5 * (p0[k] + p1[k]);
      const double eta = sim::eta_oracle(spec, Point::symbol(s)).value;
      identity += 2.0 * phi[k] * (1.0 - pi - eta) * mixture;
      // Joint law of (Y, X): Y ~ Bernoulli(pi), X | Y ~ P_Y.
      for (int y = 0; y < 2; ++y) {
        const double joint = y ? pi * p1[k] : (1.0 - pi) * p0[k];
        if (phi[k] != y) enumeration += joint;
      }
    }
    worst = std::max({worst, std::abs(computed - identity), std::abs(computed - enumeration)});
  }
  return {"test-error identity", worst <= 1e-12, fmt("max deviation = %.3e", worst)};
}

CheckResult check_bayes_dominance(int rules, std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0;
  for (int sc = 0; sc < 5; ++sc) {
    const int symbols = 4;
    const sim::ScenarioSpec spec = random_discrete_scenario(rng, symbols);
    const double pi = rng.uniform();
    const double best = sim::bayes_error(spec, pi);
    for (int r = 0; r < rules; ++r) {
      std::vector<int> phi(symbols);
      for (int& v : phi) v = rng.bernoulli(0.5) ? 1 : 0;
      const double err = sim::test_error(
          spec, pi, [&phi](const Point& x) { return phi[static_cast<std::size_t>(x.symbol_index())]; });
      if (best > err + 1e-12) ++failures;
    }
  }
  return {"bayes dominance", failures == 0, fmt("%.0f rules beat the Bayes rule", failures)};
}

CheckResult check_regret_resummation(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int horizon = 50 + static_cast<int>(rng.next_u64() % 2000);
    std::vector<sim::RegretRow> rows;
    for (int t = 1; t <= horizon; ++t) {
      const double bayes = 0.5 * rng.uniform();
      const double err = bayes + 0.1 * rng.uniform();
      rows.push_back({t, err, bayes, err - bayes});
    }
    const int first = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(horizon));
    const int last = first + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(horizon - first + 1));
    long double direct = 0.0L;
    for (int t = first; t <= last; ++t) direct += rows[static_cast<std::size_t>(t - 1)].excess;
    direct /= (last - first + 1);
    worst = std::max(worst, static_cast<double>(std::abs(sim::dynamic_regret(rows, first, last) - direct)));
  }
  return {"regret re-summation", worst <= 1e-15, fmt("max deviation = %.3e", worst)};
}

CheckResult check_window_fast_path(std::uint64_t seed) {
  Rng rng(seed);
  FunctionalTrace trace;
  for (int l = 0; l < 1300; ++l) trace.append(rng.bernoulli(0.3 + 0.4 * l / 1300.0) ? 1.0 : 0.0);
  double worst = 0.0;
  for (int beta_bar : {1, 2, 3}) {
    for (int t : {20, 300, 1300}) {
      const WindowSelection sel = lepski_window(trace, t, 0.05, beta_bar);
      for (std::size_t k = 0; k < sel.windows.size(); ++k)
        worst = std::max(worst, std::abs(sel.estimates[k] - marginal_estimate(trace, t, sel.windows[k], beta_bar)));
    }
  }
  return {"window estimates", worst <= 1e-12, fmt("max |running - direct| = %.3e", worst)};
}

CheckResult check_trajectory_certificates() {
  bool ok = true;
  std::ostringstream detail;
  for (double beta : {0.5, 1.0, 2.0}) {
    sim::HolderSinePath path;
    path.beta = beta;
    const double declared = path.holder_constant();
    const double measured = sim::holder_certificate([&path](double u) { return path.value(u); }, beta);
    if (measured > declared * (1.0 + 1e-6)) ok = false;
    detail << "beta " << beta << ": " << fmt("%.4f <= %.4f", measured, declared) << "; ";
  }
  const auto jumps = std::get<sim::PiecewiseJumpsPath>(sim::preset("J-jumps").trajectory);
  const auto pis = sim::realize_trajectory(jumps, 2000, 1);
  if (sim::count_segments(pis) != jumps.segments()) ok = false;
  const auto walk = std::get<sim::TvWalkPath>(sim::preset("tv-walk").trajectory);
  const auto walk_pis = sim::realize_trajectory(walk, 2000, 1);
  const double variation = sim::tv_label_path(walk_pis, walk.beta_v, 0, 2000);
  if (std::abs(variation - walk.total_variation) > 0.01 * walk.total_variation) ok = false;
  detail << "segments " << sim::count_segments(pis) << "/" << jumps.segments() << "; "
         << fmt("variation %.6f of %.6f", variation, walk.total_variation);
  return {"trajectory certificates", ok, detail.str()};
}

std::vector<CheckResult> run_selfcheck(const Basis& basis) {
  return {check_orthonormality(basis),   check_magnitude_bounds(basis),
          check_gram_eigenvalues(basis), check_weight_norms(),
          check_clamped_ratio(),         check_polynomial_reproduction(),
          check_two_point_weights(),     check_error_identity(),
          check_bayes_dominance(),       check_regret_resummation(),
          check_window_fast_path(),      check_trajectory_certificates()};
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  for (const CheckResult& r : results) {
    char name[32];
    std::snprintf(name, sizeof name, "%-24s", r.name.c_str());
    out << (r.passed ? "PASS  " : "FAIL  ") << name << r.detail << "\n";
  }
  return out.str();
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace driftshift
