#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "driftshift/selfcheck.hpp"
#include "driftshift/sim.hpp"

using namespace driftshift;
using namespace driftshift::sim;

namespace {

ScenarioSpec discrete_spec(std::vector<double> p0, std::vector<double> p1, double pi) {
  ScenarioSpec s;
  const int k = static_cast<int>(p0.size());
  Eigen::MatrixXd table(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) table(i, j) = std::abs(i - j);
  s.space = MetricSpace::discrete(table);
  s.class0 = DiscretePmf{std::move(p0)};
  s.class1 = DiscretePmf{std::move(p1)};
  s.trajectory = ConstantPath{pi};
  s.n0 = s.n1 = 50;
  s.horizon = 100;
  return s;
}

// Expected loss over the full joint distribution of (X, Y).
double enumerate_error(const std::vector<double>& p0, const std::vector<double>& p1, double pi,
                       const std::vector<int>& rule) {
  double e = 0.0;
  for (std::size_t x = 0; x < p0.size(); ++x) {
    e += pi * p1[x] * (rule[x] != 1);
    e += (1 - pi) * p0[x] * (rule[x] != 0);
  }
  return e;
}

std::vector<double> random_pmf(Rng& rng, int k) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) s += (v = rng.uniform() + 0.01);
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("gaussian mixture") {
  const GaussianMixture g{{0.3, 0.7}, {-1.0, 2.0}, {0.5, 1.5}};
  const double h = 1e-3;
  auto integrate = [&](double lo, double hi) {
    const int steps = static_cast<int>(std::lround((hi - lo) / h));
    double s = 0.0;
    for (int i = 0; i < steps; ++i) s += g.pdf(lo + (i + 0.5) * h) * h;
    return s;
  };
  CHECK(integrate(-12.0, 12.0) == doctest::Approx(1.0).epsilon(1e-6));
  const double c = integrate(-12.0, 0.5);
  CHECK(g.cdf(0.5) == doctest::Approx(c).epsilon(1e-6));
  Rng rng(1);
  double m = 0.0;
  for (int i = 0; i < 200000; ++i) m += g.sample(rng);
  CHECK(m / 200000 == doctest::Approx(0.3 * -1.0 + 0.7 * 2.0).epsilon(0.01));
  CHECK_THROWS_AS((GaussianMixture{{0.5, 0.6}, {0, 1}, {1, 1}}.validate()), std::domain_error);
  CHECK_THROWS_AS((GaussianMixture{{1.0}, {0}, {0.0}}.validate()), std::domain_error);
  CHECK_THROWS_AS((DiscretePmf{{0.5, 0.4}}.validate()), std::domain_error);
  CHECK_THROWS_AS((DiscretePmf{{1.2, -0.2}}.validate()), std::domain_error);
}

TEST_CASE("generation") {
  SUBCASE("certain labels") {
    auto s = preset("stationary");
    s.trajectory = ConstantPath{1.0};
    s.n0 = s.n1 = 10;
    s.horizon = 500;
    const auto d = generate(s);
    for (int y : d.labels) CHECK(y == 1);
    CHECK(d.stream.size() == 501);
    CHECK(d.pis.size() == 501);
    CHECK(d.pool.n(0) == 10);
  }
  SUBCASE("discrete frequencies") {
    auto s = discrete_spec({0.8, 0.2}, {0.1, 0.9}, 0.3);
    s.horizon = 10000;
    const auto d = generate(s);
    int ones = 0;
    for (const Point& p : d.stream.covariates()) ones += p.symbol_index();
    const double n = d.stream.size();
    const double p = 0.7 * 0.2 + 0.3 * 0.9;
    CHECK(std::abs(ones / n - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  }
  SUBCASE("fixed seed reproduces the draw") {
    for (const auto& name : preset_names()) {
      auto s = preset(name);
      s.n0 = s.n1 = 100;
      s.horizon = 300;
      s.seed = 77;
      const auto a = generate(s);
      const auto b = generate(s);
      for (int y = 0; y < 2; ++y)
        for (int i = 0; i < 200; ++i) CHECK(a.pool.all(y)[i] == b.pool.all(y)[i]);
      for (std::size_t l = 0; l < a.stream.size(); ++l) CHECK(a.stream.at(l) == b.stream.at(l));
      CHECK(a.labels == b.labels);
      CHECK(a.pis == b.pis);
      s.seed = 78;
      CHECK_FALSE(generate(s).stream.at(0) == a.stream.at(0));
    }
  }
  SUBCASE("invalid specs") {
    auto s = discrete_spec({0.5, 0.5}, {0.5, 0.5}, 0.3);
    s.class1 = DiscretePmf{{0.5, 0.3}};
    CHECK_THROWS_AS(generate(s), std::domain_error);
    s.class1 = DiscretePmf{{0.2, 0.2, 0.6}};
    CHECK_THROWS_AS(generate(s), std::domain_error);
    auto g = preset("stationary");
    g.class0 = DiscretePmf{{1.0}};
    CHECK_THROWS_AS(generate(g), std::domain_error);
    CHECK_THROWS_AS(preset("no-such-preset"), std::domain_error);
  }
}

TEST_CASE("eta and TV oracles") {
  auto same = preset("stationary");
  same.class1 = same.class0;
  CHECK(eta_oracle(same, Point::real(0.4)).value == 0.5);
  CHECK(tv_oracle(same) == 0.0);

  const auto disjoint = discrete_spec({0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, 0.5);
  CHECK(tv_oracle(disjoint) == 1.0);
  CHECK(eta_oracle(disjoint, Point::symbol(2)).value == 1.0);

  const auto with_null = discrete_spec({0.5, 0.5, 0.0}, {0.0, 1.0, 0.0}, 0.5);
  const auto e = eta_oracle(with_null, Point::symbol(2));
  CHECK(e.null_point);
  CHECK(e.value == 0.5);
  CHECK_FALSE(eta_oracle(with_null, Point::symbol(1)).null_point);

  const auto gauss = preset("stationary");
  CHECK(eta_oracle(gauss, Point::real(0.5)).value == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
}

TEST_CASE("TV of the gaussian pair against Monte Carlo") {
  const auto spec = preset("stationary");
  Rng rng(2024);
  const long n = 10000000;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const double x = (rng.bernoulli(0.5) ? 1.0 : -1.0) + rng.normal();
    sum += std::abs(2.0 * eta_oracle(spec, Point::real(x)).value - 1.0);
  }
  const double mc = sum / n;
  MESSAGE("TV oracle " << tv_oracle(spec) << ", Monte Carlo " << mc);
  CHECK(std::abs(tv_oracle(spec) - mc) < 5e-4);
}

TEST_CASE("test error") {
  const auto spec = preset("stationary");
  for (double pi : {0.0, 0.3, 0.77, 1.0}) {
    CHECK(test_error(spec, pi, DecisionRule([](const Point&) { return 1; })) == doctest::Approx(1 - pi).epsilon(1e-12));
    CHECK(test_error(spec, pi, DecisionRule([](const Point&) { return 0; })) == doctest::Approx(pi).epsilon(1e-12));
  }
  // Threshold at zero: each class errs with probability Phi(-1).
  const double phi_m1 = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  CHECK(bayes_error(spec, 0.5) == doctest::Approx(phi_m1).epsilon(1e-12));
  CHECK(test_error(spec, 0.5, PiecewiseRule{{0.0}, {0, 1}}) == doctest::Approx(phi_m1).epsilon(1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p0 = random_pmf(rng, 4);
    const auto p1 = random_pmf(rng, 4);
    const double pi = rng.uniform();
    const auto s = discrete_spec(p0, p1, pi);
    std::vector<int> rule(4);
    for (int& v : rule) v = static_cast<int>(rng.next_u64() % 2);
    const DecisionRule f = [&](const Point& p) { return rule[p.symbol_index()]; };
    CHECK(std::abs(test_error(s, pi, f) - enumerate_error(p0, p1, pi, rule)) <= 1e-12);
    const auto grid = evaluation_grid(s);
    CHECK(std::abs(test_error(grid, pi, rule) - enumerate_error(p0, p1, pi, rule)) <= 1e-12);
  }
}

TEST_CASE("error identity and Bayes dominance") {
  CHECK(check_error_identity(200, 29).passed);
  CHECK(check_bayes_dominance(100, 31).passed);
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p0 = random_pmf(rng, 5);
    const auto p1 = random_pmf(rng, 5);
    const double pi = rng.uniform();
    const auto s = discrete_spec(p0, p1, pi);
    std::vector<int> rule(5);
    for (int& v : rule) v = static_cast<int>(rng.next_u64() % 2);
    const double best = bayes_error(s, pi);
    CHECK(best <= enumerate_error(p0, p1, pi, rule) + 1e-15);
    std::vector<int> bayes(5);
    for (int x = 0; x < 5; ++x) bayes[x] = bayes_rule(s, pi)(Point::symbol(x));
    CHECK(std::abs(best - enumerate_error(p0, p1, pi, bayes)) <= 1e-12);
  }
}

TEST_CASE("Bayes rule") {
  const auto spec = preset("stationary");
  const auto half = bayes_rule(spec, 0.5);
  CHECK(half(Point::real(0.001)) == 1);
  CHECK(half(Point::real(-0.001)) == 0);
  const auto sure = bayes_rule(spec, 1.0);
  for (double x = -8.0; x <= 8.0; x += 0.5) CHECK(sure(Point::real(x)) == 1);
  // Threshold moves to x = ln((1 - pi) / pi) / 2.
  const auto r = locate_switches(spec, bayes_rule(spec, 0.3));
  REQUIRE(r.breaks.size() == 1);
  CHECK(r.breaks[0] == doctest::Approx(0.5 * std::log(0.7 / 0.3)).epsilon(1e-9));
  CHECK(r.labels == std::vector<int>{0, 1});
}

TEST_CASE("evaluation grid") {
  const auto spec = preset("stationary");
  const auto grid = evaluation_grid(spec, 1024);
  CHECK(grid.nodes.size() == 1024);
  double m0 = 0.0;
  double m1 = 0.0;
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    m0 += grid.mass0[k];
    m1 += grid.mass1[k];
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m1 == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<int> labels;
  const auto bayes = bayes_rule(spec, 0.3);
  for (const auto& x : grid.nodes) labels.push_back(bayes(x));
  const double e = test_error(grid, 0.3, labels);
  CHECK(e >= bayes_error(spec, 0.3) - 1e-15);
  CHECK(e - bayes_error(spec, 0.3) < 1e-4);
}

TEST_CASE("dynamic regret") {
  std::vector<RegretRow> rows;
  for (int t = 1; t <= 10; ++t) rows.push_back({t, 0.2, 0.2, 0.0});
  CHECK(dynamic_regret(rows, 1, 10) == 0.0);

  const auto s = discrete_spec({0.6, 0.4, 0.0}, {0.0, 0.0, 1.0}, 0.4);
  const DecisionRule wrong = [](const Point& p) { return p.symbol_index() == 2 ? 0 : 1; };
  std::vector<RegretRow> bad;
  for (int t = 1; t <= 5; ++t) {
    const double te = test_error(s, 0.4, wrong);
    const double be = bayes_error(s, 0.4);
    bad.push_back({t, te, be, te - be});
  }
  CHECK(dynamic_regret(bad, 1, 5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(check_regret_resummation(37).passed);
  CHECK_THROWS_AS(dynamic_regret(rows, 5, 11), std::domain_error);
  CHECK_THROWS_AS(dynamic_regret(rows, 0, 3), std::domain_error);
}

TEST_CASE("label path variation") {
  const std::vector<double> flat(20, 0.4);
  CHECK(tv_label_path(flat, 1.0, 0, 19) == 0.0);
  CHECK(tv_label_path(std::vector<double>{0.2, 0.2, 0.5, 0.5}, 1.0, 0, 3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(tv_label_path(std::vector<double>{0.5, 0.59, 0.68}, 2.0, 0, 2) == doctest::Approx(0.36).epsilon(1e-12));
  Rng rng(4);
  std::vector<double> walk(500);
  for (double& v : walk) v = rng.uniform();
  double plain = 0.0;
  for (int l = 10; l < 400; ++l) plain += std::abs(walk[l] - walk[l + 1]);
  CHECK(tv_label_path(walk, 1.0, 10, 400) == plain);
}

TEST_CASE("trajectories") {
  CHECK(check_trajectory_certificates().passed);

  const auto pis = realize_trajectory(HolderSinePath{1.0, 0.3, 0.5, 0.5, 0.0}, 2000, 1);
  REQUIRE(pis.size() == 2001);
  CHECK(pis[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pis[1000] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(pis[2000] == doctest::Approx(0.5).epsilon(1e-12));

  for (double beta : {0.5, 1.0, 2.0}) {
    const HolderSinePath path{beta, 0.3, 1.0, 0.5, 0.2};
    CHECK(holder_certificate([&](double u) { return path.value(u); }, beta) <= path.holder_constant() * (1 + 1e-9));
  }

  const auto jumps = realize_trajectory(PiecewiseJumpsPath{{0.2, 0.7, 0.35, 0.8}, {0.25, 0.5, 0.75}}, 2000, 1);
  CHECK(count_segments(jumps) == 4);
  CHECK(jumps[0] == 0.2);
  CHECK(jumps[2000] == 0.8);

  const TvWalkPath walk{3.0, 1.0, 0, 0.05};
  const auto w = realize_trajectory(walk, 2000, 5);
  CHECK(tv_label_path(w, 1.0, 0, 2000) == doctest::Approx(3.0).epsilon(0.01));
  for (double v : w) {
    CHECK(v >= 0.1);
    CHECK(v <= 0.9);
  }

  CHECK_THROWS_AS(realize_trajectory(HolderSinePath{1.0, 0.3, 1.0, 0.9, 0.0}, 100, 1), std::domain_error);
  CHECK_THROWS_AS(realize_trajectory(PiecewiseJumpsPath{{0.2, 0.7, 0.3}, {0.51, 0.52}}, 10, 1), std::domain_error);
  CHECK_THROWS_AS(realize_trajectory(ConstantPath{1.2}, 100, 1), std::domain_error);
}

TEST_CASE("theory overlays") {
  CHECK(power_transform(std::exp(2.5), 1.0) == doctest::Approx(2.5).epsilon(1e-14));
  for (double q : {0.25, 0.5, 2.0, 3.0}) CHECK(power_transform(1.0, q) == doctest::Approx(1.0).epsilon(1e-14));
  TheoryParams p;
  p.n_min = 500;
  p.c_gamma = 0.0;
  p.tv = 0.6;
  p.delta = 0.05;
  const auto o = theory_bounds(p);
  CHECK(o.lambda_labelled == doctest::Approx(std::sqrt(eps_log(500, 0.05)) / 0.6).epsilon(1e-14));
  CHECK(o.note.find("constants") != std::string::npos);
  p.tv = 0.0;
  CHECK_THROWS_AS(theory_bounds(p), std::domain_error);
}
