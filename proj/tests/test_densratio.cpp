#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "driftshift/confbands.hpp"
#include "driftshift/densratio.hpp"
#include "driftshift/sim.hpp"

using namespace driftshift;

namespace {

std::vector<Point> reals(std::initializer_list<double> xs) {
  std::vector<Point> out;
  for (double x : xs) out.push_back(Point::real(x));
  return out;
}

LabeledPool gaussian_pool(int n, std::uint64_t seed) {
  const sim::GaussianMixture g0{{1.0}, {-1.0}, {1.0}};
  const sim::GaussianMixture g1{{1.0}, {1.0}, {1.0}};
  Rng rng(seed);
  std::vector<Point> c0;
  std::vector<Point> c1;
  for (int i = 0; i < 2 * n; ++i) c0.push_back(Point::real(g0.sample(rng)));
  for (int i = 0; i < 2 * n; ++i) c1.push_back(Point::real(g1.sample(rng)));
  return LabeledPool(std::move(c0), std::move(c1));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double eta_true(double x) {
  const double g0 = std::exp(-0.5 * (x + 1) * (x + 1));
  const double g1 = std::exp(-0.5 * (x - 1) * (x - 1));
  return g1 / (g0 + g1);
}

double grid_error(int n, std::uint64_t seed, double delta) {
  const auto pool = std::make_shared<const LabeledPool>(gaussian_pool(n, seed));
  const DensityRatioEstimator est(pool, MetricSpace::euclidean_1d(), delta);
  double sum = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double x = -2.0 + 0.2 * k;
    sum += std::abs(est.estimate(Point::real(x)).value - eta_true(x));
  }
  return sum / 21.0;
}

}  // namespace

TEST_CASE("radius profile of a two-point pool") {
  const LabeledPool pool(reals({0, 5}), reals({1, 5}));
  const auto prof = radius_profile(Point::real(1), pool, MetricSpace::euclidean_1d());
  REQUIRE(prof.radii == std::vector<double>{0.0, 1.0});
  REQUIRE(prof.levels.size() == 2);
  CHECK(prof.levels[0].radius == 0.0);
  CHECK(prof.levels[0].counts.count0 == 0);
  CHECK(prof.levels[0].counts.count1 == 1);
  CHECK(prof.levels[1].radius == 1.0);
  CHECK(prof.levels[1].counts.count0 == 1);
  CHECK(prof.levels[1].counts.count1 == 1);
}

TEST_CASE("coincident points give one level") {
  const LabeledPool pool(reals({2, 2, 9, 9}), reals({2, 2, 7, 7}));
  const auto prof = radius_profile(Point::real(2), pool, MetricSpace::euclidean_1d());
  CHECK(prof.radii == std::vector<double>(4, 0.0));
  REQUIRE(prof.levels.size() == 1);
  CHECK(prof.levels[0].counts.count0 == 2);
  CHECK(prof.levels[0].counts.count1 == 2);
}

TEST_CASE("profile matches brute force") {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Point> c0;
    std::vector<Point> c1;
    // Integer coordinates force duplicate radii.
    for (int i = 0; i < 6; ++i) c0.push_back(Point::real(static_cast<double>(rng.next_u64() % 7)));
    for (int i = 0; i < 6; ++i) c1.push_back(Point::real(static_cast<double>(rng.next_u64() % 7)));
    const LabeledPool pool(c0, c1);
    const Point x = Point::real(static_cast<double>(rng.next_u64() % 9) - 1.0);

    std::vector<double> all;
    for (int i = 0; i < 3; ++i) all.push_back(std::abs(c0[i].x() - x.x()));
    for (int i = 0; i < 3; ++i) all.push_back(std::abs(c1[i].x() - x.x()));
    std::sort(all.begin(), all.end());

    const auto generic = radius_profile(x, pool, MetricSpace::euclidean_1d());
    CHECK(generic.radii == all);
    int prev0 = 0;
    int prev1 = 0;
    for (const auto& lvl : generic.levels) {
      int k0 = 0;
      int k1 = 0;
      for (int i = 0; i < 3; ++i) {
        k0 += std::abs(c0[i].x() - x.x()) <= lvl.radius;
        k1 += std::abs(c1[i].x() - x.x()) <= lvl.radius;
      }
      CHECK(lvl.counts.count0 == k0);
      CHECK(lvl.counts.count1 == k1);
      CHECK(k0 >= prev0);
      CHECK(k1 >= prev1);
      prev0 = k0;
      prev1 = k1;
    }
    CHECK(generic.levels.back().counts.count0 == 3);
    CHECK(generic.levels.back().counts.count1 == 3);

    const DensityRatioEstimator est(std::make_shared<const LabeledPool>(pool), MetricSpace::euclidean_1d(), 0.1);
    const auto fast = est.profile(x);
    CHECK(fast.radii == generic.radii);
    REQUIRE(fast.levels.size() == generic.levels.size());
    for (std::size_t k = 0; k < fast.levels.size(); ++k) {
      CHECK(fast.levels[k].radius == generic.levels[k].radius);
      CHECK(fast.levels[k].counts.count0 == generic.levels[k].counts.count0);
      CHECK(fast.levels[k].counts.count1 == generic.levels[k].counts.count1);
    }
  }
}

TEST_CASE("foreign query is rejected") {
  const LabeledPool pool(reals({0, 1}), reals({1, 2}));
  CHECK_THROWS_AS(radius_profile(Point::symbol(0), pool, MetricSpace::euclidean_1d()), std::domain_error);
}

TEST_CASE("lepski radius") {
  SUBCASE("single radius") {
    RadiusProfile prof;
    prof.radii = {0.7, 0.7};
    prof.levels = {RadiusLevel{0.7, BallCounts::make(1, 1, 1, 1)}};
    const auto r = lepski_radius(prof, 0.1);
    CHECK(r.radius == 0.7);
    CHECK(r.level == 0);
  }
  SUBCASE("no emptying gives the largest radius") {
    const LabeledPool pool(reals({0, 0, 0.5, 0.5}), reals({0.1, 0.1, 0.4, 0.4}));
    const auto prof = radius_profile(Point::real(0.2), pool, MetricSpace::euclidean_1d());
    Interval run = Interval::universal();
    for (const auto& lvl : prof.levels) run = intersect(run, eta_bounds(lvl.counts, 0.1).interval);
    REQUIRE_FALSE(run.is_empty());
    CHECK(lepski_radius(prof, 0.1).radius == prof.radii.back());
  }
  SUBCASE("disjoint intervals stop at the first radius") {
    const int n = 1000000;
    RadiusProfile prof;
    prof.radii = {1.0, 2.0};
    prof.levels = {RadiusLevel{1.0, BallCounts::make(0, 1000, n, n)},
                   RadiusLevel{2.0, BallCounts::make(500000, 1000, n, n)}};
    REQUIRE(intersect(eta_bounds(prof.levels[0].counts, 0.1).interval,
                      eta_bounds(prof.levels[1].counts, 0.1).interval)
                .is_empty());
    const auto r = lepski_radius(prof, 0.1);
    CHECK(r.radius == 1.0);
    CHECK(r.level == 0);
    CHECK(r.intervals_inspected == 2);
  }
}

TEST_CASE("prefix intersections are nested") {
  const auto pool = gaussian_pool(200, 8);
  for (double x : {-1.5, 0.0, 0.8}) {
    const auto prof = radius_profile(Point::real(x), pool, MetricSpace::euclidean_1d());
    Interval run = Interval::universal();
    for (const auto& lvl : prof.levels) {
      const Interval next = intersect(run, eta_bounds(lvl.counts, 0.1).interval);
      CHECK(run.contains(next));
      run = next;
    }
  }
}

TEST_CASE("hand-chained toy estimate") {
  const LabeledPool pool(reals({0, 3}), reals({2, 3}));
  const double d = 0.2;
  const auto e = eta_hat(Point::real(0.5), pool, MetricSpace::euclidean_1d(), d);
  const auto b1 = eta_bounds(BallCounts::make(1, 0, 1, 1), d);
  const auto b2 = eta_bounds(BallCounts::make(1, 1, 1, 1), d);
  const bool reach = !intersect(b1.interval, b2.interval).is_empty();
  CHECK(e.chosen_radius == (reach ? 1.5 : 0.5));
  CHECK(e.value == (reach ? b2.mid : b1.mid));
}

TEST_CASE("identical classes give one half") {
  const auto g = gaussian_pool(100, 3);
  std::vector<Point> c(g.all(0).begin(), g.all(0).end());
  const LabeledPool pool(c, c);
  for (double x = -3.0; x <= 3.0; x += 0.25) CHECK(eta_hat(Point::real(x), pool, MetricSpace::euclidean_1d(), 0.1).value == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("indicator ties go to one") {
  CHECK(indicator_from_eta(0.5) == 1);
  CHECK(indicator_from_eta(0.49) == 0);
  CHECK(indicator_from_eta(0.8) == 1);
}

TEST_CASE("class swap antisymmetry and permutation invariance") {
  const auto pool = gaussian_pool(150, 21);
  std::vector<Point> c0(pool.all(0).begin(), pool.all(0).end());
  std::vector<Point> c1(pool.all(1).begin(), pool.all(1).end());
  const LabeledPool swapped(c1, c0);
  std::vector<Point> p0 = c0;
  std::vector<Point> p1 = c1;
  std::reverse(p0.begin(), p0.begin() + 150);
  std::rotate(p1.begin(), p1.begin() + 37, p1.begin() + 150);
  const LabeledPool permuted(p0, p1);
  const auto line = MetricSpace::euclidean_1d();
  for (double x = -3.0; x <= 3.0; x += 0.1) {
    const Point q = Point::real(x);
    const double v = eta_hat(q, pool, line, 0.1).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(eta_hat(q, swapped, line, 0.1).value - (1.0 - v)) <= 1e-12);
    CHECK(eta_hat(q, permuted, line, 0.1).value == v);
  }
}

TEST_CASE("fast path equals generic path") {
  const auto pool = std::make_shared<const LabeledPool>(gaussian_pool(300, 5));
  const DensityRatioEstimator est(pool, MetricSpace::euclidean_1d(), 0.05);
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const Point x = Point::real(3.0 * rng.normal());
    const auto a = est.estimate(x);
    const auto b = eta_hat(x, *pool, MetricSpace::euclidean_1d(), 0.05);
    CHECK(a.value == b.value);
    CHECK(a.chosen_radius == b.chosen_radius);
    CHECK(a.intervals_inspected == b.intervals_inspected);
    CHECK(est.indicator(x) == f_hat(x, *pool, MetricSpace::euclidean_1d(), 0.05));
  }
}

TEST_CASE("discrete space") {
  Eigen::MatrixXd table(3, 3);
  table << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const auto space = MetricSpace::discrete(table);
  const LabeledPool pool({Point::symbol(0), Point::symbol(0), Point::symbol(1), Point::symbol(2)},
                         {Point::symbol(2), Point::symbol(2), Point::symbol(1), Point::symbol(0)});
  const auto prof = radius_profile(Point::symbol(1), pool, space);
  CHECK(prof.radii == std::vector<double>{1, 1, 1, 1});
  const DensityRatioEstimator est(std::make_shared<const LabeledPool>(pool), space, 0.1);
  for (int s = 0; s < 3; ++s)
    CHECK(est.estimate(Point::symbol(s)).value == eta_hat(Point::symbol(s), pool, space, 0.1).value);
}

TEST_CASE("pointwise error shrinks with n" * doctest::test_suite("targets")) {
  std::vector<double> med;
  for (int n : {500, 1000, 2000}) {
    std::vector<double> errs;
    for (std::uint64_t s = 1; s <= 50; ++s) {
      const auto pool = std::make_shared<const LabeledPool>(gaussian_pool(n, 1000 * n + s));
      const DensityRatioEstimator est(pool, MetricSpace::euclidean_1d(), 0.1);
      errs.push_back(std::abs(est.estimate(Point::real(0.5)).value - eta_true(0.5)));
    }
    med.push_back(median(errs));
  }
  MESSAGE("median |eta_hat - eta| at x = 0.5: " << med[0] << " " << med[1] << " " << med[2]);
  CHECK(med[1] < med[0]);
  CHECK(med[2] < med[1]);
}

TEST_CASE("accuracy on the gaussian pair at n = 2000" * doctest::test_suite("targets")) {
  std::vector<double> errs;
  for (std::uint64_t s = 1; s <= 50; ++s) errs.push_back(grid_error(2000, 7000 + s, 0.1));
  const double m = median(errs);
  MESSAGE("median grid-averaged |eta_hat - eta| = " << m);
  CHECK(m <= 0.1);
}
