#include "driftshift/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace driftshift::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_probability_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::domain_error(std::string(what) + ": empty probability vector");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + ": negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::domain_error(std::string(what) + ": entries must sum to 1");
}

const GaussianMixture& as_mixture(const ClassConditional& c) {
  if (auto* g = std::get_if<GaussianMixture>(&c)) return *g;
  throw std::domain_error("expected a Gaussian mixture class-conditional");
}

const DiscretePmf& as_pmf(const ClassConditional& c) {
  if (auto* g = std::get_if<DiscretePmf>(&c)) return *g;
  throw std::domain_error("expected a discrete pmf class-conditional");
}

bool is_line(const ScenarioSpec& spec) { return spec.space.kind() == SpaceKind::euclidean_1d; }

std::pair<double, double> joint_support(const ScenarioSpec& spec) {
  const auto [a0, b0] = as_mixture(spec.class0).support();
  const auto [a1, b1] = as_mixture(spec.class1).support();
  return {std::min(a0, a1), std::max(b0, b1)};
}

double class_cdf(const ClassConditional& c, double x) { return as_mixture(c).cdf(x); }

}  // namespace

// ---- distributions ---------------------------------------------------------

void GaussianMixture::validate() const {
  if (weights.size() != means.size() || weights.size() != sds.size())
    throw std::domain_error("GaussianMixture: weights, means and sds must have equal length");
  check_probability_vector(weights, "GaussianMixture weights");
  for (std::size_t k = 0; k < means.size(); ++k)
    if (!std::isfinite(means[k]) || !(sds[k] > 0.0) || !std::isfinite(sds[k]))
      throw std::domain_error("GaussianMixture: means must be finite and sds positive");
}

double GaussianMixture::pdf(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double z = (x - means[k]) / sds[k];
    sum += weights[k] * std::exp(-0.5 * z * z) / (sds[k] * std::sqrt(kTwoPi));
  }
  return sum;
}

double GaussianMixture::cdf(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    sum += weights[k] * 0.5 * std::erfc(-(x - means[k]) / (sds[k] * std::numbers::sqrt2));
  return sum;
}

double GaussianMixture::sample(Rng& rng) const {
  const std::size_t k = weights.size() == 1 ? 0 : rng.categorical(weights);
  return means[k] + sds[k] * rng.normal();
}

std::pair<double, double> GaussianMixture::support() const {
  double lo = means[0] - 10.0 * sds[0];
  double hi = means[0] + 10.0 * sds[0];
  for (std::size_t k = 1; k < means.size(); ++k) {
    lo = std::min(lo, means[k] - 10.0 * sds[k]);
    hi = std::max(hi, means[k] + 10.0 * sds[k]);
  }
  return {lo, hi};
}

void DiscretePmf::validate() const { check_probability_vector(probs, "DiscretePmf"); }

int DiscretePmf::sample(Rng& rng) const { return static_cast<int>(rng.categorical(probs)); }

// ---- trajectories ----------------------------------------------------------

double HolderSinePath::holder_constant() const {
  const double slope = kTwoPi * cycles * std::abs(amplitude);
  if (beta == 0.0) return 2.0 * std::abs(amplitude);
  // On [0, 1], |u - v| <= 1 so a Lipschitz bound L also bounds L |u - v|^beta.
  if (beta <= 1.0) return slope;
  if (beta <= 2.0) return kTwoPi * cycles * slope;
  throw std::domain_error("HolderSinePath: beta must lie in [0, 2]");
}

double HolderSinePath::value(double u) const {
  return center + amplitude * std::sin(kTwoPi * cycles * u + phase);
}

std::string trajectory_kind(const TrajectorySpec& spec) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantPath>) return "constant";
        else if constexpr (std::is_same_v<T, HolderSinePath>) return "holder";
        else if constexpr (std::is_same_v<T, PiecewiseJumpsPath>) return "piecewise-jumps";
        else return "tv-walk";
      },
      spec);
}

namespace {

std::vector<double> realize(const ConstantPath& p, int horizon, std::uint64_t) {
  if (!(p.pi >= 0.0 && p.pi <= 1.0)) throw std::domain_error("constant trajectory: pi outside [0,1]");
  return std::vector<double>(static_cast<std::size_t>(horizon) + 1, p.pi);
}

std::vector<double> realize(const HolderSinePath& p, int horizon, std::uint64_t) {
  (void)p.holder_constant();  // validates beta
  std::vector<double> out(static_cast<std::size_t>(horizon) + 1);
  for (int l = 0; l <= horizon; ++l) out[l] = p.value(static_cast<double>(l) / horizon);
  return out;
}

std::vector<double> realize(const PiecewiseJumpsPath& p, int horizon, std::uint64_t) {
  if (p.levels.empty()) throw std::domain_error("piecewise-jumps: no segments");
  if (p.boundaries.size() + 1 != p.levels.size())
    throw std::domain_error("piecewise-jumps: need exactly one boundary fewer than levels");
  for (double v : p.levels)
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("piecewise-jumps: level outside [0,1]");
  for (std::size_t k = 0; k < p.boundaries.size(); ++k) {
    if (!(p.boundaries[k] > 0.0 && p.boundaries[k] < 1.0))
      throw std::domain_error("piecewise-jumps: boundaries must lie in (0,1)");
    if (k > 0 && !(p.boundaries[k] > p.boundaries[k - 1]))
      throw std::domain_error("piecewise-jumps: boundaries must increase strictly");
  }
  std::vector<double> out(static_cast<std::size_t>(horizon) + 1);
  std::vector<int> hits(p.levels.size(), 0);
  for (int l = 0; l <= horizon; ++l) {
    const double u = static_cast<double>(l) / horizon;
    const auto j = static_cast<std::size_t>(
        std::upper_bound(p.boundaries.begin(), p.boundaries.end(), u) - p.boundaries.begin());
    out[l] = p.levels[j];
    ++hits[j];
  }
  for (int h : hits)
    if (h == 0) throw std::domain_error("piecewise-jumps: a segment is empty at this horizon");
  return out;
}

std::vector<double> realize(const TvWalkPath& p, int horizon, std::uint64_t seed) {
  if (!(p.beta_v >= 1.0)) throw std::domain_error("tv-walk: beta_v must be >= 1");
  if (!(p.total_variation >= 0.0)) throw std::domain_error("tv-walk: total variation must be >= 0");
  if (!(p.move_prob > 0.0 && p.move_prob <= 1.0)) throw std::domain_error("tv-walk: move_prob must lie in (0,1]");
  const long moves = std::clamp<long>(std::lround(p.move_prob * horizon), 1, horizon);
  const double step = p.total_variation / std::pow(static_cast<double>(moves), p.beta_v);
  if (step > 0.4) throw std::domain_error("tv-walk: variation budget too large for [0.1, 0.9]");

  Rng rng = Rng(seed, 0x7477616c6bull).split(p.path_id);
  std::vector<int> order(static_cast<std::size_t>(horizon));
  std::iota(order.begin(), order.end(), 0);
  for (long k = 0; k < moves; ++k) {
    const auto j = static_cast<std::size_t>(k) + static_cast<std::size_t>(rng.next_u64() % static_cast<std::uint64_t>(horizon - k));
    std::swap(order[static_cast<std::size_t>(k)], order[j]);
  }
  std::vector<char> moving(static_cast<std::size_t>(horizon), 0);
  for (long k = 0; k < moves; ++k) moving[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;

  std::vector<double> out(static_cast<std::size_t>(horizon) + 1);
  out[0] = 0.5;
  for (int l = 0; l < horizon; ++l) {
    double next = out[l];
    if (moving[l]) {
      const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
      next = out[l] + dir * step;
      if (next < 0.1 || next > 0.9) next = out[l] - dir * step;
    }
    out[l + 1] = next;
  }
  return out;
}

}  // namespace

std::vector<double> realize_trajectory(const TrajectorySpec& spec, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::domain_error("realize_trajectory: horizon must be >= 1");
  auto out = std::visit([&](const auto& p) { return realize(p, horizon, seed); }, spec);
  for (double v : out)
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("trajectory leaves [0,1]");
  return out;
}

double holder_certificate(const std::function<double(double)>& g, double beta, int grid) {
  if (grid < 2) throw std::domain_error("holder_certificate: grid must have >= 2 nodes");
  if (beta < 0.0 || beta > 2.0) throw std::domain_error("holder_certificate: beta must lie in [0, 2]");
  std::vector<double> u(static_cast<std::size_t>(grid));
  std::vector<double> val(u.size());
  if (beta <= 1.0) {
    for (int i = 0; i < grid; ++i) {
      u[i] = static_cast<double>(i) / (grid - 1);
      val[i] = g(u[i]);
    }
  } else {
    // Central differences for the first derivative.
    const double h = 1e-5;
    for (int i = 0; i < grid; ++i) {
      u[i] = h + (1.0 - 2.0 * h) * static_cast<double>(i) / (grid - 1);
      val[i] = (g(u[i] + h) - g(u[i] - h)) / (2.0 * h);
    }
  }
  if (beta == 0.0) {
    const auto [mn, mx] = std::minmax_element(val.begin(), val.end());
    return *mx - *mn;
  }
  const double exponent = beta <= 1.0 ? beta : beta - 1.0;
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      best = std::max(best, std::abs(val[i] - val[j]) / std::pow(u[j] - u[i], exponent));
  return best;
}

int count_segments(std::span<const double> pis) {
  if (pis.empty()) return 0;
  int runs = 1;
  for (std::size_t l = 1; l < pis.size(); ++l)
    if (pis[l] != pis[l - 1]) ++runs;
  return runs;
}

// ---- scenarios -------------------------------------------------------------

void ScenarioSpec::validate() const {
  if (n0 < 1 || n1 < 1) throw std::domain_error("scenario: n0 and n1 must be >= 1");
  if (horizon < 1) throw std::domain_error("scenario: horizon must be >= 1");
  if (space.kind() == SpaceKind::euclidean_1d) {
    as_mixture(class0).validate();
    as_mixture(class1).validate();
  } else if (space.kind() == SpaceKind::discrete) {
    for (const auto* c : {&class0, &class1}) {
      const DiscretePmf& pmf = as_pmf(*c);
      pmf.validate();
      if (static_cast<int>(pmf.probs.size()) != space.alphabet_size())
        throw std::domain_error("scenario: pmf length must match the alphabet");
    }
  } else {
    throw std::domain_error("scenario: only euclidean-1d and discrete spaces are simulated");
  }
  (void)realize_trajectory(trajectory, horizon, seed);
}

ScenarioSpec preset(std::string_view name) {
  ScenarioSpec s;
  if (name == "stationary") {
    s.trajectory = ConstantPath{0.3};
  } else if (name == "slow-sine") {
    s.trajectory = HolderSinePath{1.0, 0.3, 0.5, 0.5, 0.0};
  } else if (name == "J-jumps") {
    s.trajectory = PiecewiseJumpsPath{{0.2, 0.7, 0.35, 0.8}, {0.25, 0.5, 0.75}};
  } else if (name == "tv-walk") {
    s.trajectory = TvWalkPath{3.0, 1.0, 0, 0.05};
  } else {
    throw std::domain_error("unknown preset: " + std::string(name));
  }
  return s;
}

std::vector<std::string> preset_names() { return {"stationary", "slow-sine", "J-jumps", "tv-walk"}; }

namespace {

Point draw_point(const ClassConditional& c, Rng& rng) {
  if (auto* g = std::get_if<GaussianMixture>(&c)) return Point::real(g->sample(rng));
  return Point::symbol(std::get<DiscretePmf>(c).sample(rng));
}

}  // namespace

ScenarioDraw generate(const ScenarioSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  std::vector<Point> samples[2];
  const ClassConditional* conds[2] = {&spec.class0, &spec.class1};
  const int sizes[2] = {spec.n0, spec.n1};
  for (int y = 0; y < 2; ++y) {
    Rng rng = root.split(1 + static_cast<std::uint64_t>(y));
    samples[y].reserve(2 * static_cast<std::size_t>(sizes[y]));
    for (int i = 0; i < 2 * sizes[y]; ++i) samples[y].push_back(draw_point(*conds[y], rng));
  }

  std::vector<double> pis = realize_trajectory(spec.trajectory, spec.horizon, spec.seed);
  Rng rng = root.split(3);
  std::vector<Point> covariates;
  std::vector<int> labels;
  covariates.reserve(pis.size());
  labels.reserve(pis.size());
  for (double pi : pis) {
    const int y = rng.bernoulli(pi) ? 1 : 0;
    labels.push_back(y);
    covariates.push_back(draw_point(*conds[y], rng));
  }
  return ScenarioDraw{LabeledPool(std::move(samples[0]), std::move(samples[1])),
                      UnlabeledStream(std::move(covariates)), std::move(labels), std::move(pis)};
}

// ---- oracles ---------------------------------------------------------------

EtaOracle eta_oracle(const ScenarioSpec& spec, const Point& x) {
  if (!spec.space.contains(x)) throw std::domain_error("eta_oracle: point foreign to the space");
  double g0 = 0.0;
  double g1 = 0.0;
  if (is_line(spec)) {
    g0 = as_mixture(spec.class0).pdf(x.x());
    g1 = as_mixture(spec.class1).pdf(x.x());
  } else {
    g0 = as_pmf(spec.class0).probs[static_cast<std::size_t>(x.symbol_index())];
    g1 = as_pmf(spec.class1).probs[static_cast<std::size_t>(x.symbol_index())];
  }
  if (g0 + g1 == 0.0) return {0.5, true};
  return {g1 / (g0 + g1), false};
}

PiecewiseRule locate_switches(const ScenarioSpec& spec, const DecisionRule& rule, int grid) {
  if (!is_line(spec)) throw std::domain_error("locate_switches: requires a euclidean-1d scenario");
  if (grid < 2) throw std::domain_error("locate_switches: grid must be >= 2");
  const auto [lo, hi] = joint_support(spec);
  const double step = (hi - lo) / grid;
  PiecewiseRule out;
  double a = lo;
  int la = rule(Point::real(a));
  out.labels.push_back(la);
  for (int i = 1; i <= grid; ++i) {
    const double b = i == grid ? hi : lo + step * i;
    const int lb = rule(Point::real(b));
    if (lb != la) {
      double left = a;
      double right = b;
      for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (left + right);
        if (mid <= left || mid >= right) break;
        if (rule(Point::real(mid)) == la) left = mid;
        else right = mid;
      }
      out.breaks.push_back(left);
      out.labels.push_back(lb);
    }
    a = b;
    la = lb;
  }
  return out;
}

double tv_oracle(const ScenarioSpec& spec) {
  spec.validate();
  if (!is_line(spec)) {
    const auto& p0 = as_pmf(spec.class0).probs;
    const auto& p1 = as_pmf(spec.class1).probs;
    double sum = 0.0;
    for (std::size_t s = 0; s < p0.size(); ++s) sum += std::abs(p0[s] - p1[s]);
    return 0.5 * sum;
  }
  // The supremum is attained on A = {g1 > g0}.
  const auto& m0 = as_mixture(spec.class0);
  const auto& m1 = as_mixture(spec.class1);
  const PiecewiseRule a = locate_switches(spec, [&](const Point& x) { return m1.pdf(x.x()) > m0.pdf(x.x()) ? 1 : 0; });
  double tv = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.labels.size(); ++k) {
    const double next = k < a.breaks.size() ? a.breaks[k] : std::numeric_limits<double>::infinity();
    if (a.labels[k] == 1) tv += (m1.cdf(next) - m1.cdf(prev)) - (m0.cdf(next) - m0.cdf(prev));
    prev = next;
  }
  return tv;
}

double test_error(const ScenarioSpec& spec, double pi, const PiecewiseRule& rule) {
  if (!is_line(spec)) throw std::domain_error("test_error: piecewise rules need a euclidean-1d scenario");
  if (rule.labels.size() != rule.breaks.size() + 1) throw std::domain_error("test_error: malformed piecewise rule");
  double err = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rule.labels.size(); ++k) {
    const double next = k < rule.breaks.size() ? rule.breaks[k] : std::numeric_limits<double>::infinity();
    if (rule.labels[k] == 1) err += (1.0 - pi) * (class_cdf(spec.class0, next) - class_cdf(spec.class0, prev));
    else err += pi * (class_cdf(spec.class1, next) - class_cdf(spec.class1, prev));
    prev = next;
  }
  return err;
}

double test_error(const ScenarioSpec& spec, double pi, const DecisionRule& rule) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::domain_error("test_error: pi outside [0,1]");
  if (is_line(spec)) return test_error(spec, pi, locate_switches(spec, rule));
  const auto& p0 = as_pmf(spec.class0).probs;
  const auto& p1 = as_pmf(spec.class1).probs;
  double err = 0.0;
  for (std::size_t s = 0; s < p0.size(); ++s) {
    if (rule(Point::symbol(static_cast<int>(s))) == 1) err += (1.0 - pi) * p0[s];
    else err += pi * p1[s];
  }
  return err;
}

DecisionRule bayes_rule(const ScenarioSpec& spec, double pi) {
  return [spec, pi](const Point& x) { return eta_oracle(spec, x).value > 1.0 - pi ? 1 : 0; };
}

double bayes_error(const ScenarioSpec& spec, double pi) { return test_error(spec, pi, bayes_rule(spec, pi)); }

EvaluationGrid evaluation_grid(const ScenarioSpec& spec, int cells) {
  EvaluationGrid g;
  if (!is_line(spec)) {
    g.mass0 = as_pmf(spec.class0).probs;
    g.mass1 = as_pmf(spec.class1).probs;
    for (int s = 0; s < spec.space.alphabet_size(); ++s) g.nodes.push_back(Point::symbol(s));
    return g;
  }
  if (cells < 1) throw std::domain_error("evaluation_grid: need at least one cell");
  const auto [lo, hi] = joint_support(spec);
  const double step = cells == 1 ? 0.0 : (hi - lo) / (cells - 1);
  double prev_edge = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < cells; ++k) {
    const double node = lo + step * k;
    const double edge = k + 1 < cells ? node + 0.5 * step : std::numeric_limits<double>::infinity();
    g.nodes.push_back(Point::real(node));
    g.mass0.push_back(class_cdf(spec.class0, edge) - class_cdf(spec.class0, prev_edge));
    g.mass1.push_back(class_cdf(spec.class1, edge) - class_cdf(spec.class1, prev_edge));
    prev_edge = edge;
  }
  return g;
}

double test_error(const EvaluationGrid& grid, double pi, std::span<const int> labels) {
  if (labels.size() != grid.nodes.size()) throw std::domain_error("test_error: one label per grid cell required");
  double err = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    err += labels[k] == 1 ? (1.0 - pi) * grid.mass0[k] : pi * grid.mass1[k];
  return err;
}

// ---- regret ----------------------------------------------------------------

double dynamic_regret(std::span<const RegretRow> rows, int first, int last) {
  if (last < first) throw std::domain_error("dynamic_regret: empty interval");
  double sum = 0.0;
  long count = 0;
  for (const RegretRow& r : rows) {
    if (r.t < first || r.t > last) continue;
    sum += r.excess;
    ++count;
  }
  if (count != static_cast<long>(last - first + 1))
    throw std::domain_error("dynamic_regret: interval not covered by rows");
  return sum / static_cast<double>(count);
}

double tv_label_path(std::span<const double> pis, double beta_v, int first, int last) {
  if (!(beta_v >= 1.0)) throw std::domain_error("tv_label_path: beta_v must be >= 1");
  if (first < 0 || last < first || static_cast<std::size_t>(last) >= pis.size())
    throw std::domain_error("tv_label_path: interval outside the path");
  double sum = 0.0;
  for (int l = first; l < last; ++l) sum += std::pow(std::abs(pis[l] - pis[l + 1]), 1.0 / beta_v);
  return std::pow(sum, beta_v);
}

// ---- overlays --------------------------------------------------------------

double power_transform(double r, double q) {
  if (!(r >= 1.0)) throw std::domain_error("power_transform: r must be >= 1");
  if (!(q > 0.0)) throw std::domain_error("power_transform: q must be positive");
  if (q == 1.0) return std::log(r);
  return std::pow((1.0 - q * std::pow(r, q - 1.0)) / (1.0 - q), 1.0 / q);
}

TheoryOverlay theory_bounds(const TheoryParams& p) {
  if (!(p.tv > 0.0)) throw std::domain_error("theory_bounds: TV(P0, P1) must be positive");
  const double tv2 = p.tv * p.tv;
  auto smooth_term = [](double c, double exponent, double eps) {
    if (c == 0.0) return 0.0;
    return std::pow(std::pow(c, 1.0 / exponent) * eps, exponent / (2.0 * exponent + 1.0));
  };

  TheoryOverlay o;
  o.lambda_labelled = std::max(std::sqrt(eps_log(p.n_min, p.delta)) / p.tv,
                               smooth_term(p.c_gamma, p.gamma, eps_iterlog(p.n_min, p.delta)));
  const double eps_m = eps_log(p.window, p.delta);
  o.lambda_unlabelled = p.beta > 0.0
                            ? std::max(std::sqrt(eps_m) / p.tv, smooth_term(p.holder_c, p.beta, eps_m / tv2))
                            : std::max(std::sqrt(eps_m) / p.tv, p.holder_c);

  auto unlabelled = [&](double r, double c, double beta) {
    const double psi = power_transform(r, p.alpha / 2.0);
    const double eps = eps_base(r, p.delta / p.t_max);
    const double root = std::sqrt(psi * eps / tv2);
    return beta > 0.0 ? std::max(root, smooth_term(c, beta, eps / tv2)) : std::max(c, root);
  };
  const double r_jumps = p.interval_length / p.jumps;
  o.psi = power_transform(r_jumps, p.alpha / 2.0);
  o.unlabelled_jumps = unlabelled(r_jumps, p.holder_c, p.beta);
  o.unlabelled_tv = unlabelled(p.interval_length, p.path_variation, p.beta_v);

  const double z = std::max(o.lambda_labelled, o.lambda_unlabelled);
  o.single_time_rhs = 2.0 * std::min(1.0, p.c_alpha * std::pow(z, p.alpha)) + p.delta;
  o.jumps_regret_rhs = p.c_alpha * std::pow(std::max(o.lambda_labelled, o.unlabelled_jumps), p.alpha) + p.delta;
  o.tv_regret_rhs = p.c_alpha * std::pow(std::max(o.lambda_labelled, o.unlabelled_tv), p.alpha) + p.delta;
  return o;
}

}  // namespace driftshift::sim
