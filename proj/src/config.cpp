#include "driftshift/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace driftshift {

using nlohmann::json;

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(message), field_(std::move(field)), line_(line) {}

namespace {

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Walks the JSON pointer through the raw text, matching each key after the
// previous one. Good enough to point a human at the right line.
class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path, line_of(path), message);
  }

  int line_of(const std::string& path) const {
    std::size_t pos = 0;
    bool found = false;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/')) {
      if (part.empty() || std::all_of(part.begin(), part.end(), ::isdigit)) continue;
      const auto hit = text_.find('"' + part + '"', pos);
      if (hit == std::string::npos) break;
      pos = hit;
      found = true;
    }
    return found ? line_at(text_, pos) : 0;
  }

  const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, path + ": expected an object");
    std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
      if (!keys.count(k)) fail(path + "/" + k, path + "/" + k + ": unknown field");
    return j;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, path + ": expected a finite number");
    return v;
  }

  long integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, path + ": expected an integer");
    return j.get<long>();
  }

  std::vector<double> numbers(const json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
    return out;
  }

  std::vector<long> integers(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, path + ": expected a nonempty array of integers");
    std::vector<long> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], path + "/" + std::to_string(i)));
    return out;
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, path + ": expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, path + ": expected true or false");
    return j.get<bool>();
  }

 private:
  const std::string& text_;
};

sim::ClassConditional read_class(const Reader& r, const json& j, const std::string& path) {
  r.object(j, path, {"mixture", "pmf"});
  if (j.contains("mixture") == j.contains("pmf")) r.fail(path, path + ": give exactly one of mixture or pmf");
  if (j.contains("pmf")) return sim::DiscretePmf{r.numbers(j["pmf"], path + "/pmf")};
  const std::string mp = path + "/mixture";
  const json& m = r.object(j["mixture"], mp, {"weights", "means", "sds"});
  for (const char* k : {"weights", "means", "sds"})
    if (!m.contains(k)) r.fail(mp + "/" + k, mp + "/" + k + ": missing");
  return sim::GaussianMixture{r.numbers(m["weights"], mp + "/weights"), r.numbers(m["means"], mp + "/means"),
                              r.numbers(m["sds"], mp + "/sds")};
}

sim::TrajectorySpec read_trajectory(const Reader& r, const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) r.fail(path, path + ": expected an object with a kind");
  const std::string kind = r.string(j["kind"], path + "/kind");
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? r.number(j[key], path + "/" + key) : fallback;
  };
  if (kind == "constant") {
    r.object(j, path, {"kind", "pi"});
    return sim::ConstantPath{num("pi", 0.5)};
  }
  if (kind == "holder") {
    r.object(j, path, {"kind", "beta", "amplitude", "cycles", "center", "phase"});
    const sim::HolderSinePath d;
    return sim::HolderSinePath{num("beta", d.beta), num("amplitude", d.amplitude), num("cycles", d.cycles),
                               num("center", d.center), num("phase", d.phase)};
  }
  if (kind == "piecewise-jumps") {
    r.object(j, path, {"kind", "levels", "boundaries"});
    if (!j.contains("levels")) r.fail(path + "/levels", path + "/levels: missing");
    sim::PiecewiseJumpsPath p;
    p.levels = r.numbers(j["levels"], path + "/levels");
    if (j.contains("boundaries")) {
      p.boundaries = r.numbers(j["boundaries"], path + "/boundaries");
    } else {
      for (std::size_t k = 1; k < p.levels.size(); ++k)
        p.boundaries.push_back(static_cast<double>(k) / static_cast<double>(p.levels.size()));
    }
    return p;
  }
  if (kind == "tv-walk") {
    r.object(j, path, {"kind", "total_variation", "beta_v", "path_id", "move_prob"});
    const sim::TvWalkPath d;
    sim::TvWalkPath p{num("total_variation", d.total_variation), num("beta_v", d.beta_v), d.path_id,
                      num("move_prob", d.move_prob)};
    if (j.contains("path_id")) {
      const long id = r.integer(j["path_id"], path + "/path_id");
      if (id < 0) r.fail(path + "/path_id", path + "/path_id: must be >= 0");
      p.path_id = static_cast<std::uint64_t>(id);
    }
    return p;
  }
  r.fail(path + "/kind", path + "/kind: expected constant, holder, piecewise-jumps or tv-walk");
}

MetricSpace read_space(const Reader& r, const json& j, const std::string& path) {
  r.object(j, path, {"kind", "table"});
  const std::string kind = j.contains("kind") ? r.string(j["kind"], path + "/kind") : "euclidean-1d";
  if (kind == "euclidean-1d") return MetricSpace::euclidean_1d();
  if (kind != "discrete") r.fail(path + "/kind", path + "/kind: simulated spaces are euclidean-1d or discrete");
  if (!j.contains("table") || !j["table"].is_array() || j["table"].empty())
    r.fail(path + "/table", path + "/table: expected a square distance table");
  const json& t = j["table"];
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd table(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const std::string rp = path + "/table/" + std::to_string(a);
    const auto row = r.numbers(t[static_cast<std::size_t>(a)], rp);
    if (static_cast<Eigen::Index>(row.size()) != m) r.fail(rp, rp + ": table must be square");
    for (Eigen::Index b = 0; b < m; ++b) table(a, b) = row[static_cast<std::size_t>(b)];
  }
  try {
    return MetricSpace::discrete(table);
  } catch (const std::domain_error& e) {
    r.fail(path + "/table", path + "/table: " + e.what());
  }
}

MetricSpace unit_table(std::size_t symbols) {
  const auto m = static_cast<Eigen::Index>(symbols);
  Eigen::MatrixXd table = Eigen::MatrixXd::Ones(m, m);
  table.diagonal().setZero();
  return MetricSpace::discrete(table);
}

json class_json(const sim::ClassConditional& c) {
  if (auto* g = std::get_if<sim::GaussianMixture>(&c))
    return {{"mixture", {{"weights", g->weights}, {"means", g->means}, {"sds", g->sds}}}};
  return {{"pmf", std::get<sim::DiscretePmf>(c).probs}};
}

json trajectory_json(const sim::TrajectorySpec& spec) {
  json j{{"kind", sim::trajectory_kind(spec)}};
  if (auto* c = std::get_if<sim::ConstantPath>(&spec)) j["pi"] = c->pi;
  if (auto* h = std::get_if<sim::HolderSinePath>(&spec)) {
    j["beta"] = h->beta;
    j["amplitude"] = h->amplitude;
    j["cycles"] = h->cycles;
    j["center"] = h->center;
    j["phase"] = h->phase;
  }
  if (auto* p = std::get_if<sim::PiecewiseJumpsPath>(&spec)) {
    j["levels"] = p->levels;
    j["boundaries"] = p->boundaries;
  }
  if (auto* w = std::get_if<sim::TvWalkPath>(&spec)) {
    j["total_variation"] = w->total_variation;
    j["beta_v"] = w->beta_v;
    j["path_id"] = w->path_id;
    j["move_prob"] = w->move_prob;
  }
  return j;
}

json space_json(const MetricSpace& space) {
  if (space.kind() != SpaceKind::discrete) return {{"kind", "euclidean-1d"}};
  json rows = json::array();
  for (Eigen::Index a = 0; a < space.table().rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < space.table().cols(); ++b) row.push_back(space.table()(a, b));
    rows.push_back(row);
  }
  return {{"kind", "discrete"}, {"table", rows}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) throw ConfigError("/schema_version", 0, "unsupported schema_version");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("/estimator/delta", 0, "delta must lie in (0,1)");
  if (beta_bar < 1 || beta_bar > 6) throw ConfigError("/estimator/beta_bar", 0, "beta_bar must lie in [1, 6]");
  if (n_values.empty() || horizons.empty() || seeds.empty())
    throw ConfigError("/sweep", 0, "sweep lists must be nonempty");
  if (intervals.empty()) throw ConfigError("/regret/intervals", 0, "need at least one regret interval");
  if (grid_cells < 2) throw ConfigError("/regret/grid_cells", 0, "grid_cells must be >= 2");
  if (out_dir.empty()) throw ConfigError("/outputs/dir", 0, "output directory must be nonempty");
  for (int n : n_values)
    if (n < 1) throw ConfigError("/sweep/n", 0, "n must be >= 1");
  for (int t : horizons) {
    if (t < 2) throw ConfigError("/sweep/T", 0, "T must be >= 2");
    for (const auto& f : intervals) (void)interval_rounds(f, t);
    sim::ScenarioSpec s = scenario;
    s.horizon = t;
    try {
      s.validate();
    } catch (const std::domain_error& e) {
      throw ConfigError("/scenario", 0, std::string("scenario: ") + e.what());
    }
  }
}

std::pair<int, int> interval_rounds(const std::pair<double, double>& fraction, int horizon) {
  const auto [a, b] = fraction;
  if (!(a >= 0.0 && a <= b && b <= 1.0))
    throw ConfigError("/regret/intervals", 0, "interval fractions must satisfy 0 <= a <= b <= 1");
  const int first = std::max(1, static_cast<int>(std::lround(a * horizon)));
  const int last = static_cast<int>(std::lround(b * horizon));
  if (last < first) throw ConfigError("/regret/intervals", 0, "interval is empty at this horizon");
  return {first, last};
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", line_at(text, e.byte == 0 ? 0 : e.byte - 1), std::string("malformed JSON: ") + e.what());
  }
  const Reader r(text);
  r.object(root, "", {"schema_version", "scenario", "estimator", "sweep", "regret", "outputs"});

  ExperimentConfig c;
  if (!root.contains("schema_version")) r.fail("/schema_version", "/schema_version: missing");
  c.schema_version = static_cast<int>(r.integer(root["schema_version"], "/schema_version"));
  if (c.schema_version != kSchemaVersion)
    r.fail("/schema_version", "/schema_version: expected " + std::to_string(kSchemaVersion));

  if (root.contains("scenario")) {
    const json& s = r.object(root["scenario"], "/scenario", {"preset", "space", "class0", "class1", "trajectory"});
    if (s.contains("preset")) {
      c.preset = r.string(s["preset"], "/scenario/preset");
      try {
        c.scenario = sim::preset(c.preset);
      } catch (const std::domain_error& e) {
        r.fail("/scenario/preset", std::string("/scenario/preset: ") + e.what());
      }
    }
    if (s.contains("class0")) c.scenario.class0 = read_class(r, s["class0"], "/scenario/class0");
    if (s.contains("class1")) c.scenario.class1 = read_class(r, s["class1"], "/scenario/class1");
    if (s.contains("trajectory")) c.scenario.trajectory = read_trajectory(r, s["trajectory"], "/scenario/trajectory");
    if (s.contains("space")) {
      c.scenario.space = read_space(r, s["space"], "/scenario/space");
    } else if (auto* pmf = std::get_if<sim::DiscretePmf>(&c.scenario.class0)) {
      c.scenario.space = unit_table(pmf->probs.size());
    }
  }

  if (root.contains("estimator")) {
    const json& e = r.object(root["estimator"], "/estimator", {"delta", "beta_bar"});
    if (e.contains("delta")) c.delta = r.number(e["delta"], "/estimator/delta");
    if (e.contains("beta_bar")) c.beta_bar = static_cast<int>(r.integer(e["beta_bar"], "/estimator/beta_bar"));
    if (!(c.delta > 0.0 && c.delta < 1.0)) r.fail("/estimator/delta", "/estimator/delta: must lie in (0,1)");
    if (c.beta_bar < 1 || c.beta_bar > 6) r.fail("/estimator/beta_bar", "/estimator/beta_bar: must lie in [1, 6]");
  }

  if (root.contains("sweep")) {
    const json& s = r.object(root["sweep"], "/sweep", {"n", "T", "seeds"});
    auto positive = [&](const char* key, long minimum) {
      const std::string path = std::string("/sweep/") + key;
      std::vector<int> out;
      for (long v : r.integers(s[key], path)) {
        if (v < minimum || v > 100000000) r.fail(path, path + ": value out of range");
        out.push_back(static_cast<int>(v));
      }
      return out;
    };
    if (s.contains("n")) c.n_values = positive("n", 1);
    if (s.contains("T")) c.horizons = positive("T", 2);
    if (s.contains("seeds")) {
      c.seeds.clear();
      for (long v : r.integers(s["seeds"], "/sweep/seeds")) {
        if (v < 0) r.fail("/sweep/seeds", "/sweep/seeds: seeds must be >= 0");
        c.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
  }

  if (root.contains("regret")) {
    const json& g = r.object(root["regret"], "/regret", {"intervals", "grid_cells"});
    if (g.contains("intervals")) {
      const json& iv = g["intervals"];
      if (!iv.is_array() || iv.empty()) r.fail("/regret/intervals", "/regret/intervals: expected [[a, b], ...]");
      c.intervals.clear();
      for (std::size_t i = 0; i < iv.size(); ++i) {
        const std::string path = "/regret/intervals/" + std::to_string(i);
        const auto pair = r.numbers(iv[i], path);
        if (pair.size() != 2 || !(pair[0] >= 0.0 && pair[0] <= pair[1] && pair[1] <= 1.0))
          r.fail(path, path + ": expected [a, b] with 0 <= a <= b <= 1");
        c.intervals.emplace_back(pair[0], pair[1]);
      }
    }
    if (g.contains("grid_cells")) {
      c.grid_cells = static_cast<int>(r.integer(g["grid_cells"], "/regret/grid_cells"));
      if (c.grid_cells < 2) r.fail("/regret/grid_cells", "/regret/grid_cells: must be >= 2");
    }
  }

  if (root.contains("outputs")) {
    const json& o = r.object(root["outputs"], "/outputs", {"dir", "emit_plots"});
    if (o.contains("dir")) c.out_dir = r.string(o["dir"], "/outputs/dir");
    if (o.contains("emit_plots")) c.emit_plots = r.boolean(o["emit_plots"], "/outputs/emit_plots");
  }

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), r.line_of(e.field()), e.field() + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const ExperimentConfig& c) {
  json intervals = json::array();
  for (const auto& [a, b] : c.intervals) intervals.push_back({a, b});
  const json j{
      {"schema_version", c.schema_version},
      {"scenario",
       {{"space", space_json(c.scenario.space)},
        {"class0", class_json(c.scenario.class0)},
        {"class1", class_json(c.scenario.class1)},
        {"trajectory", trajectory_json(c.scenario.trajectory)}}},
      {"estimator", {{"delta", c.delta}, {"beta_bar", c.beta_bar}}},
      {"sweep", {{"n", c.n_values}, {"T", c.horizons}, {"seeds", c.seeds}}},
      {"regret", {{"intervals", intervals}, {"grid_cells", c.grid_cells}}},
  };
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace driftshift
