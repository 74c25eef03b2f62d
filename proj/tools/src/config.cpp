#include "mvclt_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mvclt/distribution.hpp"
#include "mvclt/corpus.hpp"
#include "mvclt/verify.hpp"

namespace mvclt::cli {

namespace {

using json = nlohmann::json;

class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config error at " + (path_.empty() ? std::string("/") : path_) + ": " + msg);
  }

  void expect_object() const {
    if (!j_->is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    expect_object();
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_->items())
      if (!allowed.count(k)) Node(v, path_ + "/" + k).fail("unknown key '" + k + "'");
  }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Node at(const char* key) const {
    if (!has(key)) fail(std::string("missing required key '") + key + "'");
    return Node((*j_)[key], path_ + "/" + key);
  }

  std::optional<Node> get(const char* key) const {
    if (!has(key)) return std::nullopt;
    return Node((*j_)[key], path_ + "/" + key);
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t uint() const {
    if (!j_->is_number_integer() || j_->get<std::int64_t>() < 0) fail("expected a non-negative integer");
    return j_->get<std::uint64_t>();
  }

  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  std::vector<Node> items() const {
    if (!j_->is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "/" + std::to_string(i));
    return out;
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& n : items()) out.push_back(n.number());
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    for (const auto& n : items()) out.push_back(static_cast<std::size_t>(n.uint()));
    return out;
  }

  Matrix matrix() const {
    const auto rows = items();
    if (rows.empty()) fail("expected a non-empty matrix");
    const std::size_t cols = rows[0].items().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows[i].numbers();
      if (r.size() != cols) rows[i].fail("row has " + std::to_string(r.size()) + " entries, expected " +
                                         std::to_string(cols));
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = r[j];
    }
    return m;
  }

 private:
  const json* j_;
  std::string path_;
};

struct Context {
  std::filesystem::path base_dir;
  std::vector<std::string>* warnings;
};

std::string resolve(const Context& ctx, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute() || ctx.base_dir.empty()) return path.string();
  return (ctx.base_dir / path).string();
}

template <class F>
auto rethrow_at(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    node.fail(e.what());
  }
}

ComponentDistribution parse_law(const Node& node) {
  if (node.raw().is_string()) {
    const std::string name = node.string();
    if (name == "rademacher") return rademacher();
    if (name == "normal") return standard_normal();
    if (name == "uniform") return standardized_uniform();
    node.fail("unknown law '" + name + "' (parameterized laws need an object)");
  }
  node.expect_object();
  if (node.has("atoms")) {
    node.allow_only({"atoms"});
    std::vector<Atom> atoms;
    for (const auto& a : node.at("atoms").items()) {
      const auto pair = a.numbers();
      if (pair.size() != 2) a.fail("an atom is [value, probability]");
      atoms.push_back({pair[0], pair[1]});
    }
    return rethrow_at(node, [&] { return ComponentDistribution::from_atoms(std::move(atoms)); });
  }
  node.allow_only({"name", "p"});
  const std::string name = node.at("name").string();
  if (name == "rademacher") return rademacher();
  if (name == "normal") return standard_normal();
  if (name == "uniform") return standardized_uniform();
  const double p = node.at("p").number();
  if (!(p > 0.0 && p < 1.0)) node.at("p").fail("p must lie in (0, 1)");
  if (name == "bernoulli") return bernoulli(p);
  if (name == "two-point") return standardized_two_point(p);
  node.at("name").fail("unknown law '" + name + "'");
}

std::vector<ComponentDistribution> parse_model(const Node& node, std::optional<std::size_t> implied_n) {
  node.allow_only({"law", "n", "components"});
  if (node.has("components")) {
    if (node.has("law")) node.fail("give either 'law' or 'components', not both");
    std::vector<ComponentDistribution> comps;
    for (const auto& c : node.at("components").items()) comps.push_back(parse_law(c));
    if (node.has("n") && node.at("n").uint() != comps.size())
      node.at("n").fail("does not match the number of components");
    if (implied_n && *implied_n != comps.size())
      node.fail("statistic needs " + std::to_string(*implied_n) + " coordinates, model has " +
                std::to_string(comps.size()));
    return comps;
  }
  const ComponentDistribution law = node.has("law") ? parse_law(node.at("law")) : rademacher();
  std::size_t n = 0;
  if (node.has("n")) {
    n = node.at("n").uint();
    if (implied_n && *implied_n != n)
      node.at("n").fail("statistic needs " + std::to_string(*implied_n) + " coordinates");
  } else if (implied_n) {
    n = *implied_n;
  } else {
    node.fail("missing 'n' and the statistic does not imply it");
  }
  if (n == 0) node.fail("model needs at least one coordinate");
  return std::vector<ComponentDistribution>(n, law);
}

std::vector<std::size_t> parse_coords(const Node& node) {
  std::vector<std::size_t> out;
  for (const auto& c : node.items()) {
    const auto v = c.uint();
    if (v == 0) c.fail("coordinates are numbered from 1");
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  return out;
}

std::vector<double> parse_row_csv(const Context& ctx, const Node& node) {
  const Matrix m = rethrow_at(node, [&] { return load_matrix_csv(resolve(ctx, node.string())); });
  return std::vector<double>(m.data().begin(), m.data().end());
}

struct ParsedStatistic {
  std::optional<std::size_t> coordinates;
  std::function<StatisticVector(const ProductModel&)> build;
  std::optional<RunsSpec> runs;      // components filled in later
  std::optional<QuadFormSpec> quadform;
  bool owns_model = false;  // statistic fixes its own model
  std::optional<ProductModel> model;
};

ParsedStatistic parse_statistic(const Context& ctx, const Node& node);

ParsedStatistic parse_generic(const Context& ctx, const Node& node, const std::string& kind) {
  ParsedStatistic out;
  if (kind == "sum") {
    node.allow_only({"kind", "coef"});
    auto coef = node.at("coef").numbers();
    if (coef.empty()) node.at("coef").fail("expected at least one coefficient");
    out.coordinates = coef.size();
    out.build = [coef](const ProductModel& m) { return centered_sum(m, coef); };
  } else if (kind == "product") {
    node.allow_only({"kind", "coords"});
    auto coords = parse_coords(node.at("coords"));
    if (coords.empty()) node.at("coords").fail("expected at least one coordinate");
    out.build = [coords](const ProductModel& m) {
      for (auto c : coords)
        if (c >= m.size()) throw std::invalid_argument("coordinate " + std::to_string(c + 1) + " exceeds n");
      return centered_product(m, coords);
    };
  } else if (kind == "polynomial" || kind == "rademacher-polynomial") {
    node.allow_only({"kind", "terms"});
    std::vector<MultilinearTerm> terms;
    for (const auto& t : node.at("terms").items()) {
      t.allow_only({"coef", "coords"});
      terms.push_back({t.at("coef").number(), t.has("coords") ? parse_coords(t.at("coords")) : std::vector<std::size_t>{}});
    }
    const bool rad = kind == "rademacher-polynomial";
    out.build = [terms, rad, kind](const ProductModel& m) {
      if (rad && !m.is_rademacher()) throw std::invalid_argument("rademacher-polynomial needs Rademacher inputs");
      for (const auto& t : terms)
        for (auto c : t.coords)
          if (c >= m.size()) throw std::invalid_argument("coordinate " + std::to_string(c + 1) + " exceeds n");
      return multilinear_statistic(terms, m.size(), kind);
    };
  } else if (kind == "stack") {
    node.allow_only({"kind", "parts"});
    std::vector<ParsedStatistic> parts;
    for (const auto& p : node.at("parts").items()) {
      auto ps = parse_statistic(ctx, p);
      if (ps.runs || ps.quadform || ps.owns_model) p.fail("runs and quadratic forms cannot be stacked");
      parts.push_back(std::move(ps));
    }
    if (parts.empty()) node.at("parts").fail("expected at least one part");
    for (const auto& p : parts)
      if (p.coordinates) out.coordinates = std::max(out.coordinates.value_or(0), *p.coordinates);
    out.build = [parts](const ProductModel& m) {
      std::vector<StatisticVector> built;
      for (const auto& p : parts) built.push_back(p.build(m));
      return stack(std::move(built));
    };
  } else {
    node.at("kind").fail("unknown statistic kind '" + kind + "'");
  }
  return out;
}

ParsedStatistic parse_statistic(const Context& ctx, const Node& node) {
  node.expect_object();
  const std::string kind = node.at("kind").string();
  ParsedStatistic out;
  if (kind == "bernoulli-runs") {
    node.allow_only({"kind", "n", "d", "p"});
    const auto n = node.at("n").uint();
    const auto d = node.at("d").uint();
    const double p = node.at("p").number();
    RunsSpec spec = rethrow_at(node, [&] { return bernoulli_runs_spec(n, d, p); });
    out.owns_model = true;
    out.model = runs_model(spec);
    out.coordinates = spec.coordinates();
    out.build = [spec](const ProductModel&) { return build_runs_statistic(spec); };
    out.runs = std::move(spec);
    return out;
  }
  if (kind == "runs") {
    node.allow_only({"kind", "n", "m", "a", "a_csv"});
    RunsSpec spec;
    spec.n = node.at("n").uint();
    spec.m = node.at("m").sizes();
    if (spec.m.empty()) node.at("m").fail("expected at least one window length");
    if (node.has("a") == node.has("a_csv")) node.fail("give exactly one of 'a' and 'a_csv'");
    if (node.has("a")) {
      for (const auto& row : node.at("a").items()) spec.a.push_back(row.numbers());
    } else {
      for (const auto& p : node.at("a_csv").items()) spec.a.push_back(parse_row_csv(ctx, p));
    }
    out.coordinates = spec.coordinates();
    out.runs = std::move(spec);
    return out;
  }
  if (kind == "quadform") {
    node.allow_only({"kind", "a", "a_csv"});
    if (node.has("a") == node.has("a_csv")) node.fail("give exactly one of 'a' and 'a_csv'");
    QuadFormSpec spec;
    if (node.has("a")) {
      for (const auto& m : node.at("a").items()) spec.a.push_back(m.matrix());
    } else {
      for (const auto& p : node.at("a_csv").items())
        spec.a.push_back(rethrow_at(p, [&] { return load_matrix_csv(resolve(ctx, p.string())); }));
    }
    if (spec.a.empty()) node.fail("expected at least one coefficient matrix");
    spec.n = spec.a[0].rows();
    out.coordinates = spec.n;
    out.quadform = std::move(spec);
    return out;
  }
  return parse_generic(ctx, node, kind);
}

SmoothTestFunction parse_function(const Node& node) {
  node.allow_only({"t", "phase"});
  const auto t = node.at("t").numbers();
  if (t.empty()) node.at("t").fail("expected a non-empty direction");
  const double phase = node.has("phase") ? node.at("phase").number() : 0.0;
  return make_cosine_family(t, phase);
}

std::vector<SmoothTestFunction> parse_functions(const Node& node) {
  std::vector<SmoothTestFunction> out;
  if (node.raw().is_array()) {
    for (const auto& f : node.items()) out.push_back(parse_function(f));
  } else {
    out.push_back(parse_function(node));
  }
  return out;
}

TargetSpec parse_target(const Node& node) {
  TargetSpec t;
  if (node.raw().is_string()) {
    const auto s = node.string();
    if (s == "exact-covariance") return t;
    if (s == "identity") {
      t.kind = TargetKind::identity;
      return t;
    }
    node.fail("expected \"exact-covariance\", \"identity\" or a matrix");
  }
  t.kind = TargetKind::explicit_matrix;
  t.c = node.matrix();
  if (!t.c.is_square()) node.fail("target covariance must be square");
  if (max_asymmetry(t.c) > 1e-12) node.fail("target covariance must be symmetric");
  return t;
}

InstanceConfig parse_instance(const Context& ctx, const Node& node, std::size_t index) {
  node.allow_only({"id", "model", "statistic", "target", "g"});
  const std::string id = node.has("id") ? node.at("id").string() : "instance-" + std::to_string(index);
  const Node stat_node = node.at("statistic");
  ParsedStatistic ps = parse_statistic(ctx, stat_node);

  std::optional<ProductModel> model;
  if (ps.owns_model) {
    if (node.has("model")) node.at("model").fail("this statistic fixes its own model");
    model = std::move(ps.model);
  } else {
    const auto comps = node.has("model") ? parse_model(node.at("model"), ps.coordinates)
                                         : parse_model(Node(json::object(), node.path() + "/model"), ps.coordinates);
    model.emplace(comps);
  }

  std::optional<StatisticVector> stat;
  if (ps.runs && !ps.owns_model) {
    ps.runs->components = model->components();
    rethrow_at(stat_node, [&] {
      ps.runs->validate();
      return 0;
    });
    stat = build_runs_statistic(*ps.runs);
  } else if (ps.quadform) {
    ps.quadform = rethrow_at(stat_node, [&] {
      return make_quadform_spec(ps.quadform->a, model->components(), ctx.warnings);
    });
    stat = build_quadratic_form(*ps.quadform);
  } else {
    stat = rethrow_at(stat_node, [&] { return ps.build(*model); });
  }
  stat->name = id;

  InstanceConfig inst{id, std::move(*model), std::move(*stat), std::move(ps.runs), std::move(ps.quadform), {}, {}};
  if (node.has("target")) {
    inst.target = parse_target(node.at("target"));
    if (inst.target.kind == TargetKind::explicit_matrix && inst.target.c.rows() != inst.statistic.dim)
      node.at("target").fail("target is " + std::to_string(inst.target.c.rows()) + "x" +
                             std::to_string(inst.target.c.rows()) + " but the statistic has dimension " +
                             std::to_string(inst.statistic.dim));
  }
  if (node.has("g")) {
    inst.functions = parse_functions(node.at("g"));
    for (const auto& f : inst.functions)
      if (f.dim != inst.statistic.dim) node.at("g").fail("test function dimension does not match the statistic");
  }
  return inst;
}

BoundForm parse_form(const Node& node) {
  const auto s = node.string();
  if (s == "l1") return BoundForm::l1;
  if (s == "l2") return BoundForm::l2;
  if (s == "split") return BoundForm::split;
  node.fail("unknown form '" + s + "' (expected l1, l2 or split)");
}

CorpusConfig parse_corpus(const Node& node) {
  node.allow_only({"kind", "count", "seed"});
  CorpusConfig c;
  const auto kind = node.at("kind").string();
  if (kind == "identity") c.kind = CorpusKind::identity;
  else if (kind == "rademacher") c.kind = CorpusKind::rademacher;
  else if (kind == "bound") c.kind = CorpusKind::bound;
  else node.at("kind").fail("unknown corpus '" + kind + "' (expected identity, rademacher or bound)");
  if (node.has("count")) c.count = node.at("count").uint();
  if (node.has("seed")) c.seed = node.at("seed").uint();
  return c;
}

SweepConfig parse_sweep(const Node& node) {
  node.allow_only({"family", "n_grid", "d", "p", "lhs_max_coordinates"});
  SweepConfig s;
  s.family = node.at("family").string();
  if (s.family != "bernoulli-runs" && s.family != "qf-tridiagonal" && s.family != "qf-single-row")
    node.at("family").fail("unknown family '" + s.family +
                           "' (expected bernoulli-runs, qf-tridiagonal or qf-single-row)");
  s.n_grid = node.at("n_grid").sizes();
  if (s.n_grid.empty()) node.at("n_grid").fail("expected at least one n");
  if (node.has("d")) s.d = node.at("d").uint();
  if (node.has("p")) s.p = node.at("p").number();
  if (node.has("lhs_max_coordinates")) s.lhs_max_coordinates = node.at("lhs_max_coordinates").uint();
  return s;
}

CompareRunsConfig parse_compare_runs(const Node& node) {
  node.allow_only({"n", "d", "p", "g2", "g3"});
  CompareRunsConfig c;
  if (node.has("n")) c.n = node.at("n").sizes();
  if (node.has("d")) c.d = node.at("d").sizes();
  if (node.has("p")) c.p = node.at("p").numbers();
  if (node.has("g2")) c.g2 = node.at("g2").number();
  if (node.has("g3")) c.g3 = node.at("g3").number();
  return c;
}

McConfig parse_mc(const Node& node) {
  node.allow_only({"outer_samples", "inner_resamples", "chunk_size", "threads"});
  McConfig mc;
  if (node.has("outer_samples")) mc.outer_samples = node.at("outer_samples").uint();
  if (node.has("inner_resamples")) mc.inner_resamples = node.at("inner_resamples").uint();
  if (node.has("chunk_size")) mc.chunk_size = node.at("chunk_size").uint();
  if (node.has("threads")) mc.threads = static_cast<unsigned>(node.at("threads").uint());
  rethrow_at(node, [&] {
    mc.validate();
    return 0;
  });
  return mc;
}

}  // namespace

EstimationMode parse_mode(const std::string& s) {
  if (s == "exact") return EstimationMode::exact;
  if (s == "mc") return EstimationMode::monte_carlo;
  throw ConfigError("unknown mode '" + s + "' (expected exact or mc)");
}

RunConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir) {
  const Node node(root, "");
  node.allow_only({"command", "seed", "mode", "mc", "alphas", "forms", "g", "instances", "corpus", "sweep",
                   "compare_runs", "output"});
  RunConfig cfg;
  Context ctx{base_dir, &cfg.warnings};
  if (node.has("command")) cfg.command = node.at("command").string();
  if (node.has("seed")) cfg.seed = node.at("seed").uint();
  if (node.has("mode")) {
    const auto m = node.at("mode");
    try {
      cfg.mode = parse_mode(m.string());
    } catch (const ConfigError& e) {
      m.fail(e.what());
    }
  }
  if (node.has("mc")) cfg.mc = parse_mc(node.at("mc"));
  if (node.has("alphas")) {
    const auto a = node.at("alphas");
    cfg.alphas = a.numbers();
    for (double x : *cfg.alphas)
      if (x < 0.0 || x > 1.0) a.fail("alpha must lie in [0, 1]");
  }
  if (node.has("forms")) {
    cfg.forms.clear();
    for (const auto& f : node.at("forms").items()) cfg.forms.push_back(parse_form(f));
  }
  if (node.has("g")) cfg.functions = parse_functions(node.at("g"));
  if (node.has("instances")) {
    cfg.instances_given = true;
    const auto items = node.at("instances").items();
    for (std::size_t i = 0; i < items.size(); ++i) cfg.instances.push_back(parse_instance(ctx, items[i], i));
  }
  if (node.has("corpus")) cfg.corpus = parse_corpus(node.at("corpus"));
  if (node.has("sweep")) cfg.sweep = parse_sweep(node.at("sweep"));
  if (node.has("compare_runs")) cfg.compare_runs = parse_compare_runs(node.at("compare_runs"));
  if (node.has("output")) {
    const auto o = node.at("output");
    o.allow_only({"csv", "svg"});
    if (o.has("csv")) cfg.csv_path = resolve(ctx, o.at("csv").string());
    if (o.has("svg")) cfg.svg_path = resolve(ctx, o.at("svg").string());
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
  return parse_config(root, base_dir);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

}  // namespace mvclt::cli
