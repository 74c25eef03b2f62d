#include "mvclt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvclt {

namespace {

std::size_t below(RandomStream& rng, std::size_t bound) {
  return static_cast<std::size_t>(rng.next_u64() % bound);
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t size, RandomStream& rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t k = 0; k < n; ++k) all[k] = k;
  for (std::size_t k = 0; k < size; ++k) std::swap(all[k], all[k + below(rng, n - k)]);
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

BoundCheckInstance plain(std::string id, ProductModel model, StatisticVector f) {
  return BoundCheckInstance{std::move(id), std::move(model), std::move(f), std::nullopt, std::nullopt, std::nullopt};
}

}  // namespace

StatisticVector multilinear_statistic(std::vector<MultilinearTerm> terms, std::size_t n, std::string name) {
  for (const auto& t : terms)
    for (std::size_t k : t.coords)
      if (k >= n) throw std::invalid_argument("multilinear term uses coordinate " + std::to_string(k) +
                                              " of an n=" + std::to_string(n) + " model");
  StatisticVector f;
  f.dim = 1;
  f.name = std::move(name);
  f.eval = [terms = std::move(terms)](std::span<const double> x) {
    double s = 0.0;
    for (const auto& t : terms) {
      double p = t.coef;
      for (std::size_t k : t.coords) p *= x[k];
      s += p;
    }
    return std::vector<double>{s};
  };
  return f;
}

std::vector<MultilinearTerm> random_multilinear(std::size_t n, std::size_t max_degree, RandomStream& rng) {
  const std::size_t count = 1 + below(rng, 5);
  std::vector<MultilinearTerm> terms;
  double l1 = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t degree = below(rng, std::min(max_degree, n) + 1);
    MultilinearTerm term;
    term.coef = 2.0 * rng.uniform() - 1.0;
    term.coords = random_subset(n, degree, rng);
    l1 += std::abs(term.coef);
    terms.push_back(std::move(term));
  }
  for (auto& t : terms) t.coef /= l1;
  return terms;
}

ComponentDistribution random_finite_law(std::size_t max_atoms, RandomStream& rng) {
  const std::size_t count = 1 + below(rng, max_atoms);
  std::vector<Atom> atoms;
  double total = 0.0;
  while (atoms.size() < count) {
    // Quarter-grid values keep atoms distinct and exactly representable.
    const double v = (static_cast<double>(below(rng, 17)) - 8.0) / 4.0;
    if (std::any_of(atoms.begin(), atoms.end(), [v](const Atom& a) { return a.value == v; })) continue;
    const double w = 0.2 + rng.uniform();
    atoms.push_back({v, w});
    total += w;
  }
  for (auto& a : atoms) a.prob /= total;
  return ComponentDistribution::from_atoms(std::move(atoms), "random");
}

std::vector<CorpusInstance> identity_corpus(std::size_t count, std::uint64_t seed, std::size_t max_n,
                                            std::size_t max_atoms) {
  std::vector<CorpusInstance> out;
  {
    RandomStream rng(seed, 1u << 20);
    std::vector<ComponentDistribution> laws;
    for (int k = 0; k < 4; ++k) laws.push_back(random_finite_law(3, rng));
    ProductModel model(laws);
    // Additive statistic: sum of univariate functions, where Efron-Stein is an equality.
    StatisticVector additive;
    additive.dim = 1;
    additive.name = "additive";
    additive.eval = [](std::span<const double> x) {
      return std::vector<double>{x[0] * x[0] - 0.5 * x[1] + std::abs(x[2]) + 0.25 * x[3] * x[3] * x[3]};
    };
    out.push_back({"structured-additive", model,
                   stack({additive, centered_product(model, {0, 1, 3})}, "additive+product")});
    out.push_back({"structured-degenerate", ProductModel({ComponentDistribution::from_atoms({{3.0, 1.0}}),
                                                           laws[0], laws[1]}),
                   stack({multilinear_statistic({{1.0, {0, 1}}, {0.5, {2}}}, 3),
                          multilinear_statistic({{1.0, {0}}}, 3)})});
  }
  for (std::size_t i = 0; out.size() < count; ++i) {
    RandomStream rng(seed, i);
    const std::size_t n = 1 + below(rng, max_n);
    std::vector<ComponentDistribution> laws;
    for (std::size_t k = 0; k < n; ++k) laws.push_back(random_finite_law(max_atoms, rng));
    auto u = multilinear_statistic(random_multilinear(n, 3, rng), n, "U");
    auto v = multilinear_statistic(random_multilinear(n, 3, rng), n, "V");
    out.push_back({"random-" + std::to_string(i), ProductModel(std::move(laws)), stack({u, v}, "U,V")});
  }
  if (out.size() > count) out.erase(out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
  return out;
}

std::vector<CorpusInstance> rademacher_corpus(std::size_t random_count, std::uint64_t seed) {
  std::vector<CorpusInstance> out;
  const auto r = [](std::size_t n) { return ProductModel::iid(rademacher(), n); };
  out.push_back({"x1", r(1), multilinear_statistic({{1.0, {0}}}, 1)});
  out.push_back({"x1x2", r(2), multilinear_statistic({{1.0, {0, 1}}}, 2)});
  out.push_back({"x1+x1x2", r(2), multilinear_statistic({{1.0, {0}}, {1.0, {0, 1}}}, 2)});
  out.push_back({"x1x2x3", r(3), multilinear_statistic({{1.0, {0, 1, 2}}}, 3)});
  out.push_back({"sum5", r(5), centered_sum(r(5), std::vector<double>(5, 1.0 / std::sqrt(5.0)))});
  out.push_back({"pair", r(2), stack({multilinear_statistic({{1.0, {0}}}, 2), multilinear_statistic({{1.0, {1}}}, 2)})});
  out.push_back({"sum-and-product", r(4),
                 stack({centered_sum(r(4), std::vector<double>(4, 0.5)), centered_product(r(4), {0, 1, 2, 3})})});
  for (std::size_t i = 0; i < random_count; ++i) {
    RandomStream rng(seed, i);
    const std::size_t n = 1 + below(rng, 6);
    const std::size_t d = 1 + below(rng, 2);
    std::vector<StatisticVector> parts;
    for (std::size_t j = 0; j < d; ++j) parts.push_back(multilinear_statistic(random_multilinear(n, 3, rng), n));
    out.push_back({"rademacher-random-" + std::to_string(i), r(n), stack(std::move(parts), "poly")});
  }
  return out;
}

std::vector<BoundCheckInstance> runs_instances() {
  std::vector<BoundCheckInstance> out;
  auto add = [&](std::string id, RunsSpec spec) {
    BoundCheckInstance inst = plain(std::move(id), runs_model(spec), build_runs_statistic(spec));
    inst.runs = std::move(spec);
    out.push_back(std::move(inst));
  };
  add("runs-bernoulli-n3-d2-p0.5", bernoulli_runs_spec(3, 2, 0.5));
  add("runs-bernoulli-n6-d1-p0.3", bernoulli_runs_spec(6, 1, 0.3));
  add("runs-bernoulli-n8-d3-p0.6", bernoulli_runs_spec(8, 3, 0.6));
  add("runs-bernoulli-n10-d2-p0.2", bernoulli_runs_spec(10, 2, 0.2));
  {
    RunsSpec s;
    s.n = 5;
    s.m = {1, 3};
    s.a = {{0.5, -0.2, 0.7, 0.1, -0.4}, {0.3, 0.3, -0.6, 0.2, 0.9}};
    for (int k = 0; k < 7; ++k) s.components.push_back(k % 2 ? bernoulli(0.35) : rademacher());
    add("runs-mixed-m1-m3", std::move(s));
  }
  {
    RunsSpec s;
    s.n = 9;
    s.m = {2, 2, 4};
    RandomStream rng(77, 0);
    for (int j = 0; j < 3; ++j) {
      std::vector<double> a(9);
      for (double& x : a) x = 2.0 * rng.uniform() - 1.0;
      s.a.push_back(a);
    }
    for (int k = 0; k < 12; ++k)
      s.components.push_back(ComponentDistribution::from_atoms({{-0.5, 0.3}, {1.5, 0.7}}, "two-point"));
    add("runs-two-point-m2-m2-m4", std::move(s));
  }
  return out;
}

std::vector<BoundCheckInstance> quadform_instances() {
  std::vector<BoundCheckInstance> out;
  auto add = [&](std::string id, QuadFormSpec spec) {
    BoundCheckInstance inst = plain(std::move(id), quadform_model(spec), build_quadratic_form(spec));
    inst.quadform = std::move(spec);
    out.push_back(std::move(inst));
  };
  add("qf-n2", tridiagonal_family(2));
  add("qf-tridiagonal-n6", tridiagonal_family(6));
  add("qf-single-row-n7", single_row_family(7));
  for (std::size_t i = 0; i < 3; ++i) {
    RandomStream rng(1234, i);
    const std::size_t n = 4 + 3 * i;  // 4, 7, 10
    const std::size_t d = 1 + i % 2;
    QuadFormSpec s;
    s.n = n;
    for (std::size_t c = 0; c < d; ++c) {
      Matrix a(n, n);
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) a(u, v) = a(v, u) = (2.0 * rng.uniform() - 1.0) / std::sqrt(double(n));
      s.a.push_back(a);
    }
    for (std::size_t u = 0; u < n; ++u)
      s.components.push_back(u % 2 ? standardized_two_point(0.3) : rademacher());
    add("qf-random-n" + std::to_string(n) + "-d" + std::to_string(d), std::move(s));
  }
  return out;
}

std::vector<BoundCheckInstance> default_bound_instances() {
  std::vector<BoundCheckInstance> out;
  const auto r = [](std::size_t n) { return ProductModel::iid(rademacher(), n); };
  out.push_back(plain("x1x2", r(2), multilinear_statistic({{1.0, {0, 1}}}, 2, "x1*x2")));
  out.push_back(plain("sum4", r(4), centered_sum(r(4), std::vector<double>(4, 0.5))));
  out.push_back(plain("pair", r(2), stack({multilinear_statistic({{1.0, {0}}}, 2), multilinear_statistic({{1.0, {1}}}, 2)})));
  {
    BoundCheckInstance fixed = plain("x1x2-unit-target", r(2), multilinear_statistic({{1.0, {0, 1}}}, 2));
    fixed.target = Matrix{{1.0}};
    out.push_back(std::move(fixed));
  }
  for (const auto& c : rademacher_corpus(6, 99)) out.push_back(plain("rad-" + c.id, c.model, c.statistic));
  for (const auto& c : identity_corpus(8, 2024, 5, 3)) out.push_back(plain("gen-" + c.id, c.model, c.statistic));
  for (auto& inst : runs_instances()) out.push_back(std::move(inst));
  for (auto& inst : quadform_instances()) out.push_back(std::move(inst));
  return out;
}

std::vector<CorpusInstance> mc_corpus(std::size_t count, std::uint64_t seed) {
  std::vector<CorpusInstance> out;
  const auto r = [](std::size_t n) { return ProductModel::iid(rademacher(), n); };
  out.push_back({"x1x2", r(2), multilinear_statistic({{1.0, {0, 1}}}, 2)});
  out.push_back({"sum10", r(10), centered_sum(r(10), std::vector<double>(10, 1.0 / std::sqrt(10.0)))});
  {
    const RunsSpec s = bernoulli_runs_spec(4, 2, 0.4);
    out.push_back({"runs-bernoulli", runs_model(s), build_runs_statistic(s)});
  }
  {
    const QuadFormSpec s = tridiagonal_family(5);
    out.push_back({"qf-tridiagonal", quadform_model(s), build_quadratic_form(s)});
  }
  for (std::size_t i = 0; out.size() < count; ++i) {
    RandomStream rng(seed, i);
    const std::size_t n = 2 + below(rng, 4);
    std::vector<ComponentDistribution> laws;
    for (std::size_t k = 0; k < n; ++k) laws.push_back(random_finite_law(3, rng));
    auto u = multilinear_statistic(random_multilinear(n, 3, rng), n, "U");
    auto v = multilinear_statistic(random_multilinear(n, 3, rng), n, "V");
    out.push_back({"mc-random-" + std::to_string(i), ProductModel(std::move(laws)), stack({u, v})});
  }
  if (out.size() > count) out.erase(out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
  return out;
}

}  // namespace mvclt
