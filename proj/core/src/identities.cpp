#include "mvclt/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvclt {

namespace {

constexpr double kPointwiseTol = 1e-10;
constexpr double kIdentityTol = 1e-9;
constexpr double kInequalityTol = 1e-12;

class Collector {
 public:
  explicit Collector(std::string id) : id_(std::move(id)) {}

  void add(const std::string& check, double violation, double tol) {
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    rows_.push_back({check, id_, violation, tol, violation <= tol});
  }

  std::vector<IdentityCheckResult> take() { return std::move(rows_); }

 private:
  std::string id_;
  std::vector<IdentityCheckResult> rows_;
};

double covariance(const RandomVariableTable& u, const RandomVariableTable& v) {
  const double mu = u.expectation();
  const double mv = v.expectation();
  return (u.map([mu](double x) { return x - mu; }) * v.map([mv](double x) { return x - mv; })).expectation();
}

SmoothTestFunction default_chain_rule_function(std::size_t d) {
  std::vector<double> t(d);
  for (std::size_t i = 0; i < d; ++i) t[i] = 0.8 / static_cast<double>(i + 1);
  double tmax = 0.0;
  for (double x : t) tmax = std::max(tmax, std::abs(x));
  SmoothTestFunction f;
  f.dim = d;
  f.name = "cos-ridge";
  f.eval = [t](std::span<const double> x) {
    double s = 0.3;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * x[i];
    return std::cos(s);
  };
  f.grad = [t](std::span<const double> x) {
    double s = 0.3;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * x[i];
    std::vector<double> g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] = -t[i] * std::sin(s);
    return g;
  };
  f.constants.g2_inf = tmax * tmax;
  return f;
}

}  // namespace

RandomVariableTable coordinate_projection(const RandomVariableTable& u, std::size_t k) {
  return cond_exp(cond_exp(u, k + 1, Filtration::past), k, Filtration::future);
}

double additive_residual(const RandomVariableTable& u) {
  const std::size_t n = u.layout().coordinates();
  const double mean = u.expectation();
  std::vector<double> acc(u.size(), -(static_cast<double>(n) - 1.0) * mean);
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = coordinate_projection(u, k);
    for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += p[r];
  }
  return max_abs_difference(u, RandomVariableTable(u.layout_ptr(), std::move(acc)));
}

double covariance_sum(const RandomVariableTable& u, const RandomVariableTable& v, double alpha) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.layout().coordinates(); ++k)
    s += (diff_D(u, k) * d_alpha(v, k, alpha)).expectation();
  return s;
}

std::vector<IdentityCheckResult> run_identity_suite(const JointTable& table, const std::string& instance_id,
                                                    const IdentitySuiteOptions& options) {
  const std::size_t d = table.dim();
  const std::size_t n = table.coordinates();
  const auto small_d = options.overrides.diff_d
                           ? options.overrides.diff_d
                           : std::function<RandomVariableTable(const RandomVariableTable&, std::size_t)>(diff_d);

  std::vector<RandomVariableTable> comps;
  for (std::size_t i = 0; i < d; ++i) comps.push_back(table.component(i));

  // Per-component, per-coordinate operator tables are reused by many checks.
  std::vector<std::vector<RandomVariableTable>> big(d), small(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      big[i].push_back(diff_D(comps[i], k));
      small[i].push_back(small_d(comps[i], k));
    }

  Collector out(instance_id);

  {
    double worst = -std::numeric_limits<double>::infinity();
    double worst_inv = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double cov = covariance(comps[i], comps[j]);
        const double ref = covariance_sum(comps[i], comps[j], 0.5);
        for (double a : options.alphas) {
          const double s = covariance_sum(comps[i], comps[j], a);
          worst = std::max(worst, std::abs(cov - s));
          worst_inv = std::max(worst_inv, std::abs(s - ref));
        }
      }
    out.add("covariance_formula", worst, kIdentityTol);
    out.add("alpha_invariance", worst_inv, kIdentityTol);
  }

  {
    double es = -std::numeric_limits<double>::infinity();
    double es_dd = 0.0;
    double contraction = -std::numeric_limits<double>::infinity();
    double fourth = -std::numeric_limits<double>::infinity();
    double negative = -std::numeric_limits<double>::infinity();
    double sq_identity = 0.0;
    double additive = 0.0;
    bool any_additive = false;
    double scale = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double var = comps[i].variance();
      const double second = comps[i].map([](double x) { return x * x; }).expectation();
      scale = std::max(scale, second);
      double sum_big = 0.0, sum_small = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& dk = big[i][k];
        const auto& sk = small[i][k];
        const auto dk2 = dk * dk;
        const double e_dk2 = dk2.expectation();
        sum_big += e_dk2;
        sum_small += (sk * sk).expectation();
        contraction = std::max(contraction, e_dk2 - second);
        fourth = std::max(fourth, (sk * sk * sk * sk).expectation() - (dk2 * dk2).expectation());
        negative = std::max(negative, -*std::min_element(sk.values().begin(), sk.values().end()));
        const auto rhs = 0.5 * (dk2 + coordinate_expectation(dk2, k));
        sq_identity = std::max(sq_identity, max_abs_difference(sk * sk, rhs));
      }
      es = std::max(es, var - sum_big);
      es_dd = std::max(es_dd, std::abs(sum_big - sum_small));
      if (additive_residual(comps[i]) <= 1e-12 * std::max(1.0, comps[i].max_abs())) {
        any_additive = true;
        additive = std::max(additive, std::abs(var - sum_big));
      }
    }
    out.add("efron_stein", es, kInequalityTol * scale);
    out.add("efron_stein_d_equality", es_dd, kPointwiseTol);
    if (any_additive) out.add("efron_stein_additive_equality", additive, kIdentityTol);
    out.add("d_squared_identity", sq_identity, kPointwiseTol);
    out.add("difference_l2_contraction", contraction, kInequalityTol * scale);
    out.add("d_fourth_moment", fourth, kInequalityTol * scale * scale);
    out.add("d_nonnegative", negative, 0.0);
  }

  {
    double past = 0.0, future = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const auto fk = cond_exp(comps[i], k + 1, Filtration::past);
        const auto fk1 = cond_exp(comps[i], k, Filtration::past);
        const auto inc = fk - fk1;
        past = std::max({past, max_abs_difference(diff_D(fk, k), inc),
                         max_abs_difference(cond_exp(big[i][k], k + 1, Filtration::past), inc)});
        const auto gk = cond_exp(comps[i], k, Filtration::future);
        const auto gk1 = cond_exp(comps[i], k + 1, Filtration::future);
        const auto finc = gk - gk1;
        future = std::max({future, max_abs_difference(diff_D(gk, k), finc),
                           max_abs_difference(cond_exp(big[i][k], k, Filtration::future), finc)});
      }
    out.add("conditional_difference_past", past, kPointwiseTol);
    out.add("conditional_difference_future", future, kPointwiseTol);
  }

  {
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double both = (big[i][k] * big[j][k]).expectation();
          worst = std::max({worst, std::abs((big[i][k] * comps[j]).expectation() - both),
                            std::abs((big[j][k] * comps[i]).expectation() - both)});
        }
    out.add("difference_pairing", worst, kPointwiseTol);
  }

  {
    const SmoothTestFunction f =
        options.chain_rule_function ? *options.chain_rule_function : default_chain_rule_function(d);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, chain_rule_residual_check(table, f, k));
    if (n == 0) worst = 0.0;
    out.add("chain_rule_residual", worst, kIdentityTol);
  }

  {
    const Matrix sigma = moments(table).covariance;
    double mean_gap = 0.0;
    double var_floor = -std::numeric_limits<double>::infinity();
    for (double a : options.alphas) {
      const ZAlpha z = z_alpha_moments(table, a);
      mean_gap = std::max(mean_gap, max_abs(z.mean - sigma));
      for (double v : z.variance.data()) var_floor = std::max(var_floor, -v);
    }
    out.add("z_mean_equals_sigma", mean_gap, kIdentityTol);
    out.add("z_variance_nonnegative", var_floor, kInequalityTol);
  }

  return out.take();
}

}  // namespace mvclt
