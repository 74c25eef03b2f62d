#include "mvclt/runs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvclt/joint_table.hpp"

namespace mvclt {

namespace {

double sum_pow(const std::vector<double>& a, double p) {
  double s = 0.0;
  for (double x : a) s += std::pow(std::abs(x), p);
  return s;
}

// a^(j) for the window containing k that starts at i, or 0 outside [0, n).
struct Window {
  std::size_t start;
  double coef;
};

std::vector<Window> windows_through(const RunsSpec& spec, std::size_t j, std::size_t k) {
  std::vector<Window> out;
  const std::size_t m = spec.m[j];
  const std::size_t lo = k + 1 >= m ? k + 1 - m : 0;
  const std::size_t hi = std::min(k, spec.n - 1);
  for (std::size_t i = lo; i <= hi && i < spec.n; ++i) out.push_back({i, spec.a[j][i]});
  return out;
}

}  // namespace

void RunsSpec::validate() const {
  if (n == 0) throw std::invalid_argument("runs: n must be positive");
  if (m.empty()) throw std::invalid_argument("runs: need at least one run length");
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] == 0) throw std::invalid_argument("runs: run lengths must be positive");
    if (j > 0 && m[j] < m[j - 1]) throw std::invalid_argument("runs: run lengths must be nondecreasing");
  }
  if (a.size() != m.size())
    throw std::invalid_argument("runs: expected " + std::to_string(m.size()) + " coefficient arrays, got " +
                                std::to_string(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].size() != n)
      throw std::invalid_argument("runs: coefficient array " + std::to_string(j) + " has length " +
                                  std::to_string(a[j].size()) + ", expected " + std::to_string(n));
    for (double x : a[j])
      if (!std::isfinite(x)) throw std::invalid_argument("runs: non-finite coefficient");
  }
  if (components.size() != coordinates())
    throw std::invalid_argument("runs: expected " + std::to_string(coordinates()) + " component laws, got " +
                                std::to_string(components.size()));
  for (const auto& c : components)
    if (!c.has_moments()) throw std::invalid_argument("runs: component '" + c.name() + "' has no moments");
}

ProductModel runs_model(const RunsSpec& spec) {
  spec.validate();
  return ProductModel(spec.components);
}

StatisticVector build_runs_statistic(const RunsSpec& spec) {
  spec.validate();
  auto s = std::make_shared<const RunsSpec>(spec);
  std::vector<double> mu;
  for (const auto& c : spec.components) mu.push_back(c.mean());
  auto means = std::make_shared<const std::vector<double>>(std::move(mu));

  StatisticVector f;
  f.dim = spec.dim();
  f.name = "runs";
  f.eval = [s, means](std::span<const double> x) {
    std::vector<double> out(s->dim(), 0.0);
    for (std::size_t j = 0; j < s->dim(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < s->n; ++i) {
        double px = 1.0, pm = 1.0;
        for (std::size_t t = i; t < i + s->m[j]; ++t) {
          px *= x[t];
          pm *= (*means)[t];
        }
        acc += s->a[j][i] * (px - pm);
      }
      out[j] = acc;
    }
    return out;
  };

  // sum over windows w through k of a_w prod_{t in w, t != k} y_t (x_k - mu_k),
  // where y_t is x_t, or mu_t for coordinates integrated out.
  auto diff = [s, means](std::size_t k, std::span<const double> x, int keep) {
    std::vector<double> out(s->dim(), 0.0);
    if (k >= s->coordinates()) throw std::out_of_range("runs closed_diff: coordinate out of range");
    const double centered = x[k] - (*means)[k];
    for (std::size_t j = 0; j < s->dim(); ++j) {
      double acc = 0.0;
      for (const Window& w : windows_through(*s, j, k)) {
        double prod = w.coef;
        for (std::size_t t = w.start; t < w.start + s->m[j]; ++t) {
          if (t == k) continue;
          const bool integrated = (keep > 0 && t > k) || (keep < 0 && t < k);
          prod *= integrated ? (*means)[t] : x[t];
        }
        acc += prod;
      }
      out[j] = acc * centered;
    }
    return out;
  };
  f.closed_diff = [diff](std::size_t k, std::span<const double> x) { return diff(k, x, 0); };
  f.closed_cond_diff = [diff](std::size_t k, std::span<const double> x, Filtration fl) {
    return diff(k, x, fl == Filtration::past ? 1 : -1);
  };
  return f;
}

RunsMomentMaxima runs_moment_maxima(const RunsSpec& spec) {
  spec.validate();
  RunsMomentMaxima out;
  for (const auto& c : spec.components) {
    out.x1 = std::max(out.x1, c.abs_moment(3));
    out.x2 = std::max(out.x2, c.central_abs_moment(3));
    out.y1 = std::max(out.y1, c.abs_moment(4));
    out.y2 = std::max(out.y2, c.central_abs_moment(4));
  }
  return out;
}

BoundReport runs_bound(const RunsSpec& spec, const SmoothnessConstants& g) {
  if (!g.g2_inf || !g.g3_inf) throw std::invalid_argument("runs_bound: needs ||g''|| and ||g'''||");
  const RunsMomentMaxima mm = runs_moment_maxima(spec);
  const double d = static_cast<double>(spec.dim());
  double var_sum = 0.0, third_sum = 0.0;
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const double m = static_cast<double>(spec.m[i]);
    const double m3 = m * m * m;
    var_sum += m3 * std::sqrt(std::pow(mm.y1, m - 1.0) * mm.y2 * sum_pow(spec.a[i], 4.0));
    third_sum += m3 * std::pow(mm.x1, m - 1.0) * mm.x2 * sum_pow(spec.a[i], 3.0);
  }
  const double c_var = std::sqrt(2.0) * *g.g2_inf * d;
  const double c_third = *g.g3_inf * d * d / 3.0;

  BoundReport r;
  r.method = BoundMethod::runs;
  r.form = BoundForm::split;
  r.alpha = 1.0;
  r.mode = EstimationMode::exact;
  r.constants = {{"variance_coefficient", c_var, std::nullopt},
                 {"third_moment_coefficient", c_third, std::nullopt},
                 {"x1", mm.x1, std::nullopt},
                 {"x2", mm.x2, std::nullopt},
                 {"y1", mm.y1, std::nullopt},
                 {"y2", mm.y2, std::nullopt}};
  r.terms = {{"variance_term", c_var * var_sum, std::nullopt},
             {"third_moment_term", c_third * third_sum, std::nullopt}};
  r.total = r.terms[0].value + r.terms[1].value;
  r.note = "target covariance is the exact covariance of F";
  return r;
}

Matrix runs_exact_covariance(const RunsSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  const std::size_t coords = spec.coordinates();
  std::vector<double> mu(coords), second(coords);
  for (std::size_t t = 0; t < coords; ++t) {
    mu[t] = spec.components[t].mean();
    second[t] = spec.components[t].abs_moment(2);
  }
  Matrix cov(d, d);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = p; q < d; ++q) {
      const std::size_t mp = spec.m[p], mq = spec.m[q];
      double acc = 0.0;
      for (std::size_t i = 0; i < spec.n; ++i) {
        // Windows [i, i+mp) and [l, l+mq) overlap iff l < i+mp and i < l+mq.
        const std::size_t lo = i + 1 >= mq ? i + 1 - mq : 0;
        const std::size_t hi = std::min(spec.n, i + mp);
        for (std::size_t l = lo; l < hi; ++l) {
          const std::size_t a = std::min(i, l);
          const std::size_t b = std::max(i + mp, l + mq);
          double joint = 1.0, separate = 1.0;
          for (std::size_t t = a; t < b; ++t) {
            const bool in_p = t >= i && t < i + mp;
            const bool in_q = t >= l && t < l + mq;
            if (in_p && in_q) {
              joint *= second[t];
              separate *= mu[t] * mu[t];
            } else {
              joint *= mu[t];
              separate *= mu[t];
            }
          }
          acc += spec.a[p][i] * spec.a[q][l] * (joint - separate);
        }
      }
      cov(p, q) = acc;
      cov(q, p) = acc;
    }
  return cov;
}

double runs_variance_bound(const RunsSpec& spec, std::size_t i, std::size_t j) {
  const RunsMomentMaxima mm = runs_moment_maxima(spec);
  auto part = [&](std::size_t c) {
    const double m = static_cast<double>(spec.m.at(c));
    return std::pow(m, 6.0) * std::pow(mm.y1, m - 1.0) * mm.y2 * sum_pow(spec.a[c], 4.0);
  };
  return 2.0 * (part(i) + part(j));
}

RunsSpec bernoulli_runs_spec(std::size_t n, std::size_t d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli runs: p must lie in (0, 1)");
  if (n == 0 || d == 0) throw std::invalid_argument("bernoulli runs: n and d must be positive");
  RunsSpec s;
  s.n = n;
  for (std::size_t j = 1; j <= d; ++j) {
    s.m.push_back(j);
    const double coef = 1.0 / std::sqrt(static_cast<double>(n) * std::pow(p, static_cast<double>(j)) * (1.0 - p));
    s.a.emplace_back(n, coef);
  }
  s.components.assign(n + d - 1, bernoulli(p));
  return s;
}

Matrix bernoulli_sigma_formula(std::size_t d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli runs: p must lie in (0, 1)");
  Matrix out(d, d);
  for (std::size_t i = 1; i <= d; ++i)
    for (std::size_t j = 1; j <= d; ++j) {
      const double gap = static_cast<double>(i > j ? i - j : j - i);
      double s = 0.0;
      for (std::size_t k = 0; k < std::min(i, j); ++k) {
        const double kk = static_cast<double>(k);
        s += (gap + 1.0 + 2.0 * kk) * std::pow(p, kk);
      }
      out(i - 1, j - 1) = std::pow(p, gap / 2.0) * s;
    }
  return out;
}

namespace {

double bernoulli_denominator(std::size_t n, std::size_t d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli runs: p must lie in (0, 1)");
  const double q = 1.0 - p;
  return std::sqrt(std::pow(p, static_cast<double>(d)) * q * q * q * static_cast<double>(n));
}

}  // namespace

double reinert_rollin_bound(std::size_t n, std::size_t d, double p, double g2, double g3) {
  const double dd = static_cast<double>(d);
  return (416.0 * std::pow(dd, 3.5) * g2 + 960.0 * std::pow(dd, 5.0) * g3) / bernoulli_denominator(n, d, p);
}

double improved_bernoulli_bound(std::size_t n, std::size_t d, double p, double g2, double g3) {
  const double dd = static_cast<double>(d);
  return (2.0 * std::sqrt(2.0) * std::pow(dd, 4.0) * g2 + 2.0 / 3.0 * std::pow(dd, 5.0) * g3) /
         bernoulli_denominator(n, d, p);
}

BernoulliRunsSuite bernoulli_runs_suite(std::size_t n, std::size_t d, double p, const SmoothnessConstants& g,
                                        std::uint64_t enumeration_cap) {
  if (!g.g2_inf || !g.g3_inf) throw std::invalid_argument("bernoulli_runs_suite: needs ||g''|| and ||g'''||");
  const RunsSpec spec = bernoulli_runs_spec(n, d, p);
  BernoulliRunsSuite out;
  out.sigma_formula = bernoulli_sigma_formula(d, p);
  out.sigma_exact = runs_exact_covariance(spec);
  out.formula_gap = max_abs(out.sigma_formula - out.sigma_exact);
  const auto count = runs_model(spec).assignment_count();
  if (count && *count <= enumeration_cap)
    out.sigma_enumerated = moments(build_joint_table(runs_model(spec), build_runs_statistic(spec))).covariance;
  out.improved_bound = improved_bernoulli_bound(n, d, p, *g.g2_inf, *g.g3_inf);
  out.reinert_rollin = reinert_rollin_bound(n, d, p, *g.g2_inf, *g.g3_inf);
  out.specialized = runs_bound(spec, g);
  out.specialized_within_improved = out.specialized.total <= out.improved_bound + 1e-12;
  out.improved_within_reinert_rollin = out.improved_bound <= out.reinert_rollin;
  const double dd = static_cast<double>(d);
  out.improved_expected_to_win = 2.0 * std::sqrt(2.0) * std::pow(dd, 4.0) <= 416.0 * std::pow(dd, 3.5);
  return out;
}

}  // namespace mvclt
