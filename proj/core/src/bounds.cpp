#include "mvclt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvclt/errors.hpp"

namespace mvclt {

const char* to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::stein: return "stein";
    case BoundMethod::slepian: return "slepian";
    case BoundMethod::rademacher_d2: return "rademacher_d2";
    case BoundMethod::rademacher_d3: return "rademacher_d3";
    case BoundMethod::runs: return "runs";
    case BoundMethod::quadratic_form: return "quadratic_form";
  }
  return "?";
}

const char* to_string(BoundForm f) {
  switch (f) {
    case BoundForm::l2: return "l2";
    case BoundForm::l1: return "l1";
    case BoundForm::split: return "split";
  }
  return "?";
}

const char* to_string(EstimationMode m) { return m == EstimationMode::exact ? "exact" : "mc"; }

namespace {

double find_named(const std::vector<NamedValue>& list, const std::string& name) {
  for (const auto& v : list)
    if (v.name == name) return v.value;
  throw std::out_of_range("no entry named '" + name + "'");
}

// Standard error of sqrt(x) from that of x. The first-order term blows up
// near 0, where sqrt(se) is the honest scale.
double sqrt_se(double x, double se) {
  if (se == 0.0) return 0.0;
  const double lin = x > 0.0 ? se / (2.0 * std::sqrt(x)) : se;
  return std::min(lin, std::sqrt(se));
}

struct Assembled {
  double value = 0.0;
  std::optional<double> se;
};

bool has_se(const BoundStats& s) { return s.mode == EstimationMode::monte_carlo && s.sigma_se.has_value(); }

Assembled mismatch_sum(const BoundStats& s, const Matrix& c) {
  Assembled out;
  double se = 0.0;
  for (std::size_t i = 0; i < s.dim; ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      out.value += std::abs(c(i, j) - s.sigma(i, j));
      if (has_se(s)) se += (*s.sigma_se)(i, j);
    }
  if (has_se(s)) out.se = se;
  return out;
}

Assembled sqrt_var_sum(const BoundStats& s) {
  Assembled out;
  double se = 0.0;
  for (std::size_t i = 0; i < s.dim; ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      const double v = std::max(0.0, s.z_var(i, j));
      out.value += std::sqrt(v);
      if (has_se(s)) se += sqrt_se(v, (*s.z_var_se)(i, j));
    }
  if (has_se(s)) out.se = se;
  return out;
}

// sqrt(sum_ij E|C_ij - Z_ij|^2)
Assembled l2_root(const BoundStats& s, const Matrix& c) {
  const Matrix m = s.l2_mismatch(c);
  Assembled out;
  double total = 0.0, se = 0.0;
  for (std::size_t i = 0; i < s.dim; ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      total += m(i, j);
      if (has_se(s))
        se += 2.0 * std::abs(c(i, j) - s.z_mean(i, j)) * (*s.z_mean_se)(i, j) + (*s.z_var_se)(i, j);
    }
  out.value = std::sqrt(total);
  if (has_se(s)) out.se = sqrt_se(total, se);
  return out;
}

Assembled l1_sum(const BoundStats& s, const Matrix& c) {
  const Matrix m = s.l1_mismatch(c);
  const Matrix sq = s.l2_mismatch(c);
  Assembled out;
  double se = 0.0;
  for (std::size_t i = 0; i < s.dim; ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      out.value += m(i, j);
      if (has_se(s)) {
        const double inner =
            2.0 * std::abs(c(i, j) - s.z_mean(i, j)) * (*s.z_mean_se)(i, j) + (*s.z_var_se)(i, j);
        se += sqrt_se(sq(i, j), inner);
      }
    }
  if (has_se(s)) out.se = se;
  return out;
}

Assembled third_sum(const BoundStats& s) {
  Assembled out;
  double se = 0.0;
  for (std::size_t i = 0; i < s.dim; ++i) {
    out.value += s.third_moment[i];
    if (s.third_moment_se) se += (*s.third_moment_se)[i];
  }
  if (s.third_moment_se) out.se = se;
  return out;
}

void check_shapes(const BoundStats& s, const GaussianTarget& target) {
  if (s.dim == 0) throw std::invalid_argument("bound: empty statistics");
  if (target.dim() != s.dim)
    throw std::invalid_argument("bound: target dimension " + std::to_string(target.dim()) +
                                " does not match statistic dimension " + std::to_string(s.dim));
  if (s.third_moment.size() != s.dim) throw std::invalid_argument("bound: third moments have wrong length");
}

void add_term(BoundReport& r, const std::string& name, double coef, const Assembled& a) {
  NamedValue v{name, coef * a.value, std::nullopt};
  if (a.se) v.std_error = coef * *a.se;
  r.terms.push_back(v);
}

void finish(BoundReport& r, const BoundStats& s) {
  r.total = 0.0;
  for (const auto& t : r.terms) r.total += t.value;
  if (s.mode == EstimationMode::monte_carlo) {
    double se = 0.0;
    bool any = false;
    for (const auto& t : r.terms)
      if (t.std_error) {
        se += *t.std_error;
        any = true;
      }
    if (any) r.std_error = se;
  }
  r.bias_caveat = s.bias_caveat;
}

BoundReport base_report(BoundMethod method, BoundForm form, const BoundStats& s) {
  BoundReport r;
  r.method = method;
  r.form = form;
  r.alpha = s.alpha;
  r.mode = s.mode;
  return r;
}

}  // namespace

double BoundReport::term(const std::string& name) const { return find_named(terms, name); }
double BoundReport::constant(const std::string& name) const { return find_named(constants, name); }

Matrix BoundStats::l2_mismatch(const Matrix& c) const {
  Matrix out(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      if (z) {
        const double cij = c(i, j);
        out(i, j) = z->table(i, j).map([cij](double v) { return (cij - v) * (cij - v); }).expectation();
      } else {
        const double diff = c(i, j) - z_mean(i, j);
        out(i, j) = diff * diff + std::max(0.0, z_var(i, j));
      }
    }
  return out;
}

Matrix BoundStats::l1_mismatch(const Matrix& c) const {
  Matrix out(dim, dim);
  if (!z) {
    const Matrix sq = l2_mismatch(c);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) out(i, j) = std::sqrt(sq(i, j));
    return out;
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const double cij = c(i, j);
      out(i, j) = z->table(i, j).map([cij](double v) { return std::abs(cij - v); }).expectation();
    }
  return out;
}

BoundStats exact_stats(const JointTable& table, double alpha) {
  auto z = std::make_shared<ZAlpha>(z_alpha_moments(table, alpha));
  BoundStats s;
  s.mode = EstimationMode::exact;
  s.alpha = alpha;
  s.dim = table.dim();
  s.sigma = moments(table).covariance;
  s.z_mean = z->mean;
  s.z_var = z->variance;
  s.third_moment = third_abs_moment_sum(table);
  s.z = std::move(z);
  return s;
}

BoundStats mc_stats(const McEstimates& est) {
  BoundStats s;
  s.mode = EstimationMode::monte_carlo;
  s.alpha = est.alpha;
  s.dim = est.dim;
  s.sigma = est.sigma;
  s.z_mean = est.z_mean;
  s.z_var = est.z_var;
  s.third_moment = est.third_moment;
  s.sigma_se = est.sigma_se;
  s.z_mean_se = est.z_mean_se;
  s.z_var_se = est.z_var_se;
  s.third_moment_se = est.third_moment_se;
  s.bias_caveat = est.bias_caveat;
  return s;
}

BoundReport stein_bound(const BoundStats& stats, const GaussianTarget& target, const SmoothnessConstants& g,
                        BoundForm form) {
  check_shapes(stats, target);
  if (!g.lip || !g.m2) throw std::invalid_argument("stein_bound: needs ||g||_Lip and M_2(g)");
  if (form == BoundForm::l1) throw std::invalid_argument("stein_bound: the L1 form is not available");
  if (!target.positive_definite())
    throw HypothesisError("C-not-PD", "stein_bound: target covariance is not positive definite");

  const double op = target.op_norm();
  const double inv = *target.inv_op_norm();
  const double d = static_cast<double>(stats.dim);
  const double b1 = inv * std::sqrt(op) * *g.lip;
  const double b2 = kSqrtTwoPi / 4.0 * std::pow(inv, 1.5) * op * *g.m2 * d * d;

  BoundReport r = base_report(BoundMethod::stein, form, stats);
  r.constants = {{"B1", b1, std::nullopt},
                 {"B2", b2, std::nullopt},
                 {"op_norm", op, std::nullopt},
                 {"inv_op_norm", inv, std::nullopt}};
  const Matrix& c = target.covariance();
  if (form == BoundForm::l2) {
    add_term(r, "z_mismatch_l2", b1, l2_root(stats, c));
  } else {
    add_term(r, "covariance_mismatch", b1, mismatch_sum(stats, c));
    add_term(r, "variance_term", b1, sqrt_var_sum(stats));
  }
  add_term(r, "third_moment_term", b2, third_sum(stats));
  finish(r, stats);
  return r;
}

BoundReport slepian_bound(const BoundStats& stats, const GaussianTarget& target, const SmoothnessConstants& g,
                          BoundForm form) {
  check_shapes(stats, target);
  if (!g.g2_inf || !g.g3_inf) throw std::invalid_argument("slepian_bound: needs ||g''|| and ||g'''||");

  const double d = static_cast<double>(stats.dim);
  const double b3 = *g.g2_inf / 2.0;
  const double b4 = *g.g3_inf * d * d / 3.0;

  BoundReport r = base_report(BoundMethod::slepian, form, stats);
  r.constants = {{"B3", b3, std::nullopt}, {"B4", b4, std::nullopt}};
  const Matrix& c = target.covariance();
  switch (form) {
    case BoundForm::l1:
      add_term(r, "z_mismatch_l1", b3, l1_sum(stats, c));
      break;
    case BoundForm::l2:
      // Cauchy-Schwarz over the d^2 entries: sum E|C - Z| <= d (sum E|C - Z|^2)^{1/2}.
      add_term(r, "z_mismatch_l2", b3 * d, l2_root(stats, c));
      break;
    case BoundForm::split:
      add_term(r, "covariance_mismatch", b3, mismatch_sum(stats, c));
      add_term(r, "variance_term", b3, sqrt_var_sum(stats));
      break;
  }
  add_term(r, "third_moment_term", b4, third_sum(stats));
  finish(r, stats);
  return r;
}

}  // namespace mvclt
