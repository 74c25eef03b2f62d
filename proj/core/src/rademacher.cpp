#include "mvclt/rademacher.hpp"

#include <cmath>
#include <stdexcept>

#include "mvclt/errors.hpp"

namespace mvclt {

namespace {

void require_rademacher(const TableLayout& layout, const char* what) {
  if (!is_rademacher(layout.model()))
    throw std::invalid_argument(std::string(what) + ": model is not Rademacher");
}

std::size_t plus_atom(const TableLayout& layout, std::size_t k) {
  return layout.model()[k].atoms()[0].value > 0.0 ? 0 : 1;
}

}  // namespace

bool is_rademacher(const ProductModel& model) { return model.is_rademacher(); }

RandomVariableTable malliavin_derivative(const RandomVariableTable& u, std::size_t k) {
  const TableLayout& layout = u.layout();
  require_rademacher(layout, "malliavin_derivative");
  if (k >= layout.coordinates()) throw std::out_of_range("malliavin_derivative: coordinate out of range");
  const std::size_t plus = plus_atom(layout, k);
  std::vector<double> out(u.size());
  for (std::size_t r = 0; r < out.size(); ++r)
    out[r] = 0.5 * (u[layout.with_digit(r, k, plus)] - u[layout.with_digit(r, k, 1 - plus)]);
  return {u.layout_ptr(), std::move(out)};
}

double malliavin_lemma_residual(const RandomVariableTable& u, std::size_t k) {
  const TableLayout& layout = u.layout();
  const auto dk = malliavin_derivative(u, k);
  const auto big = diff_D(u, k);
  double worst = 0.0;
  for (std::size_t r = 0; r < u.size(); ++r)
    worst = std::max(worst, std::abs(big[r] - layout.coordinate_value(r, k) * dk[r]));
  return worst;
}

ZAlpha t_alpha_matrix(const JointTable& table, double alpha) {
  require_rademacher(table.layout(), "t_alpha_matrix");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("t_alpha_matrix: alpha outside [0, 1]");
  const std::size_t d = table.dim();
  const std::size_t n = table.coordinates();
  std::vector<RandomVariableTable> comps;
  for (std::size_t i = 0; i < d; ++i) comps.push_back(table.component(i));

  std::vector<std::vector<double>> acc(d * d, std::vector<double>(table.rows(), 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<RandomVariableTable> dk, mixed;
    for (std::size_t i = 0; i < d; ++i) {
      dk.push_back(malliavin_derivative(comps[i], k));
      mixed.push_back(alpha * cond_exp(dk.back(), k, Filtration::past) +
                      (1.0 - alpha) * cond_exp(dk.back(), k + 1, Filtration::future));
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        auto& t = acc[i * d + j];
        for (std::size_t r = 0; r < t.size(); ++r) t[r] += dk[i][r] * mixed[j][r];
      }
  }

  ZAlpha out;
  out.alpha = alpha;
  out.dim = d;
  out.mean = Matrix(d, d);
  out.variance = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      out.tables.emplace_back(table.layout_ptr(), std::move(acc[i * d + j]));
      out.mean(i, j) = out.tables.back().expectation();
      out.variance(i, j) = out.tables.back().variance();
    }
  return out;
}

std::vector<double> malliavin_third_moment_sum(const JointTable& table) {
  require_rademacher(table.layout(), "malliavin_third_moment_sum");
  std::vector<double> out(table.dim(), 0.0);
  for (std::size_t i = 0; i < table.dim(); ++i) {
    const auto comp = table.component(i);
    for (std::size_t k = 0; k < table.coordinates(); ++k)
      out[i] += malliavin_derivative(comp, k).abs_moment(3.0);
  }
  return out;
}

RademacherBounds rademacher_bounds(const JointTable& table, const GaussianTarget& target,
                                   const SmoothnessConstants& g, double alpha) {
  auto t = std::make_shared<ZAlpha>(t_alpha_matrix(table, alpha));
  BoundStats stats;
  stats.mode = EstimationMode::exact;
  stats.alpha = alpha;
  stats.dim = table.dim();
  stats.sigma = moments(table).covariance;
  stats.z_mean = t->mean;
  stats.z_var = t->variance;
  stats.third_moment = malliavin_third_moment_sum(table);
  stats.z = std::move(t);

  RademacherBounds out;
  out.d3 = slepian_bound(stats, target, g, BoundForm::l2);
  out.d3.method = BoundMethod::rademacher_d3;
  for (auto& term : out.d3.terms)
    if (term.name == "z_mismatch_l2") term.name = "t_mismatch_l2";

  if (!g.lip || !g.m2) {
    out.d2_reason = "missing ||g||_Lip or M_2(g)";
  } else if (!target.positive_definite()) {
    out.d2_reason = "C-not-PD";
  } else {
    out.d2 = stein_bound(stats, target, g, BoundForm::l2);
    out.d2->method = BoundMethod::rademacher_d2;
    for (auto& term : out.d2->terms)
      if (term.name == "z_mismatch_l2") term.name = "t_mismatch_l2";
  }
  return out;
}

}  // namespace mvclt
