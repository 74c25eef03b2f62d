#include "mvclt/quadforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mvclt {

namespace {

constexpr double kStructureTol = 1e-12;

// Nonzero (column, value) pairs of each row.
using SparseRows = std::vector<std::vector<std::pair<std::size_t, double>>>;

SparseRows sparse_rows(const Matrix& a) {
  SparseRows rows(a.rows());
  for (std::size_t u = 0; u < a.rows(); ++u)
    for (std::size_t v = 0; v < a.cols(); ++v)
      if (a(u, v) != 0.0) rows[u].push_back({v, a(u, v)});
  return rows;
}

std::vector<double> row_square_sums(const Matrix& a) {
  std::vector<double> r(a.rows(), 0.0);
  for (std::size_t u = 0; u < a.rows(); ++u)
    for (double x : a.row(u)) r[u] += x * x;
  return r;
}

}  // namespace

void QuadFormSpec::validate() const {
  if (n == 0) throw std::invalid_argument("quadform: n must be positive");
  if (a.empty()) throw std::invalid_argument("quadform: need at least one coefficient matrix");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string tag = "quadform: matrix " + std::to_string(i);
    if (a[i].rows() != n || a[i].cols() != n)
      throw std::invalid_argument(tag + " is not " + std::to_string(n) + "x" + std::to_string(n));
    if (max_asymmetry(a[i]) > kStructureTol) throw std::invalid_argument(tag + " is not symmetric");
    for (std::size_t u = 0; u < n; ++u)
      if (std::abs(a[i](u, u)) > kStructureTol) throw std::invalid_argument(tag + " has a nonzero diagonal");
    for (double x : a[i].data())
      if (!std::isfinite(x)) throw std::invalid_argument(tag + " has a non-finite entry");
  }
  if (components.size() != n)
    throw std::invalid_argument("quadform: expected " + std::to_string(n) + " component laws, got " +
                                std::to_string(components.size()));
  for (std::size_t u = 0; u < n; ++u) {
    const auto& c = components[u];
    if (!c.has_moments()) {
      if (!max_var_square || !max_fourth_moment)
        throw std::invalid_argument("quadform: component " + std::to_string(u) +
                                    " has no moments and no moment maxima were supplied");
      continue;
    }
    if (std::abs(c.mean()) > kStructureTol || std::abs(c.variance() - 1.0) > kStructureTol)
      throw std::invalid_argument("quadform: component " + std::to_string(u) + " ('" + c.name() +
                                  "') must have mean 0 and variance 1");
  }
}

double QuadFormSpec::var_square_max() const {
  if (max_var_square) return *max_var_square;
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, c.variance_of_square());
  return m;
}

double QuadFormSpec::fourth_moment_max() const {
  if (max_fourth_moment) return *max_fourth_moment;
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, c.abs_moment(4));
  return m;
}

Matrix symmetrize_upper(const Matrix& a, std::vector<std::string>* warnings) {
  if (!a.is_square()) throw std::invalid_argument("symmetrize_upper: matrix is not square");
  Matrix out = a;
  bool lower_present = false;
  bool disagrees = false;
  for (std::size_t u = 0; u < a.rows(); ++u)
    for (std::size_t v = 0; v < u; ++v) {
      if (a(u, v) != 0.0) lower_present = true;
      if (std::abs(a(u, v) - a(v, u)) > kStructureTol) disagrees = true;
      out(u, v) = a(v, u);
    }
  if (lower_present && disagrees && warnings)
    warnings->push_back("coefficient matrix lower triangle disagrees with upper triangle; using upper");
  return out;
}

QuadFormSpec make_quadform_spec(std::vector<Matrix> a, std::vector<ComponentDistribution> components,
                                std::vector<std::string>* warnings) {
  QuadFormSpec s;
  for (auto& m : a) s.a.push_back(symmetrize_upper(m, warnings));
  s.n = s.a.empty() ? 0 : s.a.front().rows();
  s.components = std::move(components);
  s.validate();
  return s;
}

ProductModel quadform_model(const QuadFormSpec& spec) {
  spec.validate();
  return ProductModel(spec.components);
}

StatisticVector build_quadratic_form(const QuadFormSpec& spec) {
  spec.validate();
  auto rows = std::make_shared<std::vector<SparseRows>>();
  for (const auto& m : spec.a) rows->push_back(sparse_rows(m));
  const std::size_t d = spec.dim();

  StatisticVector f;
  f.dim = d;
  f.name = "quadform";
  f.eval = [rows, d](std::span<const double> x) {
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      const auto& r = (*rows)[i];
      for (std::size_t u = 0; u < r.size(); ++u)
        for (const auto& [v, a] : r[u])
          if (v > u) acc += a * x[u] * x[v];
      out[i] = acc;
    }
    return out;
  };
  // D_k F_i = x_k sum_v a_kv x_v; its past (future) conditional expectation
  // keeps only v < k (v > k).
  auto diff = [rows, d](std::size_t k, std::span<const double> x, int keep) {
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& r = (*rows)[i];
      if (k >= r.size()) throw std::out_of_range("quadform closed_diff: coordinate out of range");
      double s = 0.0;
      for (const auto& [v, a] : r[k])
        if (keep == 0 || (keep > 0 && v < k) || (keep < 0 && v > k)) s += a * x[v];
      out[i] = x[k] * s;
    }
    return out;
  };
  f.closed_diff = [diff](std::size_t k, std::span<const double> x) { return diff(k, x, 0); };
  f.closed_cond_diff = [diff](std::size_t k, std::span<const double> x, Filtration fl) {
    return diff(k, x, fl == Filtration::past ? 1 : -1);
  };
  return f;
}

QfConditions qf_conditions(const QuadFormSpec& spec, const Matrix& c) {
  spec.validate();
  const std::size_t d = spec.dim();
  const std::size_t n = spec.n;
  if (c.rows() != d || c.cols() != d) throw std::invalid_argument("qf_conditions: C has the wrong shape");

  QfConditions out;
  out.pairwise_covariance = Matrix(d, d);
  out.trace_condition = Matrix(d, d);
  out.trace_condition_matrix = Matrix(d, d);
  out.covariance_gap = Matrix(d, d);

  std::vector<SparseRows> rows;
  std::vector<Matrix> squares;
  for (const auto& m : spec.a) {
    rows.push_back(sparse_rows(m));
    squares.push_back(m * m);
  }

  for (std::size_t i = 0; i < d; ++i) {
    const auto r = row_square_sums(spec.a[i]);
    out.max_row_condition.push_back(*std::max_element(r.begin(), r.end()));
    out.dejong_tr_a4.push_back(trace_of_product(squares[i], squares[i]));
  }

  Matrix b(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double pc = 0.0;
      for (std::size_t u = 0; u < n; ++u)
        for (const auto& [v, a] : rows[i][u])
          if (v > u) pc += a * spec.a[j](u, v);
      out.pairwise_covariance(i, j) = pc;
      out.covariance_gap(i, j) = std::abs(c(i, j) - pc);

      // b_uv = sum_k a^(i)_ku a^(j)_kv, accumulated row by row of the sum over k.
      std::fill(b.data().begin(), b.data().end(), 0.0);
      for (std::size_t k = 0; k < n; ++k)
        for (const auto& [u, x] : rows[i][k])
          for (const auto& [v, y] : rows[j][k]) b(u, v) += x * y;
      double direct = 0.0;
      for (double x : b.data()) direct += x * x;
      out.trace_condition(i, j) = direct;
      const double via_matrix = trace_of_product(squares[i], squares[j]);
      out.trace_condition_matrix(i, j) = via_matrix;
      out.trace_route_gap =
          std::max(out.trace_route_gap, std::abs(direct - via_matrix) / std::max(1.0, std::abs(direct)));
    }
  return out;
}

BoundReport qf_bound(const QuadFormSpec& spec, const GaussianTarget& target, const SmoothnessConstants& g) {
  if (!g.g2_inf || !g.g3_inf) throw std::invalid_argument("qf_bound: needs ||g''|| and ||g'''||");
  const std::size_t d = spec.dim();
  if (target.dim() != d) throw std::invalid_argument("qf_bound: target dimension mismatch");
  const QfConditions cond = qf_conditions(spec, target.covariance());
  const double var_sq = spec.var_square_max();
  const double fourth = spec.fourth_moment_max();
  const double g2 = *g.g2_inf;
  const double g3 = *g.g3_inf;
  const double dd = static_cast<double>(d);
  const double root8 = 2.0 * std::sqrt(2.0);  // 2^{3/2}

  std::vector<std::vector<double>> r;
  for (const auto& m : spec.a) r.push_back(row_square_sums(m));

  double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      t0 += cond.covariance_gap(i, j);
      t1 += std::sqrt(std::max(2.0, var_sq) * cond.trace_condition(i, j));
      double cross = 0.0;
      for (std::size_t k = 0; k < spec.n; ++k) cross += r[i][k] * r[j][k];
      t2 += std::sqrt(8.0 * var_sq * fourth * cross);
    }
  for (std::size_t i = 0; i < d; ++i)
    for (double x : r[i]) t3 += std::pow(x, 1.5);

  BoundReport rep;
  rep.method = BoundMethod::quadratic_form;
  rep.form = BoundForm::split;
  rep.alpha = 0.5;
  rep.mode = EstimationMode::exact;
  rep.constants = {{"half_g2", g2 / 2.0, std::nullopt},
                   {"g2_over_2_3_2", g2 / root8, std::nullopt},
                   {"third_moment_coefficient", root8 * fourth * g3 * dd * dd / 3.0, std::nullopt},
                   {"max_var_square", var_sq, std::nullopt},
                   {"max_fourth_moment", fourth, std::nullopt}};
  rep.terms = {{"covariance_mismatch", g2 / 2.0 * t0, std::nullopt},
               {"Z_star_variance", g2 / root8 * t1, std::nullopt},
               {"Z_ast_variance", g2 / root8 * t2, std::nullopt},
               {"third_moment", root8 * fourth * g3 * dd * dd / 3.0 * t3, std::nullopt}};
  for (const auto& t : rep.terms) rep.total += t.value;
  return rep;
}

QfZDecomposition qf_z_decomposition(const JointTable& table, const QuadFormSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  const std::size_t n = spec.n;
  if (table.coordinates() != n || table.dim() != d)
    throw std::invalid_argument("qf_z_decomposition: table does not match the spec");
  const TableLayout& layout = table.layout();
  std::vector<std::vector<double>> ast(d * d, std::vector<double>(table.rows(), 0.0));
  std::vector<std::vector<double>> star(d * d, std::vector<double>(table.rows(), 0.0));
  std::vector<double> s(d);
  for (std::size_t row = 0; row < table.rows(); ++row) {
    const auto x = layout.assignment(row);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        s[i] = 0.0;
        for (std::size_t v = 0; v < n; ++v) s[i] += spec.a[i](k, v) * x[v];
      }
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double p = s[i] * s[j];
          star[i * d + j][row] += p;
          ast[i * d + j][row] += (x[k] * x[k] - 1.0) * p;
        }
    }
  }
  QfZDecomposition out;
  out.dim = d;
  for (std::size_t c = 0; c < d * d; ++c) {
    out.ast.emplace_back(table.layout_ptr(), std::move(ast[c]));
    out.star.emplace_back(table.layout_ptr(), std::move(star[c]));
  }
  return out;
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const double mm = static_cast<double>(m);
  const double den = mm * sxx - sx * sx;
  if (den <= 0.0) return std::nullopt;
  return (mm * sxy - sx * sy) / den;
}

QfSweep qf_clt_sweep(const QfFamily& family, const Matrix& c, const SmoothnessConstants& g,
                     const std::vector<std::size_t>& n_grid) {
  const GaussianTarget target(c);
  QfSweep out;
  std::vector<double> ns, totals, traces, rowmax;
  for (std::size_t n : n_grid) {
    try {
      const QuadFormSpec spec = family(n);
      const QfConditions cond = qf_conditions(spec, c);
      QfSweepRow row;
      row.n = n;
      row.report = qf_bound(spec, target, g);
      row.covariance_gap = max_abs(cond.covariance_gap);
      row.trace_max = max_abs(cond.trace_condition);
      row.row_max = *std::max_element(cond.max_row_condition.begin(), cond.max_row_condition.end());
      row.dejong_max = *std::max_element(cond.dejong_tr_a4.begin(), cond.dejong_tr_a4.end());
      ns.push_back(static_cast<double>(n));
      totals.push_back(row.report.total);
      traces.push_back(row.trace_max);
      rowmax.push_back(row.row_max);
      out.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      out.failures.push_back("n=" + std::to_string(n) + ": " + e.what());
    }
  }
  out.slope = log_log_slope(ns, totals);
  const auto trace_slope = log_log_slope(ns, traces);
  const auto row_slope = log_log_slope(ns, rowmax);
  out.converging = trace_slope && row_slope && *trace_slope < -0.1 && *row_slope < -0.1;
  return out;
}

QuadFormSpec tridiagonal_family(std::size_t n) {
  if (n < 2) throw std::invalid_argument("tridiagonal family needs n >= 2");
  const double c = 1.0 / std::sqrt(static_cast<double>(n - 1));
  Matrix a(n, n);
  for (std::size_t u = 0; u + 1 < n; ++u) a(u, u + 1) = a(u + 1, u) = c;
  QuadFormSpec s;
  s.n = n;
  s.a = {std::move(a)};
  s.components.assign(n, rademacher());
  return s;
}

QuadFormSpec single_row_family(std::size_t n) {
  if (n < 2) throw std::invalid_argument("single-row family needs n >= 2");
  const double c = 1.0 / std::sqrt(static_cast<double>(n - 1));
  Matrix a(n, n);
  for (std::size_t v = 1; v < n; ++v) a(0, v) = a(v, 0) = c;
  QuadFormSpec s;
  s.n = n;
  s.a = {std::move(a)};
  s.components.assign(n, rademacher());
  return s;
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("matrix file '" + path + "' is empty");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t u = 0; u < rows.size(); ++u)
    for (std::size_t v = 0; v < rows[u].size(); ++v) out(u, v) = rows[u][v];
  return out;
}

}  // namespace mvclt
