#include "mvclt/joint_table.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mvclt/errors.hpp"

namespace mvclt {

namespace {

// Neumaier-compensated accumulator; keeps table reductions accurate to a few
// ulps independent of table size.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_coordinate(const TableLayout& layout, std::size_t k) {
  if (k >= layout.coordinates()) {
    throw std::out_of_range("coordinate " + std::to_string(k) + " out of range for n = " +
                            std::to_string(layout.coordinates()));
  }
}

}  // namespace

std::shared_ptr<const TableLayout> TableLayout::create(const ProductModel& model, std::uint64_t cap) {
  if (!model.all_finite()) {
    throw std::invalid_argument("exact enumeration requires every coordinate to have finite atoms");
  }
  const auto count = model.assignment_count();
  if (!count) throw CapExceededError(std::numeric_limits<std::uint64_t>::max(), cap);
  if (*count > cap) throw CapExceededError(*count, cap);

  std::shared_ptr<TableLayout> layout(new TableLayout(model));
  const std::size_t n = model.size();
  layout->radix_.resize(n);
  layout->stride_.resize(n);
  std::size_t stride = 1;
  for (std::size_t k = n; k-- > 0;) {
    layout->radix_[k] = model[k].atoms().size();
    layout->stride_[k] = stride;
    stride *= layout->radix_[k];
  }
  layout->weights_.assign(static_cast<std::size_t>(*count), 1.0);
  for (std::size_t r = 0; r < layout->weights_.size(); ++r) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) w *= layout->atom_prob(k, layout->digit(r, k));
    layout->weights_[r] = w;
  }
  return layout;
}

std::vector<double> TableLayout::assignment(std::size_t row) const {
  std::vector<double> x(coordinates());
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = coordinate_value(row, k);
  return x;
}

RandomVariableTable::RandomVariableTable(std::shared_ptr<const TableLayout> layout,
                                         std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (!layout_ || values_.size() != layout_->rows()) {
    throw std::invalid_argument("RandomVariableTable: value count does not match layout");
  }
}

double RandomVariableTable::expectation() const {
  CompensatedSum s;
  const auto w = layout_->weights();
  for (std::size_t r = 0; r < values_.size(); ++r) s.add(w[r] * values_[r]);
  return s.value();
}

double RandomVariableTable::variance() const {
  const double mu = expectation();
  CompensatedSum s;
  const auto w = layout_->weights();
  for (std::size_t r = 0; r < values_.size(); ++r) {
    const double c = values_[r] - mu;
    s.add(w[r] * c * c);
  }
  return s.value();
}

double RandomVariableTable::abs_moment(double p) const {
  CompensatedSum s;
  const auto w = layout_->weights();
  for (std::size_t r = 0; r < values_.size(); ++r) s.add(w[r] * std::pow(std::abs(values_[r]), p));
  return s.value();
}

double RandomVariableTable::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <class Op>
RandomVariableTable combine(const RandomVariableTable& a, const RandomVariableTable& b, Op op) {
  if (a.layout_ptr() != b.layout_ptr()) {
    throw std::invalid_argument("RandomVariableTable: operands live on different layouts");
  }
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = op(a[r], b[r]);
  return {a.layout_ptr(), std::move(out)};
}

}  // namespace

RandomVariableTable operator+(const RandomVariableTable& a, const RandomVariableTable& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}
RandomVariableTable operator-(const RandomVariableTable& a, const RandomVariableTable& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}
RandomVariableTable operator*(const RandomVariableTable& a, const RandomVariableTable& b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}
RandomVariableTable operator*(double s, const RandomVariableTable& a) {
  return a.map([s](double x) { return s * x; });
}

double max_abs_difference(const RandomVariableTable& a, const RandomVariableTable& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_difference: size mismatch");
  double m = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) m = std::max(m, std::abs(a[r] - b[r]));
  return m;
}

JointTable::JointTable(std::shared_ptr<const TableLayout> layout, std::size_t dim,
                       std::vector<double> values)
    : layout_(std::move(layout)), dim_(dim), values_(std::move(values)) {
  if (!layout_ || values_.size() != layout_->rows() * dim_) {
    throw std::invalid_argument("JointTable: value count does not match layout");
  }
}

RandomVariableTable JointTable::component(std::size_t i) const {
  if (i >= dim_) throw std::out_of_range("JointTable::component: index out of range");
  std::vector<double> v(rows());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = values_[r * dim_ + i];
  return {layout_, std::move(v)};
}

JointTable build_joint_table(const ProductModel& model, const StatisticVector& f, std::uint64_t cap) {
  f.validate();
  auto layout = TableLayout::create(model, cap);
  const std::size_t rows = layout->rows();
  const std::size_t n = layout->coordinates();
  std::vector<double> values(rows * f.dim);

  std::vector<std::size_t> digits(n, 0);
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = model[k].atoms()[0].value;

  for (std::size_t r = 0; r < rows; ++r) {
    const auto out = f.eval(x);
    if (out.size() != f.dim) {
      throw std::invalid_argument("statistic '" + f.name + "' returned " + std::to_string(out.size()) +
                                  " values, expected " + std::to_string(f.dim));
    }
    for (std::size_t i = 0; i < f.dim; ++i) {
      if (!std::isfinite(out[i])) {
        throw NonFiniteValueError("statistic '" + f.name + "' is not finite at assignment index " +
                                  std::to_string(r) + " (component " + std::to_string(i) + ")");
      }
      values[r * f.dim + i] = out[i];
    }
    // Odometer step: last coordinate fastest.
    for (std::size_t k = n; k-- > 0;) {
      if (++digits[k] < layout->radix(k)) {
        x[k] = model[k].atoms()[digits[k]].value;
        break;
      }
      digits[k] = 0;
      x[k] = model[k].atoms()[0].value;
    }
  }
  return JointTable(std::move(layout), f.dim, std::move(values));
}

Moments moments(const JointTable& table) {
  const std::size_t d = table.dim();
  Moments m;
  m.mean.resize(d);
  std::vector<RandomVariableTable> comps;
  comps.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    comps.push_back(table.component(i));
    m.mean[i] = comps[i].expectation();
  }
  m.covariance = Matrix(d, d);
  const auto w = table.layout().weights();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      CompensatedSum s;
      for (std::size_t r = 0; r < table.rows(); ++r) {
        s.add(w[r] * (comps[i][r] - m.mean[i]) * (comps[j][r] - m.mean[j]));
      }
      const double c = s.value();
      if (!std::isfinite(c)) throw NonFiniteValueError("moments: covariance overflowed");
      m.covariance(i, j) = m.covariance(j, i) = c;
    }
  }
  return m;
}

JointTable centered(const JointTable& table) {
  const auto mean = moments(table).mean;
  const std::size_t d = table.dim();
  std::vector<double> values(table.rows() * d);
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t i = 0; i < d; ++i) values[r * d + i] = table.value(r, i) - mean[i];
  return JointTable(table.layout_ptr(), d, std::move(values));
}

RandomVariableTable coordinate_expectation(const RandomVariableTable& u, std::size_t k) {
  const TableLayout& layout = u.layout();
  require_coordinate(layout, k);
  const std::size_t radix = layout.radix(k);
  std::vector<double> out(u.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    double s = 0.0;
    for (std::size_t a = 0; a < radix; ++a) s += layout.atom_prob(k, a) * u[layout.with_digit(r, k, a)];
    out[r] = s;
  }
  return {u.layout_ptr(), std::move(out)};
}

RandomVariableTable diff_D(const RandomVariableTable& u, std::size_t k) {
  return u - coordinate_expectation(u, k);
}

RandomVariableTable diff_d(const RandomVariableTable& u, std::size_t k) {
  const TableLayout& layout = u.layout();
  require_coordinate(layout, k);
  const std::size_t radix = layout.radix(k);
  std::vector<double> out(u.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    double s = 0.0;
    for (std::size_t a = 0; a < radix; ++a) {
      const double diff = u[r] - u[layout.with_digit(r, k, a)];
      s += layout.atom_prob(k, a) * diff * diff;
    }
    out[r] = std::sqrt(0.5 * s);
  }
  return {u.layout_ptr(), std::move(out)};
}

RandomVariableTable cond_exp(const RandomVariableTable& u, std::size_t boundary, Filtration f) {
  const TableLayout& layout = u.layout();
  const std::size_t n = layout.coordinates();
  const std::size_t rows = layout.rows();
  if (boundary > n) {
    throw std::out_of_range("cond_exp: boundary " + std::to_string(boundary) + " outside [0, " +
                            std::to_string(n) + "]");
  }
  // past: rows sharing a prefix form contiguous blocks; future: rows sharing
  // a suffix are congruent modulo the suffix block size.
  std::size_t groups = 0;
  std::function<std::size_t(std::size_t)> group_of;
  if (f == Filtration::past) {
    const std::size_t block = boundary == 0 ? rows : layout.stride(boundary - 1);
    groups = rows / block;
    group_of = [block](std::size_t r) { return r / block; };
  } else {
    const std::size_t period = boundary == 0 ? rows : layout.stride(boundary - 1);
    groups = period;
    group_of = [period](std::size_t r) { return r % period; };
  }
  std::vector<double> num(groups, 0.0);
  std::vector<double> den(groups, 0.0);
  const auto w = layout.weights();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t g = group_of(r);
    num[g] += w[r] * u[r];
    den[g] += w[r];
  }
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t g = group_of(r);
    out[r] = num[g] / den[g];
  }
  return {u.layout_ptr(), std::move(out)};
}

RandomVariableTable d_alpha(const RandomVariableTable& v, std::size_t k, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("d_alpha: alpha outside [0, 1]");
  require_coordinate(v.layout(), k);
  const auto dv = diff_D(v, k);
  const auto past = cond_exp(dv, k + 1, Filtration::past);
  const auto future = cond_exp(dv, k, Filtration::future);
  return alpha * past + (1.0 - alpha) * future;
}

ZAlpha z_alpha_moments(const JointTable& table, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("z_alpha_moments: alpha outside [0, 1]");
  const std::size_t d = table.dim();
  const std::size_t n = table.coordinates();
  std::vector<RandomVariableTable> comps;
  for (std::size_t i = 0; i < d; ++i) comps.push_back(table.component(i));

  std::vector<std::vector<double>> acc(d * d, std::vector<double>(table.rows(), 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<RandomVariableTable> dk;
    std::vector<RandomVariableTable> dak;
    for (std::size_t i = 0; i < d; ++i) {
      dk.push_back(diff_D(comps[i], k));
      dak.push_back(d_alpha(comps[i], k, alpha));
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        auto& z = acc[i * d + j];
        for (std::size_t r = 0; r < z.size(); ++r) z[r] += dk[i][r] * dak[j][r];
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

std::vector<double> third_abs_moment_sum(const JointTable& table) {
  std::vector<double> out(table.dim(), 0.0);
  for (std::size_t i = 0; i < table.dim(); ++i) {
    const auto fi = table.component(i);
    for (std::size_t k = 0; k < table.coordinates(); ++k) out[i] += diff_D(fi, k).abs_moment(3.0);
  }
  return out;
}

double chain_rule_residual_check(const JointTable& table, const SmoothTestFunction& f, std::size_t k) {
  if (!f.grad) throw std::invalid_argument("chain_rule_residual_check: test function has no gradient");
  if (!f.constants.g2_inf) throw std::invalid_argument("chain_rule_residual_check: missing ||f''||");
  const std::size_t d = table.dim();
  if (f.dim != d) throw std::invalid_argument("chain_rule_residual_check: dimension mismatch");
  require_coordinate(table.layout(), k);

  std::vector<double> fv(table.rows());
  for (std::size_t r = 0; r < fv.size(); ++r) fv[r] = f.eval(table.row(r));
  const auto dk_f = diff_D(RandomVariableTable(table.layout_ptr(), std::move(fv)), k);

  std::vector<RandomVariableTable> big_d;
  std::vector<RandomVariableTable> small_d;
  for (std::size_t i = 0; i < d; ++i) {
    const auto fi = table.component(i);
    big_d.push_back(diff_D(fi, k));
    small_d.push_back(diff_d(fi, k));
  }
  const double g2 = *f.constants.g2_inf;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto grad = f.grad(table.row(r));
    double linear = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      linear += grad[i] * big_d[i][r];
      sq += small_d[i][r] * small_d[i][r];
    }
    const double lhs = std::abs(dk_f[r] - linear);
    // sum_{i,j} [(d F_i)^2 + (d F_j)^2] = 2 d sum_i (d F_i)^2
    const double rhs = 0.5 * g2 * 2.0 * static_cast<double>(d) * sq;
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace mvclt
