#include "mvclt/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "mvclt/errors.hpp"
#include "mvclt/rademacher.hpp"
#include "mvclt/rng.hpp"

namespace mvclt {

namespace {

std::string format_vector(const std::vector<double>& v) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4g", v[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct BatchMean {
  double mean = 0.0;
  double se = 0.0;
};

BatchMean batch_mean(const std::vector<double>& sums, const std::vector<std::uint64_t>& counts) {
  double total = 0.0;
  std::uint64_t n = 0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    total += sums[b];
    n += counts[b];
  }
  BatchMean out;
  out.mean = total / static_cast<double>(n);
  if (sums.size() < 2) {
    out.se = std::numeric_limits<double>::infinity();
    return out;
  }
  double ss = 0.0;
  double wsum = 0.0;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    const double w = static_cast<double>(counts[b]);
    const double dev = sums[b] / w - out.mean;
    ss += w * dev * dev;
    wsum += w;
  }
  const double batches = static_cast<double>(sums.size());
  // Weighted batch-means variance of the pooled mean.
  out.se = std::sqrt(ss / wsum / (batches - 1.0));
  return out;
}

// Mean of `draw()` over cfg.outer_samples draws in chunks; each chunk owns an
// independent stream keyed by its index.
template <class Draw>
BatchMean chunked_mean(const McConfig& cfg, Draw&& draw) {
  cfg.validate();
  const std::uint64_t chunks = (cfg.outer_samples + cfg.chunk_size - 1) / cfg.chunk_size;
  std::vector<double> sums(chunks, 0.0);
  std::vector<std::uint64_t> counts(chunks, 0);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    RandomStream rng(cfg.seed, c);
    const std::uint64_t lo = c * cfg.chunk_size;
    const std::uint64_t hi = std::min(cfg.outer_samples, lo + cfg.chunk_size);
    for (std::uint64_t s = lo; s < hi; ++s) {
      const double v = draw(rng);
      if (!std::isfinite(v))
        throw NonFiniteValueError("non-finite Monte Carlo sample (seed " + std::to_string(cfg.seed) + ", chunk " +
                                  std::to_string(c) + ", counter " + std::to_string(rng.counter()) + ")");
      sums[c] += v;
    }
    counts[c] = hi - lo;
  }
  return batch_mean(sums, counts);
}

double quadrature_value(const SmoothTestFunction& g, const GaussianTarget& target, std::size_t nodes) {
  const Matrix& factor = target.spectral_factor();
  const std::size_t d = factor.rows();
  const std::size_t r = factor.cols();
  std::vector<double> y(d, 0.0);
  if (r == 0) return g.eval(y);

  std::vector<double> x, w;
  gauss_hermite(nodes, x, w);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
  const double root2 = std::sqrt(2.0);
  std::vector<std::size_t> idx(r, 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t a = 0; a < r; ++a) {
      weight *= w[idx[a]] * inv_sqrt_pi;
      const double z = root2 * x[idx[a]];
      for (std::size_t i = 0; i < d; ++i) y[i] += factor(i, a) * z;
    }
    total += weight * g.eval(y);
    std::size_t a = 0;
    while (a < r && ++idx[a] == nodes) idx[a++] = 0;
    if (a == r) break;
  }
  return total;
}

}  // namespace

SmoothTestFunction make_cosine_family(std::vector<double> t, double phase) {
  if (t.empty()) throw std::invalid_argument("cosine family: empty direction");
  double norm2 = 0.0, tmax = 0.0;
  for (double x : t) {
    if (!std::isfinite(x)) throw std::invalid_argument("cosine family: non-finite direction");
    norm2 += x * x;
    tmax = std::max(tmax, std::abs(x));
  }
  SmoothTestFunction g;
  g.dim = t.size();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", phase);
  g.name = "cos[t=" + format_vector(t) + ";phase=" + buf + "]";
  g.constants.lip = std::sqrt(norm2);
  g.constants.m2 = norm2;
  g.constants.g1_inf = tmax;
  g.constants.g2_inf = tmax * tmax;
  g.constants.g3_inf = tmax * tmax * tmax;
  g.eval = [t, phase](std::span<const double> x) { return std::cos(dot(t, x) + phase); };
  g.grad = [t, phase](std::span<const double> x) {
    const double s = -std::sin(dot(t, x) + phase);
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] * s;
    return out;
  };
  g.gaussian_mean = [t, phase](const Matrix& c) {
    double q = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j) q += t[i] * c(i, j) * t[j];
    return std::cos(phase) * std::exp(-0.5 * q);
  };
  return g;
}

SmoothTestFunction make_quadratic_function(const Matrix& m) {
  if (!m.is_square()) throw std::invalid_argument("quadratic function: matrix is not square");
  SmoothTestFunction g;
  g.dim = m.rows();
  g.name = "quadratic";
  double entry = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) entry = std::max(entry, std::abs(m(i, j) + m(j, i)));
  g.constants.g2_inf = entry;
  g.constants.g3_inf = 0.0;
  g.eval = [m](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) s += x[i] * m(i, j) * x[j];
    return s;
  };
  g.grad = [m](std::span<const double> x) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) out[i] += (m(i, j) + m(j, i)) * x[j];
    return out;
  };
  g.gaussian_mean = [m](const Matrix& c) { return trace_of_product(m, c); };
  return g;
}

const char* to_string(GaussianMethod m) {
  switch (m) {
    case GaussianMethod::analytic: return "analytic";
    case GaussianMethod::quadrature: return "quadrature";
    case GaussianMethod::monte_carlo: return "mc";
  }
  return "?";
}

void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw std::invalid_argument("gauss_hermite: need at least one node");
  constexpr double pim4 = 0.7511255444649424828587030047762276930510;  // pi^{-1/4}
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double nn = static_cast<double>(n);
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * nn + 1.0) - 1.85575 * std::pow(2.0 * nn + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(nn, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * nodes[1];
    else
      z = 2.0 * z - nodes[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jj = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / jj) * p2 - std::sqrt((jj - 1.0) / jj) * p3;
      }
      pp = std::sqrt(2.0 * nn) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

ValueWithError gaussian_expectation(const SmoothTestFunction& g, const GaussianTarget& target,
                                    GaussianMethod method, const GaussianParams& params) {
  if (g.dim != target.dim()) throw std::invalid_argument("gaussian_expectation: dimension mismatch");
  ValueWithError out;
  out.method = to_string(method);
  switch (method) {
    case GaussianMethod::analytic:
      if (!g.gaussian_mean) throw std::invalid_argument("gaussian_expectation: '" + g.name + "' has no closed form");
      out.value = g.gaussian_mean(target.covariance());
      return out;
    case GaussianMethod::quadrature: {
      if (target.spectral_factor().cols() > 3)
        throw std::invalid_argument("gaussian_expectation: quadrature supports at most 3 active dimensions");
      if (params.nodes < 2) throw std::invalid_argument("gaussian_expectation: need at least 2 nodes");
      out.value = quadrature_value(g, target, params.nodes);
      out.error = std::abs(out.value - quadrature_value(g, target, params.nodes / 2));
      return out;
    }
    case GaussianMethod::monte_carlo: {
      const Matrix& factor = target.spectral_factor();
      const BatchMean bm = chunked_mean(params.mc, [&](RandomStream& rng) {
        std::vector<double> y(factor.rows(), 0.0);
        for (std::size_t a = 0; a < factor.cols(); ++a) {
          const double z = rng.normal();
          for (std::size_t i = 0; i < y.size(); ++i) y[i] += factor(i, a) * z;
        }
        return g.eval(y);
      });
      out.value = bm.mean;
      out.error = bm.se;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

ValueWithError gaussian_expectation_auto(const SmoothTestFunction& g, const GaussianTarget& target,
                                         const GaussianParams& params) {
  if (g.gaussian_mean) return gaussian_expectation(g, target, GaussianMethod::analytic, params);
  if (target.spectral_factor().cols() <= 3)
    return gaussian_expectation(g, target, GaussianMethod::quadrature, params);
  return gaussian_expectation(g, target, GaussianMethod::monte_carlo, params);
}

DiscrepancyResult discrepancy_exact(const JointTable& table, const SmoothTestFunction& g,
                                    const GaussianTarget& target, const GaussianParams& params) {
  if (g.dim != table.dim()) throw std::invalid_argument("discrepancy: test function dimension mismatch");
  DiscrepancyResult out;
  std::vector<double> vals(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) vals[r] = g.eval(table.row(r));
  out.statistic_side.value = RandomVariableTable(table.layout_ptr(), std::move(vals)).expectation();
  out.statistic_side.method = "exact";
  out.gaussian_side = gaussian_expectation_auto(g, target, params);
  out.lhs = std::abs(out.statistic_side.value - out.gaussian_side.value);
  out.lhs_error = out.gaussian_side.error;
  return out;
}

DiscrepancyResult discrepancy(const ProductModel& model, const StatisticVector& f, const SmoothTestFunction& g,
                              const GaussianTarget& target, EstimationMode mode, const GaussianParams& params) {
  f.validate();
  if (mode == EstimationMode::exact) {
    if (!model.all_finite())
      throw std::invalid_argument("discrepancy: exact mode needs every coordinate to have finitely many atoms");
    return discrepancy_exact(build_joint_table(model, f), g, target, params);
  }
  DiscrepancyResult out;
  const BatchMean bm = chunked_mean(params.mc, [&](RandomStream& rng) {
    std::vector<double> x(model.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = model[k].draw(rng);
    const auto fx = f.eval(x);
    if (fx.size() != f.dim) throw std::invalid_argument("discrepancy: statistic returned the wrong dimension");
    return g.eval(fx);
  });
  out.statistic_side = {bm.mean, bm.se, "mc"};
  out.gaussian_side = gaussian_expectation_auto(g, target, params);
  out.lhs = std::abs(out.statistic_side.value - out.gaussian_side.value);
  out.lhs_error = out.statistic_side.error + out.gaussian_side.error;
  return out;
}

ConstantsProbe probe_constants(const SmoothTestFunction& g, std::uint64_t seed, std::size_t probes,
                               double spread) {
  ConstantsProbe out;
  out.probes = probes;
  const std::size_t d = g.dim;
  RandomStream rng(seed, 0);
  auto point = [&] {
    std::vector<double> x(d);
    for (double& v : x) v = spread * (2.0 * rng.uniform() - 1.0);
    return x;
  };
  auto pick = [&] { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(d)) % d; };
  auto shifted = [](std::vector<double> x, std::size_t i, double h) {
    x[i] += h;
    return x;
  };
  auto ratio = [](std::optional<double>& slot, double observed, const std::optional<double>& declared) {
    if (!declared) return;
    const double r = *declared > 0.0 ? observed / *declared : (observed > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
    slot = std::max(slot.value_or(0.0), r);
  };

  const double h2 = 1e-3, h3 = 1e-2;
  for (std::size_t p = 0; p < probes; ++p) {
    const auto x = point();
    const auto y = point();
    double dist2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) dist2 += (x[i] - y[i]) * (x[i] - y[i]);
    const double dist = std::sqrt(dist2);
    if (dist > 0.0) {
      ratio(out.lip_ratio, std::abs(g.eval(x) - g.eval(y)) / dist, g.constants.lip);
      if (g.grad) {
        const auto gx = g.grad(x);
        const auto gy = g.grad(y);
        double gd = 0.0;
        for (std::size_t i = 0; i < d; ++i) gd += (gx[i] - gy[i]) * (gx[i] - gy[i]);
        ratio(out.m2_ratio, std::sqrt(gd) / dist, g.constants.m2);
      }
    }
    const std::size_t i = pick(), j = pick(), k = pick();
    auto second = [&](const std::vector<double>& z, double h) {
      return (g.eval(shifted(shifted(z, i, h), j, h)) - g.eval(shifted(shifted(z, i, h), j, -h)) -
              g.eval(shifted(shifted(z, i, -h), j, h)) + g.eval(shifted(shifted(z, i, -h), j, -h))) /
             (4.0 * h * h);
    };
    ratio(out.g2_ratio, std::abs(second(x, h2)), g.constants.g2_inf);
    const double third = (second(shifted(x, k, h3), h3) - second(shifted(x, k, -h3), h3)) / (2.0 * h3);
    ratio(out.g3_ratio, std::abs(third), g.constants.g3_inf);
  }
  for (const auto& r : {out.lip_ratio, out.m2_ratio, out.g2_ratio, out.g3_ratio})
    if (r && *r > 1.0 + 1e-6) out.pass = false;
  return out;
}

std::vector<SmoothTestFunction> default_cosine_functions(std::size_t d) {
  const double root = std::sqrt(static_cast<double>(d));
  std::vector<SmoothTestFunction> out;
  out.push_back(make_cosine_family(std::vector<double>(d, 1.0 / root), 0.0));
  out.push_back(make_cosine_family(std::vector<double>(d, 2.0 / root), 0.4));
  std::vector<double> e(d, 0.0);
  e[0] = 1.5;
  out.push_back(make_cosine_family(e, 1.1));
  std::vector<double> alt(d);
  for (std::size_t i = 0; i < d; ++i) alt[i] = (i % 2 ? -1.2 : 1.2) / root;
  out.push_back(make_cosine_family(alt, -0.6));
  return out;
}

namespace {

BoundCheckRow make_row(const BoundCheckInstance& inst, const SmoothTestFunction& g, const DiscrepancyResult& disc,
                       const std::string& method, const std::string& form, double alpha) {
  BoundCheckRow row;
  row.instance_id = inst.id;
  row.function = g.name;
  row.method = method;
  row.form = form;
  row.alpha = alpha;
  row.lhs = disc.lhs;
  row.lhs_error = disc.lhs_error;
  return row;
}

void settle(BoundCheckRow& row, double total) {
  row.total = total;
  row.slack = total - row.lhs;
  row.pass = row.lhs <= total + row.lhs_error + 1e-9;
}

void not_applicable(BoundCheckRow& row, const std::string& why) {
  row.applicable = false;
  row.status = why;
  row.pass = true;
}

std::vector<BoundCheckRow> check_instance(const BoundCheckInstance& inst, const BoundCheckOptions& opt) {
  std::vector<BoundCheckRow> rows;
  const JointTable table = centered(build_joint_table(inst.model, inst.statistic));
  const Matrix exact_cov = moments(table).covariance;
  const bool exact_target = !inst.target.has_value();
  const GaussianTarget target(inst.target ? *inst.target : exact_cov);
  const auto functions = opt.functions.empty() ? default_cosine_functions(table.dim()) : opt.functions;
  const bool rademacher_model = inst.model.is_rademacher();

  std::vector<BoundStats> stats;
  for (double a : opt.alphas) stats.push_back(exact_stats(table, a));

  for (const auto& g : functions) {
    const DiscrepancyResult disc = discrepancy_exact(table, g, target, opt.gaussian);
    for (std::size_t ai = 0; ai < opt.alphas.size(); ++ai) {
      const double alpha = opt.alphas[ai];
      for (BoundForm form : opt.forms) {
        auto row = make_row(inst, g, disc, "slepian", to_string(form), alpha);
        settle(row, slepian_bound(stats[ai], target, g.constants, form).total);
        rows.push_back(row);
        if (form == BoundForm::l1) continue;
        auto srow = make_row(inst, g, disc, "stein", to_string(form), alpha);
        try {
          settle(srow, stein_bound(stats[ai], target, g.constants, form).total);
        } catch (const HypothesisError& e) {
          not_applicable(srow, e.code());
        }
        rows.push_back(srow);
      }
      if (rademacher_model) {
        const auto rb = rademacher_bounds(table, target, g.constants, alpha);
        auto r3 = make_row(inst, g, disc, "rademacher_d3", "l2", alpha);
        settle(r3, rb.d3.total);
        rows.push_back(r3);
        auto r2 = make_row(inst, g, disc, "rademacher_d2", "l2", alpha);
        if (rb.d2)
          settle(r2, rb.d2->total);
        else
          not_applicable(r2, rb.d2_reason);
        rows.push_back(r2);

        // The cosine function scaled to the unit d3 class gives a lower
        // bound on the distance itself.
        const double scale = std::max({*g.constants.g1_inf, *g.constants.g2_inf, *g.constants.g3_inf, 1e-300});
        const auto unit = rademacher_bounds(table, target, SmoothnessConstants::unit(), alpha);
        auto dist = make_row(inst, g, disc, "d3_distance", "l2", alpha);
        dist.lhs = disc.lhs / scale;
        dist.lhs_error = disc.lhs_error / scale;
        settle(dist, unit.d3.total);
        rows.push_back(dist);
      }
    }
    if (inst.runs) {
      auto row = make_row(inst, g, disc, "runs", "split", 1.0);
      if (exact_target)
        settle(row, runs_bound(*inst.runs, g.constants).total);
      else
        not_applicable(row, "target is not the covariance of F");
      rows.push_back(row);
    }
    if (inst.quadform) {
      auto row = make_row(inst, g, disc, "quadratic_form", "split", 0.5);
      settle(row, qf_bound(*inst.quadform, target, g.constants).total);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::vector<BoundCheckRow> bound_check_suite(const std::vector<BoundCheckInstance>& instances,
                                             const BoundCheckOptions& options) {
  std::vector<std::vector<BoundCheckRow>> results(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, instances.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        results[i] = check_instance(instances[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<BoundCheckRow> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.insert(out.end(), results[i].begin(), results[i].end());
  }
  return out;
}

}  // namespace mvclt
