#include "mvclt/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "mvclt/errors.hpp"
#include "mvclt/rng.hpp"

namespace mvclt {

void McConfig::validate() const {
  if (outer_samples == 0) throw std::invalid_argument("McConfig: outer_samples must be positive");
  if (inner_resamples == 0) throw std::invalid_argument("McConfig: inner_resamples must be positive");
  if (chunk_size == 0) throw std::invalid_argument("McConfig: chunk_size must be positive");
}

namespace {

struct Accumulator {
  std::uint64_t count = 0;
  std::vector<double> f, ff, zbar, zbar2, zpair, third;

  explicit Accumulator(std::size_t d)
      : f(d), ff(d * d), zbar(d * d), zbar2(d * d), zpair(d * d), third(d) {}

  void merge(const Accumulator& o) {
    count += o.count;
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(f, o.f);
    add(ff, o.ff);
    add(zbar, o.zbar);
    add(zbar2, o.zbar2);
    add(zpair, o.zpair);
    add(third, o.third);
  }
};

// Flattened point estimates, in a fixed order, so batch statistics can be
// taken uniformly.
struct Point {
  std::vector<double> mean, sigma, z_mean, z_var, third;
};

Point estimate(const Accumulator& a, std::size_t d) {
  const double n = static_cast<double>(a.count);
  const double bessel = a.count > 1 ? n / (n - 1.0) : 1.0;
  Point p;
  p.mean.resize(d);
  for (std::size_t i = 0; i < d; ++i) p.mean[i] = a.f[i] / n;
  p.sigma.resize(d * d);
  p.z_mean.resize(d * d);
  p.z_var.resize(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t ij = i * d + j;
      p.sigma[ij] = (a.ff[ij] / n - p.mean[i] * p.mean[j]) * bessel;
      const double zm = a.zbar[ij] / n;
      p.z_mean[ij] = zm;
      const double spread = (a.zbar2[ij] / n - zm * zm) * bessel;
      // E[Z'Z''] - (mean)^2, with the squared-mean bias added back.
      p.z_var[ij] = a.zpair[ij] / n - zm * zm + spread / n;
    }
  p.third.resize(d);
  for (std::size_t i = 0; i < d; ++i) p.third[i] = a.third[i] / n;
  return p;
}

class OuterSampler {
 public:
  OuterSampler(const ProductModel& model, const StatisticVector& f, double alpha, std::uint64_t inner)
      : model_(model), f_(f), alpha_(alpha), inner_(inner), n_(model.size()), d_(f.dim) {}

  void run_chunk(std::uint64_t seed, std::uint64_t chunk, std::uint64_t samples, Accumulator& acc) const {
    RandomStream rng(seed, chunk);
    std::vector<double> x(n_);
    std::vector<double> z0(d_ * d_), z1(d_ * d_);
    for (std::uint64_t s = 0; s < samples; ++s) {
      const std::uint64_t counter = rng.counter();
      for (std::size_t k = 0; k < n_; ++k) x[k] = model_[k].draw(rng);
      const auto fx = f_.eval(x);
      for (std::size_t i = 0; i < d_; ++i) {
        if (!std::isfinite(fx[i])) {
          throw NonFiniteValueError("non-finite statistic value in Monte Carlo (seed " + std::to_string(seed) +
                                    ", chunk " + std::to_string(chunk) + ", counter " +
                                    std::to_string(counter) + ")");
        }
      }
      std::fill(z0.begin(), z0.end(), 0.0);
      std::fill(z1.begin(), z1.end(), 0.0);
      for (std::size_t k = 0; k < n_; ++k) {
        const auto a0 = diff_at(x, fx, k, rng, inner_);
        const auto b0 = weighted_cond(x, k, rng);
        const bool exact = diff_exact(k) && cond_exact(k);
        const auto a1 = diff_exact(k) ? a0 : diff_at(x, fx, k, rng, inner_);
        const auto b1 = exact ? b0 : weighted_cond(x, k, rng);
        for (std::size_t i = 0; i < d_; ++i) {
          for (std::size_t j = 0; j < d_; ++j) {
            z0[i * d_ + j] += a0[i] * b0[j];
            z1[i * d_ + j] += a1[i] * b1[j];
          }
          acc.third[i] += std::pow(std::abs(a0[i]), 3);
        }
      }
      ++acc.count;
      for (std::size_t i = 0; i < d_; ++i) {
        acc.f[i] += fx[i];
        for (std::size_t j = 0; j < d_; ++j) acc.ff[i * d_ + j] += fx[i] * fx[j];
      }
      for (std::size_t ij = 0; ij < d_ * d_; ++ij) {
        const double zb = 0.5 * (z0[ij] + z1[ij]);
        acc.zbar[ij] += zb;
        acc.zbar2[ij] += zb * zb;
        acc.zpair[ij] += z0[ij] * z1[ij];
      }
    }
  }

  bool diff_exact(std::size_t k) const { return static_cast<bool>(f_.closed_diff) || model_[k].is_finite(); }

  bool cond_exact(std::size_t k) const {
    if (f_.closed_cond_diff) return true;
    if (!diff_exact(k)) return false;
    return enumerable(k + 1, n_) && enumerable(0, k);
  }

 private:
  // Free coordinates [lo, hi) can be summed exactly within the inner budget.
  bool enumerable(std::size_t lo, std::size_t hi) const {
    std::uint64_t count = 1;
    for (std::size_t c = lo; c < hi; ++c) {
      if (!model_[c].is_finite()) return false;
      count *= model_[c].atoms().size();
      if (count > inner_) return false;
    }
    return true;
  }

  std::vector<double> diff_at(std::span<const double> x, const std::vector<double>& fx, std::size_t k,
                              RandomStream& rng, std::uint64_t draws) const {
    if (f_.closed_diff) return f_.closed_diff(k, x);
    std::vector<double> y(x.begin(), x.end());
    std::vector<double> avg(d_, 0.0);
    if (model_[k].is_finite()) {
      for (const Atom& a : model_[k].atoms()) {
        y[k] = a.value;
        const auto v = f_.eval(y);
        for (std::size_t i = 0; i < d_; ++i) avg[i] += a.prob * v[i];
      }
    } else {
      for (std::uint64_t t = 0; t < draws; ++t) {
        y[k] = model_[k].draw(rng);
        const auto v = f_.eval(y);
        for (std::size_t i = 0; i < d_; ++i) avg[i] += v[i] / static_cast<double>(draws);
      }
    }
    std::vector<double> out(d_);
    for (std::size_t i = 0; i < d_; ++i) out[i] = fx[i] - avg[i];
    return out;
  }

  std::vector<double> diff_at(std::span<const double> x, std::size_t k, RandomStream& rng,
                              std::uint64_t draws) const {
    if (f_.closed_diff) return f_.closed_diff(k, x);
    return diff_at(x, f_.eval(x), k, rng, draws);
  }

  // E[D_k F | fixed coordinates](x), resampling coordinates [lo, hi).
  std::vector<double> cond_at(std::span<const double> x, std::size_t k, std::size_t lo, std::size_t hi,
                              RandomStream& rng) const {
    if (lo >= hi) return diff_at(x, k, rng, inner_);
    std::vector<double> y(x.begin(), x.end());
    std::vector<double> avg(d_, 0.0);
    if (diff_exact(k) && enumerable(lo, hi)) {
      std::vector<std::size_t> digit(hi - lo, 0);
      while (true) {
        double w = 1.0;
        for (std::size_t c = lo; c < hi; ++c) {
          const Atom& a = model_[c].atoms()[digit[c - lo]];
          y[c] = a.value;
          w *= a.prob;
        }
        const auto v = diff_at(y, k, rng, 1);
        for (std::size_t i = 0; i < d_; ++i) avg[i] += w * v[i];
        std::size_t c = hi - lo;
        while (c > 0) {
          --c;
          if (++digit[c] < model_[lo + c].atoms().size()) break;
          digit[c] = 0;
          if (c == 0) return avg;
        }
      }
    }
    for (std::uint64_t t = 0; t < inner_; ++t) {
      for (std::size_t c = lo; c < hi; ++c) y[c] = model_[c].draw(rng);
      const auto v = diff_at(y, k, rng, 1);
      for (std::size_t i = 0; i < d_; ++i) avg[i] += v[i] / static_cast<double>(inner_);
    }
    return avg;
  }

  std::vector<double> weighted_cond(std::span<const double> x, std::size_t k, RandomStream& rng) const {
    std::vector<double> past, future;
    if (f_.closed_cond_diff) {
      past = f_.closed_cond_diff(k, x, Filtration::past);
      future = f_.closed_cond_diff(k, x, Filtration::future);
    } else {
      past = cond_at(x, k, k + 1, n_, rng);
      future = cond_at(x, k, 0, k, rng);
    }
    std::vector<double> out(d_);
    for (std::size_t j = 0; j < d_; ++j) out[j] = alpha_ * past[j] + (1.0 - alpha_) * future[j];
    return out;
  }

  const ProductModel& model_;
  const StatisticVector& f_;
  double alpha_;
  std::uint64_t inner_;
  std::size_t n_;
  std::size_t d_;
};

void batch_errors(const std::vector<std::vector<double>>& per_batch, const std::vector<double>& pooled,
                  std::vector<double>& se) {
  const std::size_t b = per_batch.size();
  se.assign(pooled.size(), std::numeric_limits<double>::infinity());
  if (b < 2) return;
  for (std::size_t q = 0; q < pooled.size(); ++q) {
    double m = 0.0;
    for (const auto& v : per_batch) m += v[q];
    m /= static_cast<double>(b);
    double s = 0.0;
    for (const auto& v : per_batch) s += (v[q] - m) * (v[q] - m);
    se[q] = std::sqrt(s / static_cast<double>(b - 1) / static_cast<double>(b));
  }
}

Matrix to_matrix(const std::vector<double>& v, std::size_t d) {
  Matrix m(d, d);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

}  // namespace

McEstimates mc_estimates(const ProductModel& model, const StatisticVector& f, double alpha,
                         const McConfig& cfg) {
  cfg.validate();
  f.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("mc_estimates: alpha outside [0, 1]");
  const std::size_t d = f.dim;
  const std::uint64_t chunks = (cfg.outer_samples + cfg.chunk_size - 1) / cfg.chunk_size;
  OuterSampler sampler(model, f, alpha, cfg.inner_resamples);

  std::vector<Accumulator> results(chunks, Accumulator(d));
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t begin = c * cfg.chunk_size;
      const std::uint64_t count = std::min(cfg.chunk_size, cfg.outer_samples - begin);
      try {
        sampler.run_chunk(cfg.seed, c, count, results[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Accumulator total(d);
  for (const auto& r : results) total.merge(r);
  const Point pooled = estimate(total, d);

  // Batch means over whole chunks; a trailing partial chunk is still a batch.
  std::vector<Point> per_chunk;
  per_chunk.reserve(chunks);
  for (const auto& r : results) per_chunk.push_back(estimate(r, d));
  auto column = [&](auto member) {
    std::vector<std::vector<double>> v;
    for (const auto& p : per_chunk) v.push_back(p.*member);
    return v;
  };

  McEstimates out;
  out.dim = d;
  out.alpha = alpha;
  out.samples = total.count;
  out.batches = chunks;
  out.mean = pooled.mean;
  batch_errors(column(&Point::mean), pooled.mean, out.mean_se);
  std::vector<double> se;
  out.sigma = to_matrix(pooled.sigma, d);
  batch_errors(column(&Point::sigma), pooled.sigma, se);
  out.sigma_se = to_matrix(se, d);
  out.z_mean = to_matrix(pooled.z_mean, d);
  batch_errors(column(&Point::z_mean), pooled.z_mean, se);
  out.z_mean_se = to_matrix(se, d);
  out.z_var = to_matrix(pooled.z_var, d);
  batch_errors(column(&Point::z_var), pooled.z_var, se);
  out.z_var_se = to_matrix(se, d);
  out.third_moment = pooled.third;
  batch_errors(column(&Point::third), pooled.third, out.third_moment_se);

  for (std::size_t k = 0; k < model.size(); ++k)
    if (!sampler.diff_exact(k)) out.bias_caveat = true;
  return out;
}

}  // namespace mvclt
