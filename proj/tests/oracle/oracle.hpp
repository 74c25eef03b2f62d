#pragma once

// Brute-force reference computations for the tests. Nothing here includes
// or calls the library: every expectation is a literal sum over the product
// space, and conditional expectations re-sum over the free coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

struct Law {
  std::vector<double> v;
  std::vector<double> p;
};

inline Law rademacher() { return {{-1.0, 1.0}, {0.5, 0.5}}; }
inline Law bernoulli(double p) { return {{0.0, 1.0}, {1.0 - p, p}}; }

using Point = std::vector<double>;
using Scalar = std::function<double(const Point&)>;

class Space {
 public:
  explicit Space(std::vector<Law> laws) : laws_(std::move(laws)) {
    std::vector<std::size_t> idx(laws_.size(), 0);
    for (;;) {
      Point x(laws_.size());
      double w = 1.0;
      for (std::size_t k = 0; k < laws_.size(); ++k) {
        x[k] = laws_[k].v[idx[k]];
        w *= laws_[k].p[idx[k]];
      }
      points_.push_back(x);
      weights_.push_back(w);
      std::size_t k = laws_.size();
      while (k > 0) {
        --k;
        if (++idx[k] < laws_[k].v.size()) break;
        idx[k] = 0;
        if (k == 0) return;
      }
      if (laws_.empty()) return;
    }
  }

  std::size_t n() const { return laws_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Law& law(std::size_t k) const { return laws_[k]; }

  double expect(const Scalar& u) const {
    double s = 0.0;
    for (std::size_t r = 0; r < points_.size(); ++r) s += weights_[r] * u(points_[r]);
    return s;
  }

  // E[U | the coordinates with keep[k] true] evaluated at x.
  double conditional(const Scalar& u, const Point& x, const std::vector<bool>& keep) const {
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < points_.size(); ++r) {
      bool match = true;
      for (std::size_t k = 0; k < n() && match; ++k)
        if (keep[k] && points_[r][k] != x[k]) match = false;
      if (!match) continue;
      num += weights_[r] * u(points_[r]);
      den += weights_[r];
    }
    return num / den;
  }

  // U - E_k U, integrating out coordinate k only.
  Scalar big_d(const Scalar& u, std::size_t k) const {
    const Law law = laws_[k];
    return [u, k, law](const Point& x) {
      double ek = 0.0;
      Point y = x;
      for (std::size_t a = 0; a < law.v.size(); ++a) {
        y[k] = law.v[a];
        ek += law.p[a] * u(y);
      }
      return u(x) - ek;
    };
  }

  // sqrt(1/2 E'[(U - U with x_k resampled)^2])
  Scalar small_d(const Scalar& u, std::size_t k) const {
    const Law law = laws_[k];
    return [u, k, law](const Point& x) {
      double s = 0.0;
      Point y = x;
      const double ux = u(x);
      for (std::size_t a = 0; a < law.v.size(); ++a) {
        y[k] = law.v[a];
        const double diff = ux - u(y);
        s += law.p[a] * diff * diff;
      }
      return std::sqrt(0.5 * s);
    };
  }

  // Past field through k (coordinates 0..k), future field from k (k..n-1).
  std::vector<bool> past_mask(std::size_t k) const {
    std::vector<bool> m(n(), false);
    for (std::size_t i = 0; i <= k; ++i) m[i] = true;
    return m;
  }
  std::vector<bool> future_mask(std::size_t k) const {
    std::vector<bool> m(n(), false);
    for (std::size_t i = k; i < n(); ++i) m[i] = true;
    return m;
  }

  // alpha E[D_k V | F_k] + (1 - alpha) E[D_k V | G_k] at x
  double d_alpha(const Scalar& v, std::size_t k, double alpha, const Point& x) const {
    const Scalar dv = big_d(v, k);
    return alpha * conditional(dv, x, past_mask(k)) + (1.0 - alpha) * conditional(dv, x, future_mask(k));
  }

  double covariance(const Scalar& u, const Scalar& v) const {
    const double mu = expect(u), mv = expect(v);
    return expect([&](const Point& x) { return (u(x) - mu) * (v(x) - mv); });
  }

  // Z(x) = sum_k D_k U(x) d_alpha(V, k)(x), tabulated over the points.
  std::vector<double> z_values(const Scalar& u, const Scalar& v, double alpha) const {
    std::vector<double> z(points_.size(), 0.0);
    for (std::size_t k = 0; k < n(); ++k) {
      const Scalar du = big_d(u, k);
      for (std::size_t r = 0; r < points_.size(); ++r) z[r] += du(points_[r]) * d_alpha(v, k, alpha, points_[r]);
    }
    return z;
  }

  double mean_of(const std::vector<double>& t) const {
    double s = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) s += weights_[r] * t[r];
    return s;
  }

  double variance_of(const std::vector<double>& t) const {
    const double m = mean_of(t);
    double s = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) s += weights_[r] * (t[r] - m) * (t[r] - m);
    return s;
  }

  // sum_k E|D_k U|^3
  double third_moment_sum(const Scalar& u) const {
    double s = 0.0;
    for (std::size_t k = 0; k < n(); ++k) {
      const Scalar du = big_d(u, k);
      s += expect([&](const Point& x) { return std::pow(std::abs(du(x)), 3); });
    }
    return s;
  }

 private:
  std::vector<Law> laws_;
  std::vector<Point> points_;
  std::vector<double> weights_;
};

// Two-point derivative (U(x_k = 1) - U(x_k = -1)) / 2 on +-1 inputs.
inline Scalar malliavin(const Scalar& u, std::size_t k) {
  return [u, k](const Point& x) {
    Point hi = x, lo = x;
    hi[k] = 1.0;
    lo[k] = -1.0;
    return 0.5 * (u(hi) - u(lo));
  };
}

// E cos(<t, Y> + phase) for Y ~ N(0, C).
inline double cosine_gaussian_mean(const std::vector<double>& t, double phase,
                                   const std::vector<std::vector<double>>& c) {
  double q = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) q += t[i] * c[i][j] * t[j];
  return std::cos(phase) * std::exp(-0.5 * q);
}

// Third and fourth absolute central and raw moments of Bernoulli(p).
struct BernoulliMoments {
  double x1, x2, y1, y2;
};
inline BernoulliMoments bernoulli_moments(double p) {
  const double q = 1.0 - p;
  return {p, p * q * (q * q + p * p), p, p * q * (q * q * q + p * p * p)};
}

// Specialized runs bound for the normalized Bernoulli run counts W_1..W_d
// evaluated from its closed form with scalar arithmetic.
inline double bernoulli_runs_bound(std::size_t n, std::size_t d, double p, double g2, double g3) {
  const auto mom = bernoulli_moments(p);
  const double dd = static_cast<double>(d);
  double var = 0.0, third = 0.0;
  for (std::size_t j = 1; j <= d; ++j) {
    const double a = 1.0 / std::sqrt(static_cast<double>(n) * std::pow(p, static_cast<double>(j)) * (1.0 - p));
    const double m3 = std::pow(static_cast<double>(j), 3);
    var += m3 * std::sqrt(std::pow(mom.y1, static_cast<double>(j) - 1.0) * mom.y2 * static_cast<double>(n) * std::pow(a, 4));
    third += m3 * std::pow(mom.x1, static_cast<double>(j) - 1.0) * mom.x2 * static_cast<double>(n) * std::pow(a, 3);
  }
  return std::sqrt(2.0) * g2 * dd * var + g3 * dd * dd / 3.0 * third;
}

// sum_{u,v} (sum_k a_ku b_kv)^2 by the quadruple sum.
inline double trace_condition(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  double s = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      double inner = 0.0;
      for (std::size_t k = 0; k < n; ++k) inner += a[k][u] * b[k][v];
      s += inner * inner;
    }
  return s;
}

// Four-term quadratic-form bound for one matrix (d = 1), inputs with
// Var(X^2) = vs and E X^4 = m4, target variance c.
inline double qf_bound_1d(const std::vector<std::vector<double>>& a, double vs, double m4, double c, double g2,
                          double g3) {
  const std::size_t n = a.size();
  double pcov = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) pcov += a[u][v] * a[u][v];
  std::vector<double> r(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t v = 0; v < n; ++v) r[k] += a[k][v] * a[k][v];
  double rr = 0.0, r15 = 0.0;
  for (double x : r) {
    rr += x * x;
    r15 += std::pow(x, 1.5);
  }
  const double tc = trace_condition(a, a);
  return g2 / 2.0 * std::abs(c - pcov) + g2 / std::pow(2.0, 1.5) * std::sqrt(std::max(2.0, vs) * tc) +
         g2 / std::pow(2.0, 1.5) * std::sqrt(8.0 * vs * m4 * rr) + std::pow(2.0, 1.5) * m4 * g3 / 3.0 * r15;
}

}  // namespace oracle
