#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics: integrals are composite Simpson sums, laws are
// written out from their textbook formulas, and optima are dense grid scans.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// Composite Simpson rule with `n` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t n = 20000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) {
    s += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

struct GridMax {
  double x;
  double value;
};

/// Dense scan; ties resolved toward the larger x.
inline GridMax grid_max(const std::function<double(double)>& f, double a, double b,
                        std::size_t n = 200000) {
  GridMax best{a, f(a)};
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    const double v = f(x);
    if (v >= best.value) best = {x, v};
  }
  return best;
}

/// Type law whose impatience 1 - gamma is Exp(lambda) truncated to [0, 1].
struct ImpatienceExp {
  double lambda;

  double impatience_pdf(double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    return lambda * std::exp(-lambda * x) / (1.0 - std::exp(-lambda));
  }
  double impatience_cdf(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    return (1.0 - std::exp(-lambda * x)) / (1.0 - std::exp(-lambda));
  }
  double pdf(double g) const { return impatience_pdf(1.0 - g); }
  double cdf(double g) const { return 1.0 - impatience_cdf(1.0 - g); }
};

/// Impatience density lambda e^{-lambda x} up to tau, held at lambda e^{-lambda tau} after.
struct FlattenedImpatienceExp {
  double lambda;
  double tau;

  double norm() const {
    return 1.0 - std::exp(-lambda * tau) + lambda * std::exp(-lambda * tau) * (1.0 - tau);
  }
  double impatience_pdf(double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double raw = x <= tau ? lambda * std::exp(-lambda * x) : lambda * std::exp(-lambda * tau);
    return raw / norm();
  }
  double impatience_cdf(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    double raw = 1.0 - std::exp(-lambda * std::min(x, tau));
    if (x > tau) raw += lambda * std::exp(-lambda * tau) * (x - tau);
    return raw / norm();
  }
  double pdf(double g) const { return impatience_pdf(1.0 - g); }
  double cdf(double g) const { return 1.0 - impatience_cdf(1.0 - g); }
};

inline double exp_cdf(double lambda, double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-lambda * x); }
inline double exp_pdf(double lambda, double x) { return x < 0.0 ? 0.0 : lambda * std::exp(-lambda * x); }
inline double lomax_cdf(double alpha, double x) { return x <= 0.0 ? 0.0 : 1.0 - std::pow(1.0 + x, -alpha); }
inline double lomax_pdf(double alpha, double x) {
  return x < 0.0 ? 0.0 : alpha * std::pow(1.0 + x, -alpha - 1.0);
}

/// Expected single-task utility with a type density on [0, 1]:
/// F(t)(v - p) + v * int_t^1 g f(g) dg, t = 1 - p / v.
inline double utility(const std::function<double(double)>& type_pdf,
                      const std::function<double(double)>& type_cdf, double v, double p) {
  if (v <= 0.0) return 0.0;
  const double t = std::clamp(1.0 - p / v, 0.0, 1.0);
  return type_cdf(t) * (v - p) + v * simpson([&](double g) { return g * type_pdf(g); }, t, 1.0, 4000);
}

/// Known-types discounted revenue integrated over a type density.
inline double known_types_expected(const std::function<double(double)>& type_pdf,
                                   const std::function<double(double)>& ret_cdf, double beta,
                                   double v, double q) {
  return simpson(
      [&](double g) {
        const double p = std::min((1.0 - g) * v, q);
        return type_pdf(g) * p / (1.0 - beta * ret_cdf(v - p));
      },
      0.0, 1.0, 20000);
}

/// Inverse hazard of an explicit density/cdf pair.
inline double inverse_hazard(const std::function<double(double)>& pdf,
                             const std::function<double(double)>& cdf, double x) {
  return (1.0 - cdf(x)) / pdf(x);
}

/// True when the inverse hazard never rises by more than tol between grid points.
inline bool mhr_on_grid(const std::function<double(double)>& ih, double a, double b,
                        std::size_t n = 10000, double tol = 1e-9) {
  double prev = ih(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    const double cur = ih(x);
    if (cur > prev + tol * std::max(1.0, std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

/// Kolmogorov distance between sorted samples and a cdf.
inline double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

/// Revenue-maximizing posted price over explicit samples, by brute force:
/// for every sample value count the samples at or above it.
inline double brute_force_myerson(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double best_p = 0.0;
  double best_rev = -1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double p = values[i];
    const auto first = std::lower_bound(values.begin(), values.end(), p);
    const double rev = p * static_cast<double>(values.end() - first);
    if (rev >= best_rev) {
      best_rev = rev;
      best_p = p;
    }
  }
  return best_p;
}

}  // namespace oracle
