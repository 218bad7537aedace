#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "skipmon/rng.hpp"

namespace skipmon {

struct Interval {
  double lo;
  double hi;  ///< may be +infinity
};

enum class DistKind {
  Uniform,
  ImpatienceExponential,
  FlattenedTailImpatienceExponential,
  Exponential,
  Lomax,
  EqualRevenue,
  Discrete,
  Empirical,
  Truncated,
  Affine,
};

namespace detail {
class Law;
}

/// Immutable one-dimensional probability law. Copies share the underlying
/// law, so a Distribution is cheap to pass by value and safe to read from
/// several threads.
///
/// Player types live on [0, 1]. The impatience-exponential kinds are
/// distributions over the type gamma whose impatience 1 - gamma follows an
/// exponential law truncated to [0, 1] (optionally with its density held
/// constant past a cut point tau), so larger rates mean more patient players.
class Distribution {
 public:
  static Distribution uniform_unit();
  static Distribution uniform(double lo, double hi);
  static Distribution impatience_exponential(double rate);
  static Distribution flattened_impatience_exponential(double rate, double tau);
  static Distribution exponential(double rate);
  /// Shifted Pareto with scale 1: F(x) = 1 - (1 + x)^-alpha on [0, inf).
  static Distribution lomax(double alpha);
  /// F(x) = 1 - 1/x on [1, inf).
  static Distribution equal_revenue();
  static Distribution discrete(std::vector<double> values, std::vector<double> probabilities);
  static Distribution two_point(double a, double prob_a, double b, double prob_b);
  /// Right-continuous step CDF over the given samples.
  static Distribution empirical(std::vector<double> samples);

  DistKind kind() const;
  std::string describe() const;
  Interval support() const;
  bool is_continuous() const;

  /// P(X <= x); clamps to 0 / 1 outside the support.
  double cdf(double x) const;
  /// P(X < x). Equals cdf for continuous kinds.
  double cdf_left(double x) const;
  /// P(X > x), evaluated without the 1 - cdf cancellation where possible.
  double survival(double x) const;
  /// Density. Throws InvalidArgument on discrete and empirical kinds.
  double pdf(double x) const;
  /// Smallest x with cdf(x) >= u. Closed form where one exists.
  double quantile(double u) const;
  /// Quantile by bisection on the cdf to 1e-10, regardless of kind.
  double quantile_by_bisection(double u) const;
  double mean() const;

  /// Atoms of a discrete or empirical law (sorted); empty for continuous kinds.
  std::span<const double> atoms() const;

  Distribution truncated(double a, double b) const;
  /// Law of c * X for c > 0.
  Distribution scaled(double c) const;
  /// Law of shift + scale * X for scale != 0.
  Distribution affine(double shift, double scale) const;
  /// Law of 1 - X: the impatience view of a type distribution.
  Distribution impatience() const { return affine(1.0, -1.0); }

  /// i.i.d. inverse-transform draws; deterministic for a given generator state.
  template <std::uniform_random_bit_generator G>
  std::vector<double> sample(G& gen, std::size_t n) const {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(quantile(to_unit_open(static_cast<std::uint64_t>(gen()))));
    }
    return out;
  }

 private:
  explicit Distribution(std::shared_ptr<const detail::Law> law) : law_(std::move(law)) {}

  std::shared_ptr<const detail::Law> law_;
};

/// (1 - F(x)) / f(x). Throws ZeroDensity where f(x) = 0.
double inverse_hazard(const Distribution& d, double x);

struct MhrCheck {
  bool is_mhr;
  double worst_violation;  ///< largest positive step of the inverse hazard between grid points
  std::size_t skipped;     ///< grid points with zero density
};

/// Inverse hazard non-increasing (within 1e-9) on a uniform grid of `grid_n`
/// points spanning the support. Unbounded supports are cut at the 1 - 1e-9
/// quantile.
MhrCheck is_mhr(const Distribution& d, std::size_t grid_n);

/// Conditional law on [a, b]. Throws EmptyMass when the interval carries no mass.
Distribution truncate(const Distribution& d, double a, double b);

/// Law of (1 - gamma) * v for gamma ~ type_dist.
Distribution marginal_value_dist(const Distribution& type_dist, double v);

/// E[X | X > t]. Throws EmptyTail when P(X > t) = 0.
double cond_expect_above(const Distribution& d, double t);

template <std::uniform_random_bit_generator G>
std::vector<double> sample(const Distribution& d, G& gen, std::size_t n) {
  return d.sample(gen, n);
}

}  // namespace skipmon
