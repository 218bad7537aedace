#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>

#include "skipmon/distribution.hpp"

namespace skipmon {

enum class ValueKind { PriceSensitivePoly, Insensitive, CLinear };

/// Perceived value of completing a task as a function of the skip price.
///
/// Sensitive kinds start at v(0) = 0, rise concavely and flatten at the
/// no-sale price p_bar where v(p_bar) = p_bar. The insensitive kind is a step:
/// 0 up to its threshold and a constant level above it.
class ValueFunction {
 public:
  /// v(p) = p_bar * (1 - (1 - p / p_bar)^k) on [0, p_bar], constant p_bar beyond.
  static ValueFunction poly(double k, double p_bar);
  static ValueFunction insensitive(double level, double threshold = 0.0);
  /// Fully-sensitive value solving c * P(sale at p) = v(p) for the given type law.
  /// Throws NonMonotone when the induced price map is not strictly increasing.
  static ValueFunction clinear(double c, Distribution type_dist, std::size_t grid_n = 4096);

  ValueKind kind() const;
  bool is_sensitive() const { return kind() != ValueKind::Insensitive; }
  std::string describe() const;

  double p_nosale() const;
  double eval(double p) const;
  double operator()(double p) const { return eval(p); }

  /// dv/dp. Returns +infinity where the slope diverges (or exceeds 1e6); at
  /// p_bar the left derivative is reported. Throws NotDifferentiable for the
  /// insensitive kind.
  double derivative(double p) const;

  /// For the c-linear kind: the price at which the value equals `v`,
  /// v * (1 - Q_gamma(1 - v / c)).
  double clinear_price_at_value(double v) const;
  /// Type law a c-linear function was built from; nullptr for other kinds.
  const Distribution* type_dist() const;

 private:
  struct Poly {
    double k;
    double p_bar;
  };
  struct Step {
    double level;
    double threshold;
  };
  struct CLinearTable;

  using Rep = std::variant<Poly, Step, std::shared_ptr<const CLinearTable>>;
  explicit ValueFunction(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

ValueFunction clinear_build(double c, const Distribution& type_dist, std::size_t grid_n);

struct InsensitiveProjection {
  double p_star;           ///< price where v'(p_star) = 1
  double v_const;          ///< v(p_star)
  double rev_ratio_bound;  ///< v(p_star) / v(p_bar)

  /// Constant function v_const for prices above p_star.
  ValueFunction as_constant() const { return ValueFunction::insensitive(v_const, p_star); }
};

/// Flattens a sensitive value function at the point where its slope drops to 1.
InsensitiveProjection insensitive_projection(const ValueFunction& vf);

struct ShapeCheck {
  bool monotone;
  bool concave;
  double worst_decrease;
  double worst_concavity_gap;
};

/// Monotonicity and midpoint concavity of v on a uniform grid over [0, p_bar].
ShapeCheck check_shape(const ValueFunction& vf, std::size_t grid_n = 1000);

}  // namespace skipmon
