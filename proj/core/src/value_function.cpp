#include "skipmon/value_function.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "skipmon/error.hpp"
#include "skipmon/numeric.hpp"

namespace skipmon {

namespace {
constexpr double kSlopeCap = 1e6;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

struct ValueFunction::CLinearTable {
  double c;
  Distribution types;
  std::vector<double> values;
  std::vector<double> prices;

  double price_at(double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= c) return c;
    return v * (1.0 - types.quantile(1.0 - v / c));
  }

  // dp/dv of price_at, via the inverse-function rule on the type quantile.
  double price_slope(double v) const {
    const double q = types.quantile(1.0 - std::clamp(v, 0.0, c) / c);
    const double f = types.pdf(q);
    if (!(f > 0.0)) return numeric::kInf;
    return 1.0 - q + (v / c) / f;
  }

  double value_at(double p) const {
    if (p <= 0.0) return 0.0;
    if (p >= c) return c;
    const auto it = std::upper_bound(prices.begin(), prices.end(), p);
    const std::size_t hi = std::min(static_cast<std::size_t>(it - prices.begin()), prices.size() - 1);
    double a = values[hi - 1];
    double b = values[hi];
    for (int i = 0; i < 64 && b - a > 1e-15 * c; ++i) {
      const double mid = 0.5 * (a + b);
      if (price_at(mid) <= p) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  }
};

ValueFunction ValueFunction::poly(double k, double p_bar) {
  if (!(k > 1.0) || !std::isfinite(k)) {
    throw Error(Errc::InvalidArgument, "poly exponent must exceed 1 so that v'(0) > 1");
  }
  if (!(p_bar > 0.0) || !std::isfinite(p_bar)) {
    throw Error(Errc::InvalidArgument, "poly no-sale price must be positive");
  }
  return ValueFunction(Poly{k, p_bar});
}

ValueFunction ValueFunction::insensitive(double level, double threshold) {
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw Error(Errc::InvalidArgument, "insensitive level must be positive");
  }
  if (!(threshold >= 0.0) || threshold >= level) {
    throw Error(Errc::InvalidArgument, "insensitive threshold must lie in [0, level)");
  }
  return ValueFunction(Step{level, threshold});
}

ValueFunction ValueFunction::clinear(double c, Distribution type_dist, std::size_t grid_n) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(Errc::InvalidArgument, "c-linear ceiling must be positive");
  }
  if (grid_n < 100) throw Error(Errc::InvalidArgument, "c-linear grid needs at least 100 points");
  if (!type_dist.is_continuous()) {
    throw Error(Errc::InvalidArgument, "c-linear value needs a continuous type law");
  }
  const Interval s = type_dist.support();
  if (s.lo != 0.0 || s.hi > 1.0) {
    throw Error(Errc::InvalidArgument, "c-linear value needs a type law on [0, hi] with hi <= 1");
  }
  auto table = std::make_shared<CLinearTable>(CLinearTable{c, std::move(type_dist), {}, {}});
  table->values.resize(grid_n + 1);
  table->prices.resize(grid_n + 1);
  for (std::size_t i = 0; i <= grid_n; ++i) {
    const double v = i == grid_n ? c : c * static_cast<double>(i) / static_cast<double>(grid_n);
    table->values[i] = v;
    table->prices[i] = table->price_at(v);
    if (i > 0 && !(table->prices[i] > table->prices[i - 1])) {
      throw Error(Errc::NonMonotone,
                  fmt::format("c-linear price map not increasing near v={:g} for {}", v,
                              table->types.describe()));
    }
  }
  return ValueFunction(std::shared_ptr<const CLinearTable>(std::move(table)));
}

ValueFunction clinear_build(double c, const Distribution& type_dist, std::size_t grid_n) {
  return ValueFunction::clinear(c, type_dist, grid_n);
}

ValueKind ValueFunction::kind() const {
  return std::visit(overloaded{
                        [](const Poly&) { return ValueKind::PriceSensitivePoly; },
                        [](const Step&) { return ValueKind::Insensitive; },
                        [](const std::shared_ptr<const CLinearTable>&) { return ValueKind::CLinear; },
                    },
                    rep_);
}

std::string ValueFunction::describe() const {
  return std::visit(
      overloaded{
          [](const Poly& f) { return fmt::format("poly(k={:g},p_bar={:g})", f.k, f.p_bar); },
          [](const Step& f) {
            return fmt::format("insensitive(level={:g},threshold={:g})", f.level, f.threshold);
          },
          [](const std::shared_ptr<const CLinearTable>& t) {
            return fmt::format("clinear(c={:g},{})", t->c, t->types.describe());
          },
      },
      rep_);
}

double ValueFunction::p_nosale() const {
  return std::visit(overloaded{
                        [](const Poly& f) { return f.p_bar; },
                        [](const Step& f) { return f.level; },
                        [](const std::shared_ptr<const CLinearTable>& t) { return t->c; },
                    },
                    rep_);
}

double ValueFunction::eval(double p) const {
  return std::visit(overloaded{
                        [p](const Poly& f) {
                          if (p <= 0.0) return 0.0;
                          if (p >= f.p_bar) return f.p_bar;
                          return f.p_bar * (1.0 - std::pow(1.0 - p / f.p_bar, f.k));
                        },
                        [p](const Step& f) { return p > f.threshold ? f.level : 0.0; },
                        [p](const std::shared_ptr<const CLinearTable>& t) { return t->value_at(p); },
                    },
                    rep_);
}

double ValueFunction::derivative(double p) const {
  if (p < 0.0) throw Error(Errc::InvalidArgument, "derivative needs p >= 0");
  return std::visit(
      overloaded{
          [p](const Poly& f) {
            if (p > f.p_bar) return 0.0;
            return f.k * std::pow(1.0 - p / f.p_bar, f.k - 1.0);
          },
          [](const Step&) -> double {
            throw Error(Errc::NotDifferentiable, "insensitive value functions have no slope");
          },
          [p](const std::shared_ptr<const CLinearTable>& t) {
            if (p > t->c) return 0.0;
            const double slope = t->price_slope(t->value_at(p));
            if (!(slope > 0.0)) return numeric::kInf;
            const double dv = 1.0 / slope;
            return dv > kSlopeCap ? numeric::kInf : dv;
          },
      },
      rep_);
}

double ValueFunction::clinear_price_at_value(double v) const {
  const auto* t = std::get_if<std::shared_ptr<const CLinearTable>>(&rep_);
  if (t == nullptr) throw Error(Errc::InvalidArgument, "not a c-linear value function");
  return (*t)->price_at(v);
}

const Distribution* ValueFunction::type_dist() const {
  const auto* t = std::get_if<std::shared_ptr<const CLinearTable>>(&rep_);
  return t == nullptr ? nullptr : &(*t)->types;
}

InsensitiveProjection insensitive_projection(const ValueFunction& vf) {
  if (!vf.is_sensitive()) {
    throw Error(Errc::NotDifferentiable, "projection needs a sensitive value function");
  }
  const double p_bar = vf.p_nosale();
  if (vf.derivative(p_bar) > 1.0) {
    throw Error(Errc::NoCrossing, "slope stays above 1 up to the no-sale price");
  }
  const auto root =
      numeric::bisect([&vf](double p) { return vf.derivative(p) - 1.0; }, 0.0, p_bar, 1e-12);
  const double p_star = root.x;
  const double v_const = vf.eval(p_star);
  return {p_star, v_const, v_const / vf.eval(p_bar)};
}

ShapeCheck check_shape(const ValueFunction& vf, std::size_t grid_n) {
  const double p_bar = vf.p_nosale();
  const double h = p_bar / static_cast<double>(grid_n);
  ShapeCheck out{true, true, 0.0, 0.0};
  std::vector<double> v(grid_n + 1);
  for (std::size_t i = 0; i <= grid_n; ++i) v[i] = vf.eval(h * static_cast<double>(i));
  for (std::size_t i = 1; i <= grid_n; ++i) {
    out.worst_decrease = std::max(out.worst_decrease, v[i - 1] - v[i]);
    if (i + 1 <= grid_n) {
      out.worst_concavity_gap =
          std::max(out.worst_concavity_gap, 0.5 * (v[i - 1] + v[i + 1]) - v[i]);
    }
  }
  out.monotone = out.worst_decrease <= 1e-12;
  out.concave = out.worst_concavity_gap <= 1e-9;
  return out;
}

}  // namespace skipmon
