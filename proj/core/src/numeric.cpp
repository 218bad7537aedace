#include "skipmon/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

#include "skipmon/error.hpp"

namespace skipmon {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroDensity: return "ZeroDensity";
    case Errc::EmptyMass: return "EmptyMass";
    case Errc::EmptyTail: return "EmptyTail";
    case Errc::NotDifferentiable: return "NotDifferentiable";
    case Errc::NonMonotone: return "NonMonotone";
    case Errc::NoCrossing: return "NoCrossing";
    case Errc::ConditionNotMet: return "ConditionNotMet";
    case Errc::NotRegular: return "NotRegular";
    case Errc::EmptyPopulation: return "EmptyPopulation";
    case Errc::MismatchedConfigs: return "MismatchedConfigs";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace numeric {

Root bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
            int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, true};
  if (fhi == 0.0) return {hi, true};
  if (std::signbit(flo) == std::signbit(fhi)) {
    return {std::abs(flo) <= std::abs(fhi) ? lo : hi, false};
  }
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return {mid, true};
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double tol) {
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    // ">" keeps the upper bracket on ties
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

Maximum grid_then_golden_max(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_n, double refine_tol) {
  if (grid_n < 1) throw Error(Errc::InvalidArgument, "grid_n must be positive");
  const double step = (hi - lo) / static_cast<double>(grid_n);
  std::size_t best_i = 0;
  double best = f(lo);
  for (std::size_t i = 1; i <= grid_n; ++i) {
    const double x = i == grid_n ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v >= best) {
      best = v;
      best_i = i;
    }
  }
  const double best_x = best_i == grid_n ? hi : lo + step * static_cast<double>(best_i);
  const double a = best_i == 0 ? lo : best_x - step;
  const double b = best_i == grid_n ? hi : best_x + step;
  const Maximum refined = golden_section_max(f, a, b, refine_tol);
  if (refined.value > best) return refined;
  return {best_x, best};
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol,
                                                                       &error);
}

}  // namespace numeric
}  // namespace skipmon
