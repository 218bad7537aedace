#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace skipmon::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Root {
  double x;
  bool bracketed;  ///< false when f(lo) and f(hi) share a sign; x is then the endpoint closer to zero
};

/// Bisection for a sign change of `f` on [lo, hi], stopping once the bracket
/// is narrower than `tol`.
Root bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
            int max_iter = 200);

struct Maximum {
  double x;
  double value;
};

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double tol = 1e-9);

/// Dense scan of `grid_n + 1` equally spaced points followed by golden-section
/// refinement on the bracket around the best grid point. Ties prefer the
/// larger argument, both on the grid and after refinement.
Maximum grid_then_golden_max(const std::function<double(double)>& f, double lo, double hi,
                             std::size_t grid_n, double refine_tol);

/// Adaptive Gauss-Kronrod quadrature over [a, b]; `b` may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

}  // namespace skipmon::numeric
