#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skipmon/distribution.hpp"
#include "skipmon/value_function.hpp"

namespace skipmon {

enum class Objective { Utility, Revenue };

/// Expected max(gamma * v, v - p) over gamma ~ types, with v = v(p).
double expected_utility(const Distribution& types, const ValueFunction& vf, double p);

/// p * P(sale), where a type buys when (1 - gamma) * v(p) >= p.
double expected_revenue(const Distribution& types, const ValueFunction& vf, double p);

struct OptimizeOptions {
  std::size_t grid_n = 10000;
  double refine_tol = 1e-6;
};

struct PriceOptimum {
  double price;
  double value;
};

/// Grid scan over [0, p_bar] plus golden-section refinement; ties go to the
/// higher price.
PriceOptimum optimal_price(Objective objective, const Distribution& types, const ValueFunction& vf,
                           const OptimizeOptions& options = {});

/// Sufficient condition for the utility-optimal price to sit at p_bar:
///   F_gamma((v'(0) - 1) / v'(0)) <= v'(p_bar) / (1 - v'(p_bar)) * E[gamma].
struct NoSaleCheck {
  bool holds;
  double lhs;
  double rhs;
  double slope_at_zero;
  double slope_at_end;
};

/// Evaluates the condition with slopes taken from `vf`. The end slope is read
/// at p_bar - endpoint_offset; offset 0 is the literal condition.
NoSaleCheck nosale_condition(const Distribution& types, const ValueFunction& vf,
                             double endpoint_offset = 0.0);

/// Same inequality from explicit slopes. An infinite start slope uses the
/// limit argument 1; an end slope >= 1 makes the right side infinite.
NoSaleCheck nosale_condition_from_slopes(const Distribution& types, double slope_at_zero,
                                         double slope_at_end);

struct Frontier {
  double frontier;  ///< largest grid price up to which the hazard inequality holds
  bool impatience_mhr;
  std::optional<double> equality_price;  ///< crossing point, computed when impatience_mhr
  std::optional<double> revenue_price;   ///< optimal_price(Revenue), computed when impatience_mhr
};

/// Lower bound on the revenue-optimal price from the inequality
///   IH_{1-gamma}(p / v) >= (p / v) * (1 - p v'(p) / v),
/// checked on `grid_n` prices in (0, p_bar].
Frontier lemma44_frontier(const Distribution& types, const ValueFunction& vf,
                          const OptimizeOptions& options = {});

struct UtilityFloor {
  double floor;  ///< U_max - v'(p_rev) * (p_bar - p_rev)
  double u_max;
  double p_rev;
  double u_at_p_rev;
};

/// Utility guaranteed at the revenue-optimal price when the no-sale
/// condition holds. Throws ConditionNotMet otherwise.
UtilityFloor cor45_floor(const Distribution& types, const ValueFunction& vf,
                         const OptimizeOptions& options = {}, double endpoint_offset = 0.0);

struct SingleTaskReport {
  double p_util;
  double u_max;
  double p_rev;
  double rev_max;
  bool nosale_condition_holds;
  double lemma44_frontier;
  std::optional<double> cor45_floor;
};

SingleTaskReport analyze_single_task(const Distribution& types, const ValueFunction& vf,
                                     const OptimizeOptions& options = {});

// ---------------------------------------------------------------------------
// Figure data

struct FigureMember {
  std::string label;
  double lambda;
  double tau;
  Distribution types;
  ValueFunction vf;
};

struct FigureFamily {
  std::string name;
  std::vector<FigureMember> members;
};

/// Built-in families: fig2 .. fig6. Throws InvalidArgument for other names.
FigureFamily figure_family(const std::string& name);
std::vector<std::string> figure_family_names();

struct FigureRow {
  std::string label;
  double lambda;
  double tau;
  double p_bar;
  double p_util;
  double p_rev;
  double u_at_p_util;
  double rev_at_p_rev;
  double p_rev_constant;  ///< revenue-optimal price for the constant value v(p_rev)
};

FigureRow figure_row(const FigureMember& member, const OptimizeOptions& options = {});

/// Computes every member (in parallel, output in member order) and writes
/// `<family>.csv` plus one `curve_<family>_<i>.csv` per member with
/// `curve_points` samples of (p, v, U, REV).
std::vector<FigureRow> figure_sweep(const FigureFamily& family, const std::filesystem::path& out_dir,
                                    const OptimizeOptions& options = {},
                                    std::size_t curve_points = 500, unsigned threads = 0);

}  // namespace skipmon
