#include "skipmon/single_task.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "skipmon/csv.hpp"
#include "skipmon/error.hpp"
#include "skipmon/numeric.hpp"
#include "skipmon/parallel.hpp"

namespace skipmon {

namespace {

// E[gamma * 1{gamma > t}]
double partial_mean_above(const Distribution& types, double t) {
  const double tail = types.survival(t);
  if (!(tail > 0.0)) return 0.0;
  return tail * cond_expect_above(types, t);
}

double slope_or_zero(const ValueFunction& vf, double p) {
  return vf.is_sensitive() ? vf.derivative(p) : 0.0;
}

}  // namespace

double expected_utility(const Distribution& types, const ValueFunction& vf, double p) {
  const double v = vf.eval(p);
  if (!(v > 0.0)) return 0.0;
  const double t = 1.0 - p / v;  // buyers: gamma <= t
  if (t >= 1.0) return v - p;
  const double buy = types.cdf(t);
  return buy * (v - p) + v * partial_mean_above(types, t);
}

double expected_revenue(const Distribution& types, const ValueFunction& vf, double p) {
  if (!(p > 0.0)) return 0.0;
  const double v = vf.eval(p);
  if (!(v > 0.0)) return 0.0;
  return p * types.cdf(1.0 - p / v);
}

PriceOptimum optimal_price(Objective objective, const Distribution& types, const ValueFunction& vf,
                           const OptimizeOptions& options) {
  if (options.grid_n < 100) throw Error(Errc::InvalidArgument, "grid_n must be at least 100");
  const auto f = [&](double p) {
    return objective == Objective::Utility ? expected_utility(types, vf, p)
                                           : expected_revenue(types, vf, p);
  };
  const auto best =
      numeric::grid_then_golden_max(f, 0.0, vf.p_nosale(), options.grid_n, options.refine_tol);
  return {best.x, best.value};
}

NoSaleCheck nosale_condition_from_slopes(const Distribution& types, double slope_at_zero,
                                         double slope_at_end) {
  NoSaleCheck out{};
  out.slope_at_zero = slope_at_zero;
  out.slope_at_end = slope_at_end;
  const double arg = std::isinf(slope_at_zero) ? 1.0 : (slope_at_zero - 1.0) / slope_at_zero;
  out.lhs = types.cdf(arg);
  out.rhs = slope_at_end >= 1.0 ? numeric::kInf
                                : slope_at_end / (1.0 - slope_at_end) * types.mean();
  out.holds = out.lhs <= out.rhs;
  return out;
}

NoSaleCheck nosale_condition(const Distribution& types, const ValueFunction& vf,
                             double endpoint_offset) {
  if (!vf.is_sensitive()) {
    throw Error(Errc::NotDifferentiable, "no-sale condition needs a sensitive value function");
  }
  const double end = std::max(0.0, vf.p_nosale() - endpoint_offset);
  return nosale_condition_from_slopes(types, vf.derivative(0.0), vf.derivative(end));
}

Frontier lemma44_frontier(const Distribution& types, const ValueFunction& vf,
                          const OptimizeOptions& options) {
  const Distribution impatience = types.impatience();
  const double p_bar = vf.p_nosale();
  const auto gap = [&](double p) {
    const double v = vf.eval(p);
    if (!(v > 0.0)) return -numeric::kInf;
    const double x = p / v;
    const double f = impatience.pdf(x);
    const double s = impatience.survival(x);
    double lhs = 0.0;
    if (f > 0.0) {
      lhs = s / f;
    } else if (s > 0.0) {
      lhs = numeric::kInf;
    }
    const double rhs = x * (1.0 - p * slope_or_zero(vf, p) / v);
    return lhs - rhs;
  };

  Frontier out{0.0, false, std::nullopt, std::nullopt};
  const std::size_t n = options.grid_n;
  const double step = p_bar / static_cast<double>(n);
  std::size_t first_fail = n + 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const double p = i == n ? p_bar : step * static_cast<double>(i);
    if (gap(p) < 0.0) {
      first_fail = i;
      break;
    }
    out.frontier = p;
  }

  out.impatience_mhr = is_mhr(impatience, 2000).is_mhr;
  if (out.impatience_mhr && first_fail <= n) {
    const double hi = first_fail == n ? p_bar : step * static_cast<double>(first_fail);
    const double lo = std::max(out.frontier, hi - step);
    out.equality_price = numeric::bisect(gap, lo, hi, 1e-12).x;
    out.revenue_price = optimal_price(Objective::Revenue, types, vf, options).price;
  }
  return out;
}

UtilityFloor cor45_floor(const Distribution& types, const ValueFunction& vf,
                         const OptimizeOptions& options, double endpoint_offset) {
  const NoSaleCheck check = nosale_condition(types, vf, endpoint_offset);
  if (!check.holds) {
    throw Error(Errc::ConditionNotMet,
                fmt::format("no-sale condition fails: lhs={:g} > rhs={:g}", check.lhs, check.rhs));
  }
  const PriceOptimum util = optimal_price(Objective::Utility, types, vf, options);
  const PriceOptimum rev = optimal_price(Objective::Revenue, types, vf, options);
  const double gap = vf.p_nosale() - rev.price;
  const double slope = gap > 0.0 ? vf.derivative(rev.price) : 0.0;
  return {util.value - slope * gap, util.value, rev.price,
          expected_utility(types, vf, rev.price)};
}

SingleTaskReport analyze_single_task(const Distribution& types, const ValueFunction& vf,
                                     const OptimizeOptions& options) {
  const PriceOptimum util = optimal_price(Objective::Utility, types, vf, options);
  const PriceOptimum rev = optimal_price(Objective::Revenue, types, vf, options);
  SingleTaskReport r{util.price, util.value, rev.price, rev.value, false, 0.0, std::nullopt};
  if (vf.is_sensitive()) {
    r.nosale_condition_holds = nosale_condition(types, vf).holds;
    if (r.nosale_condition_holds) r.cor45_floor = cor45_floor(types, vf, options).floor;
  }
  r.lemma44_frontier = lemma44_frontier(types, vf, options).frontier;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

FigureMember poly_member(double lambda, double tau) {
  const Distribution types = Distribution::flattened_impatience_exponential(lambda, tau);
  return {fmt::format("lambda={:g},tau={:g}", lambda, tau), lambda, tau, types,
          ValueFunction::poly(4.0, 1.0)};
}

FigureMember clinear_member(double lambda, double tau) {
  const Distribution types = Distribution::flattened_impatience_exponential(lambda, tau);
  return {fmt::format("lambda={:g},tau={:g}", lambda, tau), lambda, tau, types,
          ValueFunction::clinear(1.0, types)};
}

}  // namespace

std::vector<std::string> figure_family_names() { return {"fig2", "fig3", "fig4", "fig5", "fig6"}; }

FigureFamily figure_family(const std::string& name) {
  FigureFamily fam{name, {}};
  if (name == "fig2") {
    for (double l : {1.0, 3.0, 10.0}) fam.members.push_back(poly_member(l, 1.0));
  } else if (name == "fig3") {
    for (double t : {1.0, 0.35, 0.25}) fam.members.push_back(poly_member(10.0, t));
  } else if (name == "fig4") {
    for (double l : {1.0, 5.0, 15.0}) fam.members.push_back(clinear_member(l, 1.0));
  } else if (name == "fig5") {
    for (double t : {1.0, 0.5, 0.4}) fam.members.push_back(clinear_member(8.0, t));
  } else if (name == "fig6") {
    fam.members.push_back(clinear_member(10.0, 1.0));
    fam.members.push_back(clinear_member(20.0, 0.25));
  } else {
    throw Error(Errc::InvalidArgument, "unknown figure family '" + name + "'");
  }
  return fam;
}

FigureRow figure_row(const FigureMember& m, const OptimizeOptions& options) {
  const PriceOptimum util = optimal_price(Objective::Utility, m.types, m.vf, options);
  const PriceOptimum rev = optimal_price(Objective::Revenue, m.types, m.vf, options);
  const ValueFunction flat = ValueFunction::insensitive(m.vf.eval(rev.price));
  const PriceOptimum flat_rev = optimal_price(Objective::Revenue, m.types, flat, options);
  return {m.label,   m.lambda,    m.tau,      m.vf.p_nosale(), util.price,
          rev.price, util.value,  rev.value,  flat_rev.price};
}

std::vector<FigureRow> figure_sweep(const FigureFamily& family, const std::filesystem::path& out_dir,
                                    const OptimizeOptions& options, std::size_t curve_points,
                                    unsigned threads) {
  std::filesystem::create_directories(out_dir);
  std::vector<FigureRow> rows(family.members.size(),
                              FigureRow{"", 0, 0, 0, 0, 0, 0, 0, 0});
  parallel_for(family.members.size(), threads, [&](std::size_t i) {
    const FigureMember& m = family.members[i];
    rows[i] = figure_row(m, options);
    CsvWriter curve(out_dir / fmt::format("curve_{}_{}.csv", family.name, i),
                    {"p", "v", "U", "REV"});
    const double p_bar = m.vf.p_nosale();
    for (std::size_t k = 0; k < curve_points; ++k) {
      const double p = curve_points == 1 ? p_bar
                                         : p_bar * static_cast<double>(k) /
                                               static_cast<double>(curve_points - 1);
      curve.row({p, m.vf.eval(p), expected_utility(m.types, m.vf, p),
                 expected_revenue(m.types, m.vf, p)});
    }
    curve.close();
  });

  CsvWriter table(out_dir / (family.name + ".csv"),
                  {"param", "lambda", "tau", "p_util", "p_rev", "u_at_putil", "rev_at_prev",
                   "p_bar", "p_rev_const"});
  for (const FigureRow& r : rows) {
    table.row({r.label, r.lambda, r.tau, r.p_util, r.p_rev, r.u_at_p_util, r.rev_at_p_rev, r.p_bar,
               r.p_rev_constant});
  }
  table.close();
  return rows;
}

}  // namespace skipmon
