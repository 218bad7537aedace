#include "skipmon/repeat_pricing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "skipmon/error.hpp"
#include "skipmon/numeric.hpp"

namespace skipmon {

RetentionModel RetentionModel::make(Distribution dist, double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw Error(Errc::InvalidArgument, fmt::format("discount beta={:g} outside (0, 1]", beta));
  }
  if (dist.support().lo != 0.0) {
    throw Error(Errc::InvalidArgument, "retention law must have support starting at 0");
  }
  return RetentionModel{std::move(dist), beta};
}

PricingScheme PricingScheme::scaled_myerson_threshold(double c) {
  if (!(c > 0.0) || c > 1.0) throw Error(Errc::InvalidArgument, "Myerson scale must lie in (0, 1]");
  return {Kind::ScaledMyersonThreshold, c};
}

PricingScheme PricingScheme::fixed_price(double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(Errc::InvalidArgument, "fixed price must be >= 0");
  return {Kind::FixedPrice, p};
}

std::string PricingScheme::name() const {
  switch (kind) {
    case Kind::KnownTypes: return "known-types";
    case Kind::MyersonOnly: return "myerson";
    case Kind::RetentionThresholdOnly: return "threshold";
    case Kind::MyersonThreshold: return "mt";
    case Kind::ScaledMyersonThreshold: return fmt::format("scaled-mt({:g})", param);
    case Kind::FixedPrice: return fmt::format("fixed({:g})", param);
  }
  return "unknown";
}

PricingScheme PricingScheme::parse(const std::string& name, double param) {
  if (name == "known-types") return known_types();
  if (name == "myerson") return myerson_only();
  if (name == "threshold") return threshold_only();
  if (name == "mt") return myerson_threshold();
  if (name == "scaled-mt") return scaled_myerson_threshold(param);
  if (name == "fixed") return fixed_price(param);
  throw Error(Errc::InvalidArgument, "unknown pricing scheme '" + name + "'");
}

namespace {

// x - (1 - beta F_r(v - x)) / (beta f_r(v - x)); NaN where the density vanishes.
double threshold_gap(const RetentionModel& rm, double v, double x) {
  const double y = v - x;
  const double f = rm.dist.pdf(y);
  if (!(f > 0.0)) return std::nan("");
  return x - (1.0 - rm.beta * rm.dist.cdf(y)) / (rm.beta * f);
}

}  // namespace

RegularityCheck retention_regular(const RetentionModel& rm, double v, std::size_t grid_n) {
  if (grid_n < 100) throw Error(Errc::InvalidArgument, "regularity grid needs at least 100 points");
  if (!(v > 0.0)) throw Error(Errc::InvalidArgument, "value must be positive");
  RegularityCheck out{true, 0.0, 0};
  double prev = std::nan("");
  for (std::size_t i = 0; i <= grid_n; ++i) {
    const double x = v * static_cast<double>(i) / static_cast<double>(grid_n);
    const double g = threshold_gap(rm, v, x);
    if (std::isnan(g)) {
      ++out.skipped;
      continue;
    }
    if (!std::isnan(prev)) {
      const double drop = prev - g;
      if (drop > out.worst_decrease) out.worst_decrease = drop;
    }
    prev = g;
  }
  out.regular = out.worst_decrease <= 1e-9;
  return out;
}

ThresholdPrice retention_threshold_price(const RetentionModel& rm, double v) {
  const RegularityCheck check = retention_regular(rm, v);
  if (!check.regular) {
    throw Error(Errc::NotRegular, fmt::format("{} with beta={:g} is not retention-regular at v={:g}",
                                              rm.dist.describe(), rm.beta, v));
  }
  const auto gap = [&](double x) {
    const double g = threshold_gap(rm, v, x);
    return std::isnan(g) ? -numeric::kInf : g;
  };
  const double lo = 1e-12;
  if (gap(v) < 0.0) return {v, false};
  if (gap(lo) >= 0.0) return {lo, true};
  return {numeric::bisect(gap, lo, v, 1e-10).x, true};
}

double known_types_price(double gamma, double v, double q) {
  if (!(gamma >= 0.0) || gamma > 1.0) throw Error(Errc::InvalidArgument, "type must lie in [0, 1]");
  return std::min((1.0 - gamma) * v, q);
}

double known_types_price(double gamma, double v, const RetentionModel& rm) {
  return known_types_price(gamma, v, retention_threshold_price(rm, v).q);
}

double known_types_revenue(double gamma, double v, const RetentionModel& rm, double p) {
  // Relative slack so a price computed as (1 - gamma) v still sells to gamma.
  if (p > (1.0 - gamma) * v * (1.0 + 1e-12)) return 0.0;
  return p / (1.0 - rm.beta * rm.dist.cdf(v - p));
}

double known_types_expected_revenue(const Distribution& types, double v, const RetentionModel& rm) {
  const double q = retention_threshold_price(rm, v).q;
  const auto rev = [&](double gamma) {
    return known_types_revenue(gamma, v, rm, known_types_price(gamma, v, q));
  };
  if (!types.atoms().empty()) {
    double total = 0.0;
    for (double g : types.atoms()) total += rev(g) * (types.cdf(g) - types.cdf_left(g));
    return total;
  }
  const Interval s = types.support();
  // Below gamma0 the price is capped at q and the revenue is constant.
  const double gamma0 = std::clamp(1.0 - q / v, s.lo, s.hi);
  const double head = types.cdf(gamma0) * rev(s.lo);
  const double tail = gamma0 < s.hi
                          ? numeric::integrate([&](double g) { return rev(g) * types.pdf(g); },
                                               gamma0, s.hi)
                          : 0.0;
  return head + tail;
}

double myerson_price(const Distribution& marginal) {
  if (!marginal.atoms().empty()) {
    double best_p = 0.0;
    double best_rev = -1.0;
    const auto atoms = marginal.atoms();
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
      const double rev = *it * (1.0 - marginal.cdf_left(*it));
      // Revenues are probability sums here, so exact ties can differ in the
      // last bits; anything within rounding counts as a tie and keeps the higher price.
      if (rev > best_rev * (1.0 + 1e-12)) {
        best_rev = rev;
        best_p = *it;
      }
    }
    return best_p;
  }
  const Interval s = marginal.support();
  const double hi = std::isfinite(s.hi) ? s.hi : marginal.quantile(1.0 - 1e-12);
  const auto revenue = [&](double p) { return p * marginal.survival(p); };
  if (is_mhr(marginal, 1000).is_mhr) {
    const auto gap = [&](double p) {
      const double f = marginal.pdf(p);
      if (!(f > 0.0)) return p;
      return p - marginal.survival(p) / f;
    };
    const auto root = numeric::bisect(gap, s.lo, hi, 1e-12);
    if (root.bracketed) return root.x;
  }
  return numeric::grid_then_golden_max(revenue, s.lo, hi, 10000, 1e-10).x;
}

EmpiricalMyerson empirical_myerson(std::span<const double> sorted) {
  if (sorted.empty()) throw Error(Errc::EmptyPopulation, "no marginal values");
  const std::size_t n = sorted.size();
  EmpiricalMyerson best{sorted.back(), 0};
  double best_rev = -1.0;
  std::size_t i = n;
  while (i > 0) {
    const double x = sorted[i - 1];
    std::size_t first = i - 1;
    while (first > 0 && sorted[first - 1] == x) --first;
    const std::size_t buyers = n - first;
    const double rev = x * static_cast<double>(buyers);
    if (rev > best_rev) {
      best_rev = rev;
      best = {x, buyers};
    }
    i = first;
  }
  return best;
}

EmpiricalMyerson empirical_myerson_from_types(std::span<const double> types, double v) {
  if (types.empty()) throw Error(Errc::EmptyPopulation, "no agents");
  const std::size_t n = types.size();
  EmpiricalMyerson best{(1.0 - types.front()) * v, 0};
  double best_rev = -1.0;
  std::size_t i = 0;
  while (i < n) {
    const double g = types[i];
    std::size_t last = i;
    while (last + 1 < n && types[last + 1] == g) ++last;
    const double p = (1.0 - g) * v;
    const std::size_t buyers = last + 1;
    const double rev = p * static_cast<double>(buyers);
    // Ascending types means descending prices, so only a strict gain moves lower.
    if (rev > best_rev) {
      best_rev = rev;
      best = {p, buyers};
    }
    i = last + 1;
  }
  return best;
}

double mt_price(const Distribution& marginal, const RetentionModel& rm, double v, double c) {
  if (!(c > 0.0) || c > 1.0) throw Error(Errc::InvalidArgument, "Myerson scale must lie in (0, 1]");
  return std::min(retention_threshold_price(rm, v).q, c * myerson_price(marginal));
}

Distribution truncation_update(const Distribution& marginal, double gamma_star, double v) {
  if (!(gamma_star >= 0.0) || gamma_star > 1.0) {
    throw Error(Errc::InvalidArgument, "type must lie in [0, 1]");
  }
  const double top = (1.0 - gamma_star) * v;
  if (top < marginal.support().lo) throw Error(Errc::EmptyMass, "no marginal mass survives the truncation");
  return truncate(marginal, marginal.support().lo, top);
}

MultiBlockOutcome multi_block_revenue(const Distribution& types, double v, double p0, double p1) {
  const auto atoms = types.atoms();
  if (atoms.empty()) throw Error(Errc::InvalidArgument, "multi-block pricing needs a discrete type law");
  constexpr double kTie = 1e-12;
  MultiBlockOutcome out{0.0, {}, {}};
  for (double g : atoms) {
    const double prob = types.cdf(g) - types.cdf_left(g);
    const double now = (1.0 - g * g) * v - p0;
    const double wait = std::isfinite(p1) ? g * ((1.0 - g) * v - p1) : -numeric::kInf;
    const double best = std::max({now, wait, 0.0});
    BlockChoice choice = BlockChoice::Never;
    double paid = 0.0;
    if (now >= best - kTie) {
      choice = BlockChoice::BuyNow;
      paid = p0;
    } else if (wait >= best - kTie) {
      choice = BlockChoice::WaitThenBuy;
      paid = p1;
    }
    out.revenue += prob * paid;
    out.types.push_back(g);
    out.choices.push_back(choice);
  }
  return out;
}

double multi_block_known_types_revenue(const Distribution& types, double v) {
  const auto atoms = types.atoms();
  if (atoms.empty()) throw Error(Errc::InvalidArgument, "multi-block pricing needs a discrete type law");
  double total = 0.0;
  for (double g : atoms) total += (types.cdf(g) - types.cdf_left(g)) * (1.0 - g * g) * v;
  return total;
}

EqualRevenueGap equal_revenue_gap(double c, std::size_t grid_n) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "gap parameter must be positive");
  const Distribution er = Distribution::equal_revenue();
  const double top = std::exp(c);
  const double known = numeric::integrate([&](double x) { return x * er.pdf(x); }, 1.0, top);
  double best = 0.0;
  for (std::size_t i = 0; i <= grid_n; ++i) {
    const double p = 1.0 + (top - 1.0) * static_cast<double>(i) / static_cast<double>(grid_n);
    best = std::max(best, p * er.survival(p));
  }
  return {known, best};
}

}  // namespace skipmon
