#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "skipmon/distribution.hpp"

namespace skipmon {

/// Per-round retention threshold law F_r on [0, inf) and the designer's discount.
struct RetentionModel {
  Distribution dist = Distribution::exponential(1.0);
  double beta = 0.99;

  /// Validates beta in (0, 1] and a support starting at 0.
  static RetentionModel make(Distribution dist, double beta);
};

struct PricingScheme {
  enum class Kind {
    KnownTypes,
    MyersonOnly,
    RetentionThresholdOnly,
    MyersonThreshold,
    ScaledMyersonThreshold,
    FixedPrice,
  };

  Kind kind = Kind::MyersonThreshold;
  double param = 1.0;  ///< scale c for ScaledMyersonThreshold, price for FixedPrice

  static PricingScheme known_types() { return {Kind::KnownTypes, 0.0}; }
  static PricingScheme myerson_only() { return {Kind::MyersonOnly, 0.0}; }
  static PricingScheme threshold_only() { return {Kind::RetentionThresholdOnly, 0.0}; }
  static PricingScheme myerson_threshold() { return {Kind::MyersonThreshold, 1.0}; }
  static PricingScheme scaled_myerson_threshold(double c);
  static PricingScheme fixed_price(double p);

  /// Short stable identifier: "known-types", "myerson", "threshold", "mt",
  /// "scaled-mt(0.5)", "fixed(0.3)".
  std::string name() const;
  /// Inverse of name() for the parameterless kinds plus "scaled-mt" / "fixed"
  /// with an explicit parameter.
  static PricingScheme parse(const std::string& name, double param = 1.0);

  friend bool operator==(const PricingScheme&, const PricingScheme&) = default;
};

struct RegularityCheck {
  bool regular;
  double worst_decrease;
  std::size_t skipped;  ///< grid points with zero retention density
};

/// Checks that x - (1 - beta F_r(v - x)) / (beta f_r(v - x)) is non-decreasing
/// on a uniform grid over [0, v].
RegularityCheck retention_regular(const RetentionModel& rm, double v, std::size_t grid_n = 1000);

struct ThresholdPrice {
  double q;
  bool binding;  ///< false when the fixed point lies above v and q was reported as v
};

/// Solves q = (1 - beta F_r(v - q)) / (beta f_r(v - q)) on [1e-12, v].
/// Throws NotRegular when the retention model fails the regularity check.
ThresholdPrice retention_threshold_price(const RetentionModel& rm, double v);

double known_types_price(double gamma, double v, double q);
double known_types_price(double gamma, double v, const RetentionModel& rm);

/// Discounted revenue from a static price p charged to a type-gamma player
/// every round: p / (1 - beta F_r(v - p)) when the player buys, else 0.
double known_types_revenue(double gamma, double v, const RetentionModel& rm, double p);

/// E_gamma of known_types_revenue at the known-types price.
double known_types_expected_revenue(const Distribution& types, double v, const RetentionModel& rm);

/// Posted price maximizing p * P(X >= p). Continuous MHR laws solve
/// p = (1 - F(p)) / f(p) by bisection; other continuous laws use a revenue
/// scan; step laws scan their atoms with ties going to the higher price.
double myerson_price(const Distribution& marginal);

struct EmpiricalMyerson {
  double price;
  std::size_t buyers;
};

/// Exact revenue maximizer over the sample points of an ascending-sorted
/// sample; ties go to the higher price.
EmpiricalMyerson empirical_myerson(std::span<const double> sorted_marginals);

/// Same scan expressed through ascending-sorted types: candidate prices are
/// (1 - gamma_i) v and buyers are the agents with gamma <= gamma_i.
EmpiricalMyerson empirical_myerson_from_types(std::span<const double> sorted_types, double v);

double mt_price(const Distribution& marginal, const RetentionModel& rm, double v, double c = 1.0);

/// Marginal law of the survivors once every type below gamma_star has churned.
Distribution truncation_update(const Distribution& marginal, double gamma_star, double v);

enum class BlockChoice { BuyNow, WaitThenBuy, Never };

struct MultiBlockOutcome {
  double revenue;
  std::vector<double> types;
  std::vector<BlockChoice> choices;
};

/// Two-block task: skipping both blocks is worth (1 - gamma^2) v at price p0,
/// skipping the last block is worth (1 - gamma) v at price p1 and its utility
/// is discounted by gamma. Ties go to the earlier purchase and to buying over
/// never. Payments count at face value. Pass p1 = inf for a single price.
MultiBlockOutcome multi_block_revenue(const Distribution& types, double v, double p0, double p1);

/// E[(1 - gamma^2) v]: the designer extracts the full two-block value.
double multi_block_known_types_revenue(const Distribution& types, double v);

struct EqualRevenueGap {
  double known_revenue;
  double best_fixed_revenue;
};

/// Equal-revenue marginal values on [1, e^c]: known types extract E[marginal]
/// while every fixed price earns 1.
EqualRevenueGap equal_revenue_gap(double c, std::size_t grid_n = 1000);

}  // namespace skipmon
