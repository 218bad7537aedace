#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "skipmon/distribution.hpp"
#include "skipmon/repeat_pricing.hpp"

namespace skipmon {

enum class RetentionMode { Shared, Independent };

const char* to_string(RetentionMode mode) noexcept;

struct SimConfig {
  std::size_t n_initial = 100000;
  Distribution type_dist = Distribution::uniform_unit();
  double value = 1.0;
  RetentionModel retention;
  PricingScheme scheme;
  RetentionMode retention_mode = RetentionMode::Shared;
  double growth_rate = 0.0;  ///< recruit probability per surviving agent per round
  std::uint64_t seed = 0;
  std::size_t max_rounds = 5000;
  double revenue_eps = 0.0;  ///< stop threshold; 0 means 1e-9 * n_initial * value
  /// When the population exceeds this multiple of n_initial, half of it is
  /// dropped at random and every remaining agent counts twice. 0 disables.
  double population_cap = 2.0;
  bool record_trajectories = true;

  /// Throws ConfigInvalid on violated preconditions.
  void validate() const;
  double effective_eps() const;
};

struct SimResult {
  double discounted_revenue = 0.0;  ///< per initial capita
  std::size_t rounds_run = 0;
  std::vector<double> price_trajectory;    ///< mean price paid for known types
  std::vector<double> myerson_trajectory;  ///< empirical Myerson price; empty for schemes that skip it
  std::vector<double> alive_trajectory;    ///< weighted head count at the start of each round
  std::vector<double> buyer_trajectory;    ///< weighted buyers per round
  double final_alive_fraction = 0.0;
  double threshold_price = 0.0;
  bool threshold_binding = true;
  std::size_t thinning_events = 0;
  std::uint64_t seed_echo = 0;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Per-round view handed to an observer after retention and before recruits
/// join. Both spans are sorted by type.
struct RoundSnapshot {
  std::size_t round;
  double price;
  double retention_draw;  ///< shared draw; NaN in independent mode
  std::span<const double> alive_types;
  std::span<const double> survivor_types;
};

using RoundObserver = std::function<void(const RoundSnapshot&)>;

SimResult run(const SimConfig& config, const RoundObserver& observer = {});

/// Sorted marginal values (1 - gamma) v of the given agents.
Distribution empirical_marginal(std::span<const double> types, double v);

/// Runs configs that differ only in their pricing scheme. Every run reads the
/// same population and retention streams.
std::vector<SimResult> run_pair(const std::vector<SimConfig>& configs, unsigned threads = 1);

}  // namespace skipmon
