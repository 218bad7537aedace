#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "errc.hpp"
#include "oracles.hpp"
#include "skipmon/simulator.hpp"

using namespace skipmon;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.n_initial = 20000;
  c.type_dist = Distribution::uniform_unit();
  c.retention = RetentionModel::make(Distribution::exponential(3.0), 0.99);
  c.seed = 12345;
  c.max_rounds = 2000;
  return c;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double stderr_of(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

// Closed-form known-types revenue integrated with Simpson over uniform types and Exp(lambda) retention.
double known_types_closed_form(double lambda, double beta) {
  const double q = retention_threshold_price(RetentionModel::make(Distribution::exponential(lambda), beta), 1.0).q;
  return oracle::known_types_expected([](double) { return 1.0; },
                                      [&](double x) { return oracle::exp_cdf(lambda, x); }, beta, 1.0, q);
}

}  // namespace

TEST(Simulator, ValidationRejectsBadConfigs) {
  auto c = base_config();
  c.n_initial = 0;
  EXPECT_ERRC(run(c), Errc::ConfigInvalid);
  c = base_config();
  c.growth_rate = 1.0;
  EXPECT_ERRC(run(c), Errc::ConfigInvalid);
  c = base_config();
  c.value = 0.0;
  EXPECT_ERRC(run(c), Errc::ConfigInvalid);
  c = base_config();
  c.type_dist = Distribution::exponential(1.0);
  EXPECT_ERRC(run(c), Errc::ConfigInvalid);
  c = base_config();
  c.max_rounds = 0;
  EXPECT_ERRC(run(c), Errc::ConfigInvalid);
}

TEST(Simulator, OneRoundFixedPrice) {
  auto c = base_config();
  c.n_initial = 1000000;
  // Small enough that the second round falls under the stop bound.
  c.retention = RetentionModel::make(Distribution::exponential(3.0), 1e-12);
  for (double p : {0.2, 0.5, 0.8}) {
    c.scheme = PricingScheme::fixed_price(p);
    const auto r = run(c);
    EXPECT_EQ(r.rounds_run, 1u);
    const double se = p * std::sqrt(p * (1.0 - p) / 1e6);
    EXPECT_NEAR(r.discounted_revenue, p * (1.0 - p), 5.0 * se) << p;
  }
}

TEST(Simulator, Deterministic) {
  auto c = base_config();
  c.growth_rate = 0.01;
  for (auto mode : {RetentionMode::Shared, RetentionMode::Independent}) {
    c.retention_mode = mode;
    const auto a = run(c);
    const auto b = run(c);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.seed_echo, c.seed);
    auto d = c;
    d.seed = c.seed + 1;
    EXPECT_NE(run(d).discounted_revenue, a.discounted_revenue);
  }
}

TEST(Simulator, TrajectoriesShareLength) {
  for (auto scheme : {PricingScheme::myerson_threshold(), PricingScheme::known_types(), PricingScheme::threshold_only()}) {
    auto c = base_config();
    c.scheme = scheme;
    const auto r = run(c);
    EXPECT_GE(r.discounted_revenue, 0.0);
    EXPECT_EQ(r.price_trajectory.size(), r.rounds_run);
    EXPECT_EQ(r.alive_trajectory.size(), r.rounds_run);
    EXPECT_EQ(r.buyer_trajectory.size(), r.rounds_run);
    EXPECT_EQ(r.myerson_trajectory.size(), scheme.kind == PricingScheme::Kind::MyersonThreshold ? r.rounds_run : 0u);
    EXPECT_LE(r.discounted_revenue, 1.0 / (1.0 - c.retention.beta));
  }
}

TEST(Simulator, AliveNonIncreasingWithoutGrowth) {
  for (auto mode : {RetentionMode::Shared, RetentionMode::Independent}) {
    auto c = base_config();
    c.retention_mode = mode;
    const auto r = run(c);
    for (std::size_t k = 1; k < r.alive_trajectory.size(); ++k) {
      EXPECT_LE(r.alive_trajectory[k], r.alive_trajectory[k - 1]);
    }
  }
}

TEST(Simulator, SharedSurvivorsAreAnUpperSet) {
  auto c = base_config();
  c.retention = RetentionModel::make(Distribution::exponential(1.0), 0.99);
  c.n_initial = 2000;
  std::size_t checked = 0;
  const auto observer = [&](const RoundSnapshot& s) {
    ASSERT_LE(s.survivor_types.size(), s.alive_types.size());
    const std::size_t cut = s.alive_types.size() - s.survivor_types.size();
    // Survivors are exactly the top of the sorted alive list.
    EXPECT_TRUE(std::equal(s.survivor_types.begin(), s.survivor_types.end(), s.alive_types.begin() + static_cast<std::ptrdiff_t>(cut)));
    if (cut > 0 && !s.survivor_types.empty()) {
      EXPECT_GE(s.survivor_types.front(), s.alive_types[cut - 1]);
      // The survivors' marginal is the previous one right-truncated at (1 - gamma*) v.
      const auto before = empirical_marginal(s.alive_types, 1.0);
      const auto after = empirical_marginal(s.survivor_types, 1.0);
      const double top = 1.0 - s.survivor_types.front();
      EXPECT_DOUBLE_EQ(after.support().hi, top);
      for (double x : {0.1 * top, 0.5 * top, 0.9 * top}) {
        EXPECT_NEAR(after.cdf(x), before.cdf(x) / before.cdf(top), 1e-12);
      }
    }
    EXPECT_FALSE(std::isnan(s.retention_draw));
    ++checked;
  };
  // A shared Exp(1) draw often ends the population early, so pool seeds.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    c.seed = seed;
    run(c, observer);
  }
  EXPECT_GT(checked, 5u);
}

TEST(Simulator, MtPriceIsBelowBothRulesEveryRound) {
  for (auto mode : {RetentionMode::Shared, RetentionMode::Independent}) {
    auto c = base_config();
    c.retention_mode = mode;
    c.growth_rate = 0.01;
    const auto r = run(c);
    ASSERT_EQ(r.myerson_trajectory.size(), r.price_trajectory.size());
    for (std::size_t k = 0; k < r.rounds_run; ++k) {
      EXPECT_LE(r.price_trajectory[k], r.threshold_price);
      EXPECT_LE(r.price_trajectory[k], r.myerson_trajectory[k]);
      EXPECT_DOUBLE_EQ(r.price_trajectory[k], std::min(r.threshold_price, r.myerson_trajectory[k]));
    }
  }
}

// Each agent survives a round with probability F_r(utility): chi-square over type bins.
TEST(Simulator, IndependentSurvivalMatchesRetentionLaw) {
  auto c = base_config();
  c.n_initial = 100000;
  c.retention_mode = RetentionMode::Independent;
  c.retention = RetentionModel::make(Distribution::exponential(2.0), 0.99);
  c.scheme = PricingScheme::fixed_price(0.4);
  c.max_rounds = 1;
  constexpr int kBins = 20;
  std::vector<double> expected(kBins, 0.0);
  std::vector<double> variance(kBins, 0.0);
  std::vector<double> observed(kBins, 0.0);
  const auto bin = [](double g) { return std::min(kBins - 1, static_cast<int>(g * kBins)); };
  run(c, [&](const RoundSnapshot& s) {
    EXPECT_TRUE(std::isnan(s.retention_draw));
    for (double g : s.alive_types) {
      const double u = std::max(g, 1.0 - s.price);
      const double p = oracle::exp_cdf(2.0, u);
      expected[bin(g)] += p;
      variance[bin(g)] += p * (1.0 - p);
    }
    for (double g : s.survivor_types) observed[bin(g)] += 1.0;
  });
  double chi2 = 0.0;
  for (int b = 0; b < kBins; ++b) chi2 += (observed[b] - expected[b]) * (observed[b] - expected[b]) / variance[b];
  const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(kBins), chi2));
  EXPECT_GT(p_value, 0.01) << "chi2=" << chi2;
}

TEST(Simulator, KnownTypesSharedMatchesClosedFormOnAverage) {
  auto c = base_config();
  c.scheme = PricingScheme::known_types();
  c.retention = RetentionModel::make(Distribution::exponential(2.0), 0.99);
  c.n_initial = 5000;
  std::vector<double> revs;
  for (std::uint64_t s = 0; s < 60; ++s) {
    c.seed = 1000 + s;
    revs.push_back(run(c).discounted_revenue);
  }
  const double expected = known_types_closed_form(2.0, 0.99);
  EXPECT_NEAR(mean(revs), expected, 4.0 * stderr_of(revs)) << "se=" << stderr_of(revs);
}

TEST(Simulator, KnownTypesIndependentMatchesClosedForm) {
  auto c = base_config();
  c.scheme = PricingScheme::known_types();
  c.retention_mode = RetentionMode::Independent;
  c.retention = RetentionModel::make(Distribution::exponential(2.0), 0.99);
  c.n_initial = 200000;
  const double expected = known_types_closed_form(2.0, 0.99);
  const auto r = run(c);
  EXPECT_NEAR(r.discounted_revenue, expected, 0.01 * expected);
  EXPECT_NEAR(known_types_expected_revenue(Distribution::uniform_unit(), 1.0, c.retention), expected, 1e-6 * expected);
}

TEST(Simulator, RecruitsJoinNextRound) {
  auto c = base_config();
  c.growth_rate = 0.05;
  c.max_rounds = 30;
  std::vector<std::size_t> survivors;
  const auto r = run(c, [&](const RoundSnapshot& s) { survivors.push_back(s.survivor_types.size()); });
  ASSERT_EQ(survivors.size(), r.rounds_run);
  bool grew = false;
  for (std::size_t k = 0; k + 1 < r.rounds_run; ++k) {
    EXPECT_GE(r.alive_trajectory[k + 1], static_cast<double>(survivors[k]));
    grew = grew || r.alive_trajectory[k + 1] > static_cast<double>(survivors[k]);
  }
  EXPECT_TRUE(grew);
}

TEST(Simulator, ThinningKeepsRevenueUnbiased) {
  auto c = base_config();
  c.n_initial = 4000;
  c.retention_mode = RetentionMode::Independent;
  c.retention = RetentionModel::make(Distribution::exponential(5.0), 0.97);
  c.growth_rate = 0.05;
  c.max_rounds = 80;
  std::vector<double> thin;
  std::vector<double> full;
  std::size_t events = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    c.seed = 500 + s;
    c.population_cap = 1.5;
    const auto a = run(c);
    events += a.thinning_events;
    thin.push_back(a.discounted_revenue);
    c.population_cap = 0.0;
    const auto b = run(c);
    EXPECT_EQ(b.thinning_events, 0u);
    full.push_back(b.discounted_revenue);
  }
  EXPECT_GT(events, 0u);
  const double se = std::hypot(stderr_of(thin), stderr_of(full));
  EXPECT_NEAR(mean(thin), mean(full), 4.0 * se + 1e-3 * mean(full));
}

TEST(Simulator, StopsWhenDiscountedTailIsNegligible) {
  auto c = base_config();
  c.retention = RetentionModel::make(Distribution::exponential(20.0), 0.5);
  c.scheme = PricingScheme::fixed_price(0.0);
  const auto r = run(c);
  // Nobody churns in practice, so the run stops once 0.5^k < 1e-9.
  EXPECT_EQ(r.rounds_run, 30u);
}

TEST(EmpiricalMarginal, Examples) {
  const std::vector<double> one = {0.3};
  const auto m = empirical_marginal(one, 1.0);
  EXPECT_DOUBLE_EQ(m.cdf(0.7), 1.0);
  EXPECT_DOUBLE_EQ(m.cdf_left(0.7), 0.0);
  EXPECT_ERRC(empirical_marginal(std::vector<double>{}, 1.0), Errc::EmptyPopulation);

  auto c = base_config();
  c.n_initial = 1000000;
  c.max_rounds = 1;
  run(c, [&](const RoundSnapshot& s) {
    std::vector<double> marg(s.alive_types.size());
    std::transform(s.alive_types.rbegin(), s.alive_types.rend(), marg.begin(), [](double g) { return 1.0 - g; });
    EXPECT_LT(oracle::ks_distance(marg, [](double x) { return x; }), 0.005);
  });
}

TEST(RunPair, SameSchemeTwiceIsIdentical) {
  auto c = base_config();
  c.growth_rate = 0.01;
  const auto r = run_pair({c, c}, 2);
  EXPECT_EQ(r[0], r[1]);
}

TEST(RunPair, RejectsMismatchedConfigs) {
  auto a = base_config();
  auto b = base_config();
  b.seed += 1;
  EXPECT_ERRC(run_pair({a, b}), Errc::MismatchedConfigs);
  b = base_config();
  b.retention = RetentionModel::make(Distribution::exponential(5.0), 0.99);
  EXPECT_ERRC(run_pair({a, b}), Errc::MismatchedConfigs);
}

// With a non-binding threshold MT reduces to Myerson pricing.
TEST(RunPair, MtEqualsMyersonWhenThresholdIsLoose) {
  auto c = base_config();
  c.retention = RetentionModel::make(Distribution::exponential(1.0), 0.97);
  auto m = c;
  m.scheme = PricingScheme::myerson_only();
  const auto r = run_pair({c, m});
  EXPECT_FALSE(r[0].threshold_binding);
  EXPECT_EQ(r[0].price_trajectory, r[1].price_trajectory);
  EXPECT_DOUBLE_EQ(r[0].discounted_revenue, r[1].discounted_revenue);
}

// With q below every round's Myerson price MT reduces to threshold pricing.
TEST(RunPair, MtEqualsThresholdWhenThresholdBinds) {
  auto c = base_config();
  c.retention = RetentionModel::make(Distribution::exponential(5.0), 0.999);
  c.max_rounds = 15;
  auto t = c;
  t.scheme = PricingScheme::threshold_only();
  const auto r = run_pair({c, t});
  const bool binds_every_round = std::all_of(r[0].myerson_trajectory.begin(), r[0].myerson_trajectory.end(),
                                             [&](double m) { return m >= r[0].threshold_price; });
  ASSERT_TRUE(binds_every_round);
  EXPECT_EQ(r[0].price_trajectory, r[1].price_trajectory);
  EXPECT_DOUBLE_EQ(r[0].discounted_revenue, r[1].discounted_revenue);
}

TEST(RunPair, CommonRandomNumbersAcrossSchemes) {
  // The first-round population and shared draw are the same for every scheme.
  auto a = base_config();
  auto b = a;
  b.scheme = PricingScheme::threshold_only();
  std::vector<double> draws_a;
  std::vector<double> draws_b;
  run(a, [&](const RoundSnapshot& s) { draws_a.push_back(s.retention_draw); });
  run(b, [&](const RoundSnapshot& s) { draws_b.push_back(s.retention_draw); });
  const std::size_t n = std::min(draws_a.size(), draws_b.size());
  ASSERT_GT(n, 0u);
  for (std::size_t k = 0; k < n; ++k) EXPECT_DOUBLE_EQ(draws_a[k], draws_b[k]);
}
