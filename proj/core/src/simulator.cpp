#include "skipmon/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "skipmon/error.hpp"
#include "skipmon/parallel.hpp"
#include "skipmon/rng.hpp"

namespace skipmon {

const char* to_string(RetentionMode mode) noexcept {
  return mode == RetentionMode::Shared ? "shared" : "independent";
}

void SimConfig::validate() const {
  const auto fail = [](const std::string& what) { throw Error(Errc::ConfigInvalid, what); };
  if (n_initial < 1) fail("n_initial must be at least 1");
  if (!(value > 0.0) || !std::isfinite(value)) fail("value must be positive");
  if (!(growth_rate >= 0.0) || growth_rate >= 1.0) fail("growth_rate must lie in [0, 1)");
  if (max_rounds < 1) fail("max_rounds must be at least 1");
  if (!(revenue_eps >= 0.0)) fail("revenue_eps must be non-negative");
  if (!(population_cap == 0.0 || population_cap > 1.0)) fail("population_cap must be 0 or > 1");
  if (!(retention.beta > 0.0) || retention.beta > 1.0) fail("beta must lie in (0, 1]");
  if (retention.dist.support().lo != 0.0) fail("retention law must start at 0");
  const Interval s = type_dist.support();
  if (s.lo < 0.0 || s.hi > 1.0) fail("type law must live on [0, 1]");
  if (scheme.kind == PricingScheme::Kind::FixedPrice && !(scheme.param >= 0.0)) {
    fail("fixed price must be non-negative");
  }
  if (scheme.kind == PricingScheme::Kind::ScaledMyersonThreshold &&
      (!(scheme.param > 0.0) || scheme.param > 1.0)) {
    fail("Myerson scale must lie in (0, 1]");
  }
}

double SimConfig::effective_eps() const {
  return revenue_eps > 0.0 ? revenue_eps : 1e-9 * static_cast<double>(n_initial) * value;
}

namespace {

enum Stream : std::uint64_t { kTypeStream = 1, kRetentionStream, kRecruitStream, kThinStream };
constexpr std::uint64_t kRecruitTag = 0x7265637275697473ULL;

using Kind = PricingScheme::Kind;

bool uses_threshold(Kind k) {
  return k == Kind::KnownTypes || k == Kind::RetentionThresholdOnly ||
         k == Kind::MyersonThreshold || k == Kind::ScaledMyersonThreshold;
}

bool uses_myerson(Kind k) {
  return k == Kind::MyersonOnly || k == Kind::MyersonThreshold ||
         k == Kind::ScaledMyersonThreshold;
}

// Agents sorted by type, stored column-wise. `key` seeds the agent's
// per-round draws; `keep` caches F_r of the utility an agent gets without
// buying (known types: at its own price).
struct Population {
  std::vector<double> gamma;
  std::vector<std::uint64_t> key;
  std::vector<double> keep;
  std::size_t head = 0;  // agents before head have churned

  std::size_t alive() const { return gamma.size() - head; }

  template <class Pred>
  void filter(Pred keep_agent) {
    std::size_t out = 0;
    for (std::size_t i = head; i < gamma.size(); ++i) {
      if (!keep_agent(i)) continue;
      gamma[out] = gamma[i];
      key[out] = key[i];
      keep[out] = keep[i];
      ++out;
    }
    gamma.resize(out);
    key.resize(out);
    keep.resize(out);
    head = 0;
  }
};

// Per-agent draw for round k: one mix of the agent key with a round salt.
inline double agent_uniform(std::uint64_t key, std::uint64_t salt) {
  return to_unit_open(mix64(key ^ salt));
}

class Engine {
 public:
  explicit Engine(const SimConfig& cfg) : cfg_(cfg), v_(cfg.value), beta_(cfg.retention.beta) {
    if (uses_threshold(cfg.scheme.kind)) {
      const ThresholdPrice t = retention_threshold_price(cfg.retention, v_);
      q_ = t.q;
      binding_ = t.binding;
    }
  }

  SimResult run(const RoundObserver& observer) {
    SimResult res;
    res.seed_echo = cfg_.seed;
    res.threshold_price = q_;
    res.threshold_binding = binding_;
    init_population();

    const double eps = cfg_.effective_eps();
    const double n0 = static_cast<double>(cfg_.n_initial);
    double disc = 1.0;
    double weight = 1.0;
    double revenue = 0.0;
    std::vector<double> alive_before;
    std::size_t k = 0;

    for (; k < cfg_.max_rounds; ++k) {
      const std::size_t alive = pop_.alive();
      if (alive == 0) break;
      if (disc * weight * static_cast<double>(alive) * v_ < eps) break;
      const std::span<const double> types(pop_.gamma.data() + pop_.head, alive);

      double price = 0.0;
      double myerson = 0.0;
      if (uses_myerson(cfg_.scheme.kind)) myerson = empirical_myerson_from_types(types, v_).price;
      switch (cfg_.scheme.kind) {
        case Kind::KnownTypes: break;
        case Kind::MyersonOnly: price = myerson; break;
        case Kind::RetentionThresholdOnly: price = q_; break;
        case Kind::MyersonThreshold: price = std::min(q_, myerson); break;
        case Kind::ScaledMyersonThreshold: price = std::min(q_, cfg_.scheme.param * myerson); break;
        case Kind::FixedPrice: price = std::min(cfg_.scheme.param, v_); break;
      }

      std::size_t buyers = 0;
      double payments = 0.0;
      if (cfg_.scheme.kind == Kind::KnownTypes) {
        buyers = alive;
        for (double g : types) payments += std::min((1.0 - g) * v_, q_);
        price = payments / static_cast<double>(alive);
      } else {
        const double p = price;
        const double v = v_;
        buyers = static_cast<std::size_t>(
            std::partition_point(types.begin(), types.end(),
                                 [p, v](double g) { return (1.0 - g) * v >= p; }) -
            types.begin());
        payments = price * static_cast<double>(buyers);
      }
      revenue += disc * weight * payments;

      if (cfg_.record_trajectories) {
        res.price_trajectory.push_back(price);
        if (uses_myerson(cfg_.scheme.kind)) res.myerson_trajectory.push_back(myerson);
        res.alive_trajectory.push_back(weight * static_cast<double>(alive));
        res.buyer_trajectory.push_back(weight * static_cast<double>(buyers));
      }

      if (observer) alive_before.assign(types.begin(), types.end());
      const double draw = retain(k, price, buyers);
      if (observer) {
        observer(RoundSnapshot{k, price, draw, alive_before,
                               std::span<const double>(pop_.gamma.data() + pop_.head,
                                                       pop_.alive())});
      }

      if (cfg_.growth_rate > 0.0 && pop_.alive() > 0) recruit(k);
      if (cfg_.population_cap > 0.0 &&
          static_cast<double>(pop_.alive()) > cfg_.population_cap * n0) {
        const std::uint64_t salt = hash_words(kThinStream, k);
        pop_.filter([&](std::size_t i) { return agent_uniform(pop_.key[i], salt) < 0.5; });
        weight *= 2.0;
        ++res.thinning_events;
      }
      disc *= beta_;
    }

    res.rounds_run = k;
    res.discounted_revenue = revenue / n0;
    res.final_alive_fraction = weight * static_cast<double>(pop_.alive()) / n0;
    return res;
  }

 private:
  double keep_for(double gamma) const {
    const double u = cfg_.scheme.kind == Kind::KnownTypes ? std::max(gamma * v_, v_ - q_)
                                                          : gamma * v_;
    return cfg_.retention.dist.cdf(u);
  }

  // Type and draw key of agent `id`; both depend only on the seed and the id.
  std::pair<double, std::uint64_t> make_agent(std::uint64_t id) const {
    return {cfg_.type_dist.quantile(uniform_at(cfg_.seed, kTypeStream, id)),
            hash_words(cfg_.seed, id)};
  }

  void init_population() {
    const std::size_t n = cfg_.n_initial;
    std::vector<std::pair<double, std::uint64_t>> agents(n);
    for (std::size_t i = 0; i < n; ++i) agents[i] = make_agent(i);
    std::sort(agents.begin(), agents.end());
    pop_.gamma.resize(n);
    pop_.key.resize(n);
    pop_.keep.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pop_.gamma[i] = agents[i].first;
      pop_.key[i] = agents[i].second;
    }
    if (cfg_.retention_mode == RetentionMode::Independent) {
      for (std::size_t i = 0; i < n; ++i) pop_.keep[i] = keep_for(pop_.gamma[i]);
    }
  }

  // Applies round-k retention and returns the shared draw (NaN when independent).
  double retain(std::size_t k, double price, std::size_t buyers) {
    const bool known = cfg_.scheme.kind == Kind::KnownTypes;
    if (cfg_.retention_mode == RetentionMode::Shared) {
      const double r = cfg_.retention.dist.quantile(uniform_at(cfg_.seed, kRetentionStream, k));
      const double floor = known ? v_ - q_ : v_ - price;
      const double v = v_;
      // Utility max(gamma v, floor) is non-decreasing in gamma, so survivors form a suffix.
      const auto first = pop_.gamma.begin() + static_cast<std::ptrdiff_t>(pop_.head);
      const auto cut = std::partition_point(
          first, pop_.gamma.end(), [&](double g) { return std::max(g * v, floor) < r; });
      pop_.head += static_cast<std::size_t>(cut - first);
      return r;
    }
    const double keep_buyer = cfg_.retention.dist.cdf(v_ - price);
    const std::size_t buyer_end = pop_.head + buyers;
    const std::uint64_t salt = hash_words(kRetentionStream, k);
    pop_.filter([&](std::size_t i) {
      const double p_keep = known || i >= buyer_end ? pop_.keep[i] : keep_buyer;
      return agent_uniform(pop_.key[i], salt) <= p_keep;
    });
    return std::nan("");
  }

  void recruit(std::size_t k) {
    Rng rng(hash_words(cfg_.seed, kRecruitStream, k));
    std::binomial_distribution<std::uint64_t> count(pop_.alive(), cfg_.growth_rate);
    const std::size_t m = static_cast<std::size_t>(count(rng));
    if (m == 0) return;
    std::vector<std::pair<double, std::uint64_t>> fresh(m);
    for (std::size_t j = 0; j < m; ++j) fresh[j] = make_agent(hash_words(kRecruitTag, k, j));
    std::sort(fresh.begin(), fresh.end());

    const bool indep = cfg_.retention_mode == RetentionMode::Independent;
    const std::size_t old_begin = pop_.head;
    const std::size_t old_end = pop_.gamma.size();
    const std::size_t total = old_end - old_begin + m;
    scratch_.gamma.resize(total);
    scratch_.key.resize(total);
    scratch_.keep.resize(total);
    std::size_t a = old_begin;
    std::size_t b = 0;
    for (std::size_t out = 0; out < total; ++out) {
      if (b == m || (a < old_end && pop_.gamma[a] <= fresh[b].first)) {
        scratch_.gamma[out] = pop_.gamma[a];
        scratch_.key[out] = pop_.key[a];
        scratch_.keep[out] = pop_.keep[a];
        ++a;
      } else {
        scratch_.gamma[out] = fresh[b].first;
        scratch_.key[out] = fresh[b].second;
        scratch_.keep[out] = indep ? keep_for(fresh[b].first) : 0.0;
        ++b;
      }
    }
    scratch_.head = 0;
    std::swap(pop_, scratch_);
  }

  const SimConfig& cfg_;
  double v_;
  double beta_;
  double q_ = 0.0;
  bool binding_ = false;
  Population pop_;
  Population scratch_;
};

bool same_except_scheme(const SimConfig& a, const SimConfig& b) {
  return a.n_initial == b.n_initial && a.type_dist.describe() == b.type_dist.describe() &&
         a.value == b.value && a.retention.dist.describe() == b.retention.dist.describe() &&
         a.retention.beta == b.retention.beta && a.retention_mode == b.retention_mode &&
         a.growth_rate == b.growth_rate && a.seed == b.seed && a.max_rounds == b.max_rounds &&
         a.revenue_eps == b.revenue_eps && a.population_cap == b.population_cap;
}

}  // namespace

SimResult run(const SimConfig& config, const RoundObserver& observer) {
  config.validate();
  Engine engine(config);
  return engine.run(observer);
}

Distribution empirical_marginal(std::span<const double> types, double v) {
  if (types.empty()) throw Error(Errc::EmptyPopulation, "no alive agents");
  std::vector<double> m(types.size());
  std::transform(types.begin(), types.end(), m.begin(), [v](double g) { return (1.0 - g) * v; });
  return Distribution::empirical(std::move(m));
}

std::vector<SimResult> run_pair(const std::vector<SimConfig>& configs, unsigned threads) {
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (!same_except_scheme(configs[0], configs[i])) {
      throw Error(Errc::MismatchedConfigs,
                  fmt::format("config {} differs from config 0 in more than the scheme", i));
    }
  }
  std::vector<SimResult> out(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) { out[i] = run(configs[i]); });
  return out;
}

}  // namespace skipmon
