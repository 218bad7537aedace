#include "skipmon/distribution.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skipmon/error.hpp"
#include "skipmon/numeric.hpp"

namespace skipmon {
namespace detail {

class Law {
 public:
  virtual ~Law() = default;

  virtual DistKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual Interval support() const = 0;
  virtual bool continuous() const { return true; }
  virtual double cdf(double x) const = 0;
  virtual double cdf_left(double x) const { return cdf(x); }
  virtual double survival(double x) const { return 1.0 - cdf(x); }
  /// P(X >= x)
  double survival_closed(double x) const {
    return continuous() ? survival(x) : 1.0 - cdf_left(x);
  }
  virtual double pdf(double x) const = 0;
  virtual double quantile(double u) const { return quantile_by_bisection(u); }
  virtual std::span<const double> atoms() const { return {}; }

  virtual double mean() const {
    const Interval s = support();
    return s.lo + numeric::integrate([this](double x) { return survival(x); }, s.lo, s.hi);
  }

  double quantile_by_bisection(double u) const {
    const Interval s = support();
    if (u <= 0.0) return s.lo;
    double hi = s.hi;
    if (std::isinf(hi)) {
      hi = std::max(1.0, s.lo + 1.0);
      while (cdf(hi) < u && hi < 1e300) hi *= 2.0;
    }
    if (u >= 1.0) return hi;
    double lo = s.lo;
    while (hi - lo > 1e-10 * std::max(1.0, std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      if (cdf(mid) >= u) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
};

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

class UniformLaw final : public Law {
 public:
  UniformLaw(double lo, double hi) : lo_(lo), hi_(hi) {}
  DistKind kind() const override { return DistKind::Uniform; }
  std::string describe() const override {
    if (lo_ == 0.0 && hi_ == 1.0) return "uniform_unit";
    return fmt::format("uniform({:g},{:g})", lo_, hi_);
  }
  Interval support() const override { return {lo_, hi_}; }
  double cdf(double x) const override { return clamp01((x - lo_) / (hi_ - lo_)); }
  double survival(double x) const override { return clamp01((hi_ - x) / (hi_ - lo_)); }
  double pdf(double x) const override { return (x < lo_ || x > hi_) ? 0.0 : 1.0 / (hi_ - lo_); }
  double quantile(double u) const override { return lo_ + clamp01(u) * (hi_ - lo_); }
  double mean() const override { return 0.5 * (lo_ + hi_); }

 private:
  double lo_;
  double hi_;
};

/// Law of the type gamma on [0,1] whose impatience 1 - gamma has density
/// proportional to rate * exp(-rate * x) on [0, tau] and constant beyond tau.
class ImpatienceLaw final : public Law {
 public:
  ImpatienceLaw(double rate, double tau) : rate_(rate), tau_(tau) {
    tail_density_ = rate_ * std::exp(-rate_ * tau_);
    norm_ = -std::expm1(-rate_ * tau_) + tail_density_ * (1.0 - tau_);
    head_mass_ = -std::expm1(-rate_ * tau_) / norm_;
  }

  DistKind kind() const override {
    return tau_ >= 1.0 ? DistKind::ImpatienceExponential
                       : DistKind::FlattenedTailImpatienceExponential;
  }
  std::string describe() const override {
    if (tau_ >= 1.0) return fmt::format("impatience_exponential(lambda={:g})", rate_);
    return fmt::format("flattened_impatience_exponential(lambda={:g},tau={:g})", rate_, tau_);
  }
  Interval support() const override { return {0.0, 1.0}; }

  double cdf(double g) const override {
    if (g <= 0.0) return 0.0;
    if (g >= 1.0) return 1.0;
    return 1.0 - impatience_cdf(1.0 - g);
  }
  double survival(double g) const override {
    if (g <= 0.0) return 1.0;
    if (g >= 1.0) return 0.0;
    return impatience_cdf(1.0 - g);
  }
  double pdf(double g) const override {
    if (g < 0.0 || g > 1.0) return 0.0;
    const double x = 1.0 - g;
    return (x <= tau_ ? rate_ * std::exp(-rate_ * x) : tail_density_) / norm_;
  }
  double quantile(double u) const override {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return std::clamp(1.0 - impatience_quantile(1.0 - u), 0.0, 1.0);
  }

 private:
  double impatience_cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x <= tau_) return -std::expm1(-rate_ * x) / norm_;
    return head_mass_ + tail_density_ * (x - tau_) / norm_;
  }
  double impatience_quantile(double w) const {
    if (w <= head_mass_) return -std::log1p(-w * norm_) / rate_;
    return std::min(1.0, tau_ + (w - head_mass_) * norm_ / tail_density_);
  }

  double rate_;
  double tau_;
  double tail_density_;
  double norm_;
  double head_mass_;
};

class ExponentialLaw final : public Law {
 public:
  explicit ExponentialLaw(double rate) : rate_(rate) {}
  DistKind kind() const override { return DistKind::Exponential; }
  std::string describe() const override { return fmt::format("exponential(lambda={:g})", rate_); }
  Interval support() const override { return {0.0, numeric::kInf}; }
  double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
  double survival(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
  double pdf(double x) const override { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }
  double quantile(double u) const override {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return numeric::kInf;
    return -std::log1p(-u) / rate_;
  }
  double mean() const override { return 1.0 / rate_; }

 private:
  double rate_;
};

class LomaxLaw final : public Law {
 public:
  explicit LomaxLaw(double alpha) : alpha_(alpha) {}
  DistKind kind() const override { return DistKind::Lomax; }
  std::string describe() const override { return fmt::format("lomax(alpha={:g})", alpha_); }
  Interval support() const override { return {0.0, numeric::kInf}; }
  double cdf(double x) const override { return x <= 0.0 ? 0.0 : 1.0 - survival(x); }
  double survival(double x) const override {
    return x <= 0.0 ? 1.0 : std::pow(1.0 + x, -alpha_);
  }
  double pdf(double x) const override {
    return x < 0.0 ? 0.0 : alpha_ * std::pow(1.0 + x, -alpha_ - 1.0);
  }
  double quantile(double u) const override {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return numeric::kInf;
    return std::pow(1.0 - u, -1.0 / alpha_) - 1.0;
  }
  double mean() const override { return 1.0 / (alpha_ - 1.0); }

 private:
  double alpha_;
};

class EqualRevenueLaw final : public Law {
 public:
  DistKind kind() const override { return DistKind::EqualRevenue; }
  std::string describe() const override { return "equal_revenue"; }
  Interval support() const override { return {1.0, numeric::kInf}; }
  double cdf(double x) const override { return x <= 1.0 ? 0.0 : 1.0 - 1.0 / x; }
  double survival(double x) const override { return x <= 1.0 ? 1.0 : 1.0 / x; }
  double pdf(double x) const override { return x < 1.0 ? 0.0 : 1.0 / (x * x); }
  double quantile(double u) const override {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return numeric::kInf;
    return 1.0 / (1.0 - u);
  }
  double mean() const override { return numeric::kInf; }
};

/// Finite-support step law; backs both the discrete and empirical kinds.
class StepLaw final : public Law {
 public:
  StepLaw(DistKind kind, std::vector<double> values, std::vector<double> cumulative)
      : kind_(kind), values_(std::move(values)), cumulative_(std::move(cumulative)) {}

  DistKind kind() const override { return kind_; }
  std::string describe() const override {
    if (kind_ == DistKind::Empirical) return fmt::format("empirical(n={})", sample_count_);
    return fmt::format("discrete(atoms={})", values_.size());
  }
  Interval support() const override { return {values_.front(), values_.back()}; }
  bool continuous() const override { return false; }

  double cdf(double x) const override {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }
  double cdf_left(double x) const override {
    const auto it = std::lower_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }
  double pdf(double) const override {
    throw Error(Errc::InvalidArgument, "pdf is undefined for " + describe());
  }
  double quantile(double u) const override {
    if (u <= 0.0) return values_.front();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u - 1e-15);
    if (it == cumulative_.end()) return values_.back();
    return values_[static_cast<std::size_t>(it - cumulative_.begin())];
  }
  double mean() const override {
    double m = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      m += values_[i] * (cumulative_[i] - prev);
      prev = cumulative_[i];
    }
    return m;
  }
  std::span<const double> atoms() const override { return values_; }

  std::size_t sample_count_ = 0;

 private:
  DistKind kind_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

class TruncatedLaw final : public Law {
 public:
  TruncatedLaw(std::shared_ptr<const Law> base, double a, double b)
      : base_(std::move(base)), a_(a), b_(b) {
    below_ = base_->cdf_left(a_);
    mass_ = base_->cdf(b_) - below_;
    upper_survival_ = base_->survival(b_);
  }

  double mass() const { return mass_; }

  DistKind kind() const override { return DistKind::Truncated; }
  std::string describe() const override {
    return fmt::format("truncated({},{:g},{:g})", base_->describe(), a_, b_);
  }
  Interval support() const override {
    const Interval s = base_->support();
    return {std::max(a_, s.lo), std::min(b_, s.hi)};
  }
  bool continuous() const override { return base_->continuous(); }
  double cdf(double x) const override {
    if (x < a_) return 0.0;
    if (x >= b_) return 1.0;
    return clamp01((base_->cdf(x) - below_) / mass_);
  }
  double cdf_left(double x) const override {
    if (x <= a_) return 0.0;
    if (x > b_) return 1.0;
    return clamp01((base_->cdf_left(x) - below_) / mass_);
  }
  double survival(double x) const override {
    if (x < a_) return 1.0;
    if (x >= b_) return 0.0;
    return clamp01((base_->survival(x) - upper_survival_) / mass_);
  }
  double pdf(double x) const override {
    if (x < a_ || x > b_) return 0.0;
    return base_->pdf(x) / mass_;
  }
  double quantile(double u) const override {
    const Interval s = support();
    return std::clamp(base_->quantile(below_ + clamp01(u) * mass_), s.lo, s.hi);
  }
  std::span<const double> atoms() const override { return {}; }

 private:
  std::shared_ptr<const Law> base_;
  double a_;
  double b_;
  double below_;
  double mass_;
  double upper_survival_;
};

/// Law of shift + scale * X.
class AffineLaw final : public Law {
 public:
  AffineLaw(std::shared_ptr<const Law> base, double shift, double scale)
      : base_(std::move(base)), shift_(shift), scale_(scale) {}

  DistKind kind() const override { return DistKind::Affine; }
  std::string describe() const override {
    return fmt::format("affine({:g}+{:g}*{})", shift_, scale_, base_->describe());
  }
  Interval support() const override {
    const Interval s = base_->support();
    const double x = shift_ + scale_ * s.lo;
    const double y = shift_ + scale_ * s.hi;
    return {std::min(x, y), std::max(x, y)};
  }
  bool continuous() const override { return base_->continuous(); }
  double cdf(double y) const override {
    const double z = (y - shift_) / scale_;
    return scale_ > 0.0 ? base_->cdf(z) : base_->survival_closed(z);
  }
  double cdf_left(double y) const override {
    const double z = (y - shift_) / scale_;
    return scale_ > 0.0 ? base_->cdf_left(z) : base_->survival(z);
  }
  double survival(double y) const override {
    const double z = (y - shift_) / scale_;
    return scale_ > 0.0 ? base_->survival(z) : base_->cdf_left(z);
  }
  double pdf(double y) const override {
    return base_->pdf((y - shift_) / scale_) / std::abs(scale_);
  }
  double quantile(double u) const override {
    if (scale_ > 0.0) return shift_ + scale_ * base_->quantile(u);
    if (base_->continuous()) return shift_ + scale_ * base_->quantile(1.0 - u);
    return quantile_by_bisection(u);
  }
  double mean() const override { return shift_ + scale_ * base_->mean(); }

 private:
  std::shared_ptr<const Law> base_;
  double shift_;
  double scale_;
};

}  // namespace
}  // namespace detail

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::InvalidArgument, what);
}

}  // namespace

Distribution Distribution::uniform_unit() { return uniform(0.0, 1.0); }

Distribution Distribution::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "uniform needs finite lo < hi");
  return Distribution(std::make_shared<detail::UniformLaw>(lo, hi));
}

Distribution Distribution::impatience_exponential(double rate) {
  return flattened_impatience_exponential(rate, 1.0);
}

Distribution Distribution::flattened_impatience_exponential(double rate, double tau) {
  require(rate > 0.0 && std::isfinite(rate), "impatience rate must be positive");
  require(tau > 0.0 && tau <= 1.0, "flattening cut tau must lie in (0, 1]");
  return Distribution(std::make_shared<detail::ImpatienceLaw>(rate, tau));
}

Distribution Distribution::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential rate must be positive");
  return Distribution(std::make_shared<detail::ExponentialLaw>(rate));
}

Distribution Distribution::lomax(double alpha) {
  require(alpha > 1.0 && std::isfinite(alpha), "lomax shape must exceed 1");
  return Distribution(std::make_shared<detail::LomaxLaw>(alpha));
}

Distribution Distribution::equal_revenue() {
  return Distribution(std::make_shared<detail::EqualRevenueLaw>());
}

Distribution Distribution::discrete(std::vector<double> values, std::vector<double> probabilities) {
  require(!values.empty() && values.size() == probabilities.size(),
          "discrete law needs matching non-empty values and probabilities");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  double total = 0.0;
  for (double p : probabilities) {
    require(p >= 0.0 && std::isfinite(p), "probabilities must be non-negative");
    total += p;
  }
  require(std::abs(total - 1.0) < 1e-9, "probabilities must sum to 1");
  std::vector<double> atoms;
  std::vector<double> cumulative;
  double running = 0.0;
  for (std::size_t i : order) {
    running += probabilities[i] / total;
    if (!atoms.empty() && atoms.back() == values[i]) {
      cumulative.back() = running;
    } else {
      atoms.push_back(values[i]);
      cumulative.push_back(running);
    }
  }
  cumulative.back() = 1.0;
  return Distribution(std::make_shared<detail::StepLaw>(DistKind::Discrete, std::move(atoms),
                                                        std::move(cumulative)));
}

Distribution Distribution::two_point(double a, double prob_a, double b, double prob_b) {
  return discrete({a, b}, {prob_a, prob_b});
}

Distribution Distribution::empirical(std::vector<double> samples) {
  require(!samples.empty(), "empirical law needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<double> atoms;
  std::vector<double> cumulative;
  atoms.reserve(samples.size());
  cumulative.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = static_cast<double>(i + 1) / n;
    if (!atoms.empty() && atoms.back() == samples[i]) {
      cumulative.back() = c;
    } else {
      atoms.push_back(samples[i]);
      cumulative.push_back(c);
    }
  }
  auto law = std::make_shared<detail::StepLaw>(DistKind::Empirical, std::move(atoms),
                                               std::move(cumulative));
  law->sample_count_ = samples.size();
  return Distribution(std::move(law));
}

DistKind Distribution::kind() const { return law_->kind(); }
std::string Distribution::describe() const { return law_->describe(); }
Interval Distribution::support() const { return law_->support(); }
bool Distribution::is_continuous() const { return law_->continuous(); }
double Distribution::cdf(double x) const { return law_->cdf(x); }
double Distribution::cdf_left(double x) const { return law_->cdf_left(x); }
double Distribution::survival(double x) const { return law_->survival(x); }
double Distribution::pdf(double x) const { return law_->pdf(x); }
double Distribution::quantile(double u) const { return law_->quantile(u); }
double Distribution::quantile_by_bisection(double u) const {
  return law_->quantile_by_bisection(u);
}
double Distribution::mean() const { return law_->mean(); }
std::span<const double> Distribution::atoms() const { return law_->atoms(); }

Distribution Distribution::truncated(double a, double b) const {
  require(a < b, "truncation needs a < b");
  const double mass = cdf(b) - cdf_left(a);
  if (!(mass > 0.0)) {
    throw Error(Errc::EmptyMass, fmt::format("no mass on [{:g}, {:g}] for {}", a, b, describe()));
  }
  const Interval s = support();
  if (a <= s.lo && b >= s.hi) return *this;
  return Distribution(std::make_shared<detail::TruncatedLaw>(law_, a, b));
}

Distribution Distribution::scaled(double c) const {
  require(c > 0.0 && std::isfinite(c), "scale factor must be positive");
  return affine(0.0, c);
}

Distribution Distribution::affine(double shift, double scale) const {
  require(scale != 0.0 && std::isfinite(scale) && std::isfinite(shift),
          "affine map needs a finite non-zero scale");
  return Distribution(std::make_shared<detail::AffineLaw>(law_, shift, scale));
}

double inverse_hazard(const Distribution& d, double x) {
  const double f = d.pdf(x);
  if (!(f > 0.0)) throw Error(Errc::ZeroDensity, fmt::format("density is zero at x={:g}", x));
  return d.survival(x) / f;
}

MhrCheck is_mhr(const Distribution& d, std::size_t grid_n) {
  require(grid_n >= 2, "is_mhr needs at least two grid points");
  const Interval s = d.support();
  const double hi = std::isinf(s.hi) ? d.quantile(1.0 - 1e-9) : s.hi;
  const double step = (hi - s.lo) / static_cast<double>(grid_n - 1);
  MhrCheck out{true, 0.0, 0};
  bool have_prev = false;
  double prev = 0.0;
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double x = i + 1 == grid_n ? hi : s.lo + step * static_cast<double>(i);
    const double f = d.pdf(x);
    if (!(f > 0.0)) {
      ++out.skipped;
      continue;
    }
    const double ih = d.survival(x) / f;
    if (have_prev) {
      const double diff = ih - prev;
      out.worst_violation = std::max(out.worst_violation, diff);
      if (diff > 1e-9) out.is_mhr = false;
    }
    prev = ih;
    have_prev = true;
  }
  return out;
}

Distribution truncate(const Distribution& d, double a, double b) { return d.truncated(a, b); }

Distribution marginal_value_dist(const Distribution& type_dist, double v) {
  require(v > 0.0 && std::isfinite(v), "task value must be positive");
  const Interval s = type_dist.support();
  require(s.lo >= 0.0 && s.hi <= 1.0, "type distribution must live on [0, 1]");
  return type_dist.affine(v, -v);
}

double cond_expect_above(const Distribution& d, double t) {
  const double tail = d.survival(t);
  if (!(tail > 0.0)) {
    throw Error(Errc::EmptyTail, fmt::format("P(X > {:g}) = 0 for {}", t, d.describe()));
  }
  if (!d.is_continuous() && !d.atoms().empty()) {
    double moment = 0.0;
    double mass = 0.0;
    double prev = 0.0;
    const auto atoms = d.atoms();
    for (double x : atoms) {
      const double c = d.cdf(x);
      if (x > t) {
        mass += c - prev;
        moment += (c - prev) * x;
      }
      prev = c;
    }
    return moment / mass;
  }
  const Interval s = d.support();
  const double from = std::max(t, s.lo);
  // E[X | X > t] = t + (integral of the survival function beyond t) / P(X > t)
  const double area =
      numeric::integrate([&d](double x) { return d.survival(x); }, from, s.hi, 1e-12);
  return from + area / tail;
}

}  // namespace skipmon
