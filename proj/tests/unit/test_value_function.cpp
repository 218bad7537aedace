#include <gtest/gtest.h>

#include <cmath>

#include "errc.hpp"
#include "oracles.hpp"
#include "skipmon/single_task.hpp"
#include "skipmon/value_function.hpp"

using namespace skipmon;

namespace {
ValueFunction fig2b() { return ValueFunction::poly(4.0, 1.0); }
ValueFunction sqrt_vf() { return ValueFunction::clinear(1.0, Distribution::uniform_unit()); }
}  // namespace

TEST(ValueFunction, PolyEval) {
  EXPECT_DOUBLE_EQ(fig2b().eval(0.0), 0.0);
  EXPECT_DOUBLE_EQ(fig2b().eval(1.0), 1.0);
  EXPECT_DOUBLE_EQ(fig2b().eval(0.5), 0.9375);
  EXPECT_DOUBLE_EQ(fig2b().eval(3.0), 1.0);
  EXPECT_DOUBLE_EQ(fig2b().p_nosale(), 1.0);
}

TEST(ValueFunction, PolyDerivative) {
  EXPECT_DOUBLE_EQ(fig2b().derivative(1.0), 0.0);
  EXPECT_DOUBLE_EQ(fig2b().derivative(0.0), 4.0);
  const auto vf = ValueFunction::poly(3.0, 2.0);
  for (double p = 0.1; p < 2.0; p += 0.3) {
    EXPECT_NEAR(vf.derivative(p), (vf.eval(p + 1e-6) - vf.eval(p - 1e-6)) / 2e-6, 1e-6);
  }
}

TEST(ValueFunction, InsensitiveStep) {
  const auto vf = ValueFunction::insensitive(2.0, 0.5);
  EXPECT_EQ(vf.eval(0.5), 0.0);
  EXPECT_EQ(vf.eval(0.6), 2.0);
  EXPECT_FALSE(vf.is_sensitive());
  EXPECT_ERRC(vf.derivative(1.0), Errc::NotDifferentiable);
}

TEST(ValueFunction, CLinearUniformIsSqrt) {
  const auto vf = sqrt_vf();
  EXPECT_NEAR(vf.eval(0.25), 0.5, 1e-6);
  EXPECT_NEAR(vf.p_nosale(), 1.0, 1e-9);
  EXPECT_EQ(vf.eval(0.0), 0.0);
  for (double p = 0.01; p < 1.0; p += 0.0137) EXPECT_NEAR(vf.eval(p), std::sqrt(p), 1e-5) << p;
  EXPECT_NEAR(vf.eval(2.0), 1.0, 1e-9);
}

TEST(ValueFunction, CLinearDerivative) {
  const auto vf = sqrt_vf();
  EXPECT_NEAR(vf.derivative(0.25), 1.0, 1e-4);
  EXPECT_TRUE(std::isinf(vf.derivative(0.0)));
  for (double p = 0.05; p < 0.95; p += 0.1) {
    const double fd = (vf.eval(p + 1e-6) - vf.eval(p - 1e-6)) / 2e-6;
    EXPECT_NEAR(vf.derivative(p), fd, 1e-4 * fd) << p;
  }
}

TEST(ValueFunction, CLinearConsistency) {
  for (const auto& types : {Distribution::uniform_unit(), Distribution::impatience_exponential(1.0),
                            Distribution::impatience_exponential(3.0),
                            Distribution::flattened_impatience_exponential(20.0, 0.25)}) {
    for (double c : {1.0, 2.5}) {
      const auto vf = ValueFunction::clinear(c, types);
      const double pb = vf.p_nosale();
      for (int i = 1; i <= 100; ++i) {
        const double p = pb * i / 101.0;
        const double v = vf.eval(p);
        EXPECT_NEAR(c * (1.0 - types.cdf(1.0 - p / v)), v, 1e-5) << types.describe() << " p=" << p;
      }
    }
  }
}

TEST(ValueFunction, CLinearPriceAtValueInverts) {
  const auto vf = sqrt_vf();
  EXPECT_NEAR(vf.clinear_price_at_value(0.5), 0.25, 1e-12);
  EXPECT_ERRC(fig2b().clinear_price_at_value(0.5), Errc::InvalidArgument);
}

TEST(ValueFunction, ShapeOfEveryConstructedFunction) {
  const std::vector<ValueFunction> vfs = {fig2b(), ValueFunction::poly(2.0, 0.5), ValueFunction::poly(8.0, 3.0), sqrt_vf(),
                                          ValueFunction::clinear(1.0, Distribution::impatience_exponential(10.0))};
  for (const auto& vf : vfs) {
    const auto s = check_shape(vf, 1000);
    EXPECT_TRUE(s.monotone) << vf.describe();
    EXPECT_TRUE(s.concave) << vf.describe() << " gap " << s.worst_concavity_gap;
  }
}

TEST(ValueFunction, BadParameters) {
  EXPECT_ERRC(ValueFunction::poly(1.0, 1.0), Errc::InvalidArgument);
  EXPECT_ERRC(ValueFunction::insensitive(0.0), Errc::InvalidArgument);
  EXPECT_ERRC(ValueFunction::clinear(0.0, Distribution::uniform_unit()), Errc::InvalidArgument);
  EXPECT_ERRC(ValueFunction::clinear(1.0, Distribution::uniform_unit(), 10), Errc::InvalidArgument);
  EXPECT_ERRC(ValueFunction::clinear(1.0, Distribution::discrete({0.2, 0.8}, {0.5, 0.5})), Errc::InvalidArgument);
}

TEST(InsensitiveProjection, PolyClosedForm) {
  const auto pr = insensitive_projection(fig2b());
  EXPECT_NEAR(pr.p_star, 1.0 - std::pow(4.0, -1.0 / 3.0), 1e-8);
  EXPECT_NEAR(pr.v_const, 1.0 - std::pow(4.0, -4.0 / 3.0), 1e-8);
  EXPECT_NEAR(pr.rev_ratio_bound, pr.v_const, 1e-12);
}

TEST(InsensitiveProjection, SqrtClosedForm) {
  const auto pr = insensitive_projection(sqrt_vf());
  EXPECT_NEAR(pr.p_star, 0.25, 1e-6);
  EXPECT_NEAR(pr.v_const, 0.5, 1e-6);
  EXPECT_NEAR(pr.rev_ratio_bound, 0.5, 1e-6);
}

TEST(InsensitiveProjection, InsensitiveInputRejected) {
  EXPECT_ERRC(insensitive_projection(ValueFunction::insensitive(1.0)), Errc::NotDifferentiable);
}

TEST(InsensitiveProjection, BuyerUtilityDominance) {
  for (const auto& vf : {fig2b(), sqrt_vf()}) {
    const auto pr = insensitive_projection(vf);
    for (double p = pr.p_star; p <= vf.p_nosale(); p += 0.01) {
      EXPECT_GE(vf.eval(p) - p, pr.v_const - p - 1e-12);
    }
  }
}

// Revenue on the projected constant function keeps at least the stated fraction.
TEST(InsensitiveProjection, RevenueRatioBound) {
  const auto vf = fig2b();
  const auto pr = insensitive_projection(vf);
  const auto constant = pr.as_constant();
  for (const auto& types : {Distribution::uniform_unit(), Distribution::impatience_exponential(1.0),
                            Distribution::impatience_exponential(2.0), Distribution::impatience_exponential(3.0)}) {
    const double true_rev = optimal_price(Objective::Revenue, types, vf).value;
    const double proj_rev = oracle::grid_max(
                                [&](double p) {
                                  if (p < pr.p_star) return 0.0;
                                  return p * (1.0 - types.impatience().cdf(p / pr.v_const));
                                },
                                0.0, pr.v_const, 100000)
                                .value;
    EXPECT_NEAR(constant.eval(pr.p_star + 1e-9), pr.v_const, 1e-12);
    EXPECT_GE(proj_rev, pr.rev_ratio_bound * true_rev - 1e-9) << types.describe();
  }
}
