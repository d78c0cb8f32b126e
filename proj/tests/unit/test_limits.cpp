#include <cmath>

#include <gtest/gtest.h>

#include "ldis/errors.hpp"
#include "ldis/limits.hpp"
#include "ldis/numeric.hpp"
#include "ldis/oracle.hpp"
#include "ldis/rate_functions.hpp"

using namespace ldis;

namespace {

const DistributionModel kStd = DistributionModel::gaussian(0.0, 1.0);
const DistributionModel kExp = DistributionModel::exponential(1.0);
const EventSet kOneSided = EventSet::at_least(0.8);
const EventSet kTwoSided = EventSet::two_sided(1.0, 1.2);

constexpr double kIExp13 = 0.037635735532508947965;
constexpr double kKlExpGauss = 0.50157426873718168974;
constexpr double kOverTilt = -0.75080666151703324593;

std::vector<double> lin_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

WalkMixture mix(std::vector<DistributionModel> comps) {
  WalkMixture m;
  m.weights.assign(comps.size(), 1.0 / static_cast<double>(comps.size()));
  m.components = std::move(comps);
  return m;
}

}  // namespace

TEST(TiltParameter, Recognition) {
  EXPECT_NEAR(*tilt_parameter(kStd, DistributionModel::gaussian(0.4, 1.0)), 0.4, 1e-15);
  EXPECT_NEAR(*tilt_parameter(kExp, DistributionModel::exponential(1.0 / 1.3)), 1.0 - 1.0 / 1.3, 1e-15);
  EXPECT_FALSE(tilt_parameter(kStd, DistributionModel::gaussian(0.4, 2.0)).has_value());
  EXPECT_FALSE(tilt_parameter(kExp, DistributionModel::gaussian(1.3, 1.0)).has_value());
}

TEST(DominatingPoint, OneAndTwoSided) {
  const DominatingPoint a = dominating_point(kStd, kOneSided);
  EXPECT_NEAR(a.rate, 0.32, 1e-12);
  EXPECT_NEAR(a.x, 0.8, 1e-12);
  const DominatingPoint b = dominating_point(kStd, kTwoSided);
  EXPECT_NEAR(b.rate, 0.5, 1e-12);
  EXPECT_NEAR(b.x, 1.0, 1e-12);
}

TEST(ArSet, Examples) {
  const EventSet s = a_r_set(kStd, tilt(kStd, 1.0), 0.02, kOneSided);
  ASSERT_EQ(s.intervals().size(), 1u);
  EXPECT_NEAR(s.intervals()[0].lo, 0.8, 1e-12);
  EXPECT_NEAR(s.intervals()[0].hi, 1.2, 1e-10);
  EXPECT_EQ(a_r_set(kStd, tilt(kStd, 1.0), kInf, kOneSided), kOneSided);
  EXPECT_TRUE(a_r_set(kStd, kStd, 0.1, kOneSided).empty());
}

TEST(ArSet, NestedInR) {
  const DistributionModel q = tilt(kStd, 0.3);
  EventSet prev;
  for (double r : {0.01, 0.05, 0.1, 0.4, 1.0, 2.0, 5.0}) {
    const EventSet cur = a_r_set(kStd, q, r, kTwoSided);
    EXPECT_TRUE(prev.subset_of(cur)) << r;
    prev = cur;
  }
}

TEST(YLimit, OptimalTilt) {
  for (double r : {0.001, 0.3, 4.0}) EXPECT_NEAR(y_limit(kStd, tilt(kStd, 0.8), 1.0, r, kOneSided).value, -0.32, 1e-12);
}

TEST(YLimit, UnderTiltPhaseBoundary) {
  const DistributionModel q = tilt(kStd, 0.4);
  for (double r : {0.01, 0.05, 0.079}) {
    const ExponentLimit e = y_limit(kStd, q, 1.0, r, kOneSided);
    EXPECT_TRUE(e.zero_hit) << r;
    EXPECT_EQ(e.value, -kInf);
  }
  for (double r : {0.081, 0.1, 1.0}) {
    const ExponentLimit e = y_limit(kStd, q, 1.0, r, kOneSided);
    EXPECT_FALSE(e.zero_hit);
    EXPECT_NEAR(e.value, -0.32, 1e-12) << r;
  }
}

TEST(YLimit, OverTilt) {
  const ExponentLimit e = y_limit(kStd, tilt(kStd, 2.0), 1.0, 0.3, kOneSided);
  EXPECT_NEAR(e.value, kOverTilt, 1e-10);
  EXPECT_NEAR(e.argmin, 2.0 - std::sqrt(0.6), 1e-9);
}

TEST(YLimit, OverTiltMatchesPartitionGridOracle) {
  const DistributionModel q = tilt(kStd, 2.0);
  for (double r : {0.05, 0.3, 0.7, 1.5}) {
    // -inf{I(x) : x ∈ A, I^θ(x) < r} on a 10⁵-point grid.
    double best = kInf;
    for (int k = 0; k < 100'000; ++k) {
      const double x = 0.8 + 5.0 * k / 99'999.0;
      if (tilted_rate(kStd, 2.0, x) < r) best = std::min(best, 0.5 * x * x);
    }
    EXPECT_NEAR(y_limit(kStd, q, 1.0, r, kOneSided).value, -best, 1e-4) << r;
  }
}

TEST(YLimit, GeneralImportance) {
  const DistributionModel q2 = DistributionModel::gaussian(1.3, 1.0);
  const EventSet A = EventSet::at_least(1.3);
  EXPECT_TRUE(y_limit(kExp, q2, 1.0, 0.036, A).zero_hit);
  EXPECT_NEAR(y_limit(kExp, q2, 1.0, 1.0, A).value, -kIExp13, 1e-7);
  EXPECT_NEAR(y_limit(kExp, DistributionModel::exponential(1.0 / 1.3), 1.0, 0.036, A).value, -kIExp13, 1e-10);
}

TEST(RequiredRate, Examples) {
  EXPECT_NEAR(required_rate(kStd, tilt(kStd, 0.8), kOneSided), 0.0, 1e-12);
  EXPECT_NEAR(required_rate(kStd, kStd, kOneSided), 0.32, 1e-12);
  EXPECT_NEAR(required_rate(kExp, DistributionModel::gaussian(1.3, 1.0), EventSet::at_least(1.3)), kKlExpGauss, 1e-8);
  EXPECT_NEAR(tilted_q_entropy(kExp, DistributionModel::gaussian(1.3, 1.0), 1.3), kKlExpGauss, 1e-8);
}

TEST(RequiredRate, JustAboveRecoversTheFullExponent) {
  const std::vector<std::pair<DistributionModel, EventSet>> cases = {
      {kStd, kOneSided}, {tilt(kStd, 0.4), kOneSided}, {tilt(kStd, 2.0), kOneSided},
      {tilt(kStd, 1.0), kTwoSided}, {DistributionModel::exponential(1.0 / 1.3), EventSet::at_least(1.3)}};
  for (const auto& [q, A] : cases) {
    const DistributionModel& p = std::holds_alternative<Exponential>(q.kind()) ? kExp : kStd;
    const double rr = required_rate(p, q, A);
    EXPECT_NEAR(y_limit(p, q, 1.0, rr + 1e-3, A).value, -dominating_point(p, A).rate, 1e-6) << q.name();
  }
}

TEST(YLimitProperties, NondecreasingInR) {
  const std::vector<DistributionModel> qs = {kStd, tilt(kStd, 0.4), tilt(kStd, 1.0), tilt(kStd, 2.0),
                                             DistributionModel::gaussian(0.5, 2.0)};
  for (const auto& q : qs) {
    for (double xi : {1.0, 2.0}) {
      double prev = -kInf;
      for (double r : log_grid(1e-3, 4.0, 60)) {
        const double v = y_limit(kStd, q, xi, r, kTwoSided).value;
        EXPECT_GE(v, prev - 1e-12) << q.name() << " xi=" << xi << " r=" << r;
        prev = v;
      }
    }
  }
}

TEST(Lra, OneSidedOptimalTiltIsHalfR) {
  const auto grid = log_grid(1e-3, 4.0, 400);
  const LraCurve c = lra_curve(kStd, tilt(kStd, 0.8), kOneSided, grid);
  EXPECT_NEAR(c.base_rate, 0.32, 1e-12);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(c.values[i], grid[i] / 2, 1e-9) << grid[i];
  EXPECT_TRUE(c.breakpoints.empty());
}

TEST(Lra, TwoSidedPlateau) {
  const auto grid = lin_grid(0.01, 3.0, 300);
  const LraCurve c = lra_curve(kStd, tilt(kStd, 1.0), kTwoSided, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double expect = r <= 2.42 ? std::min(r / 2, 0.22) : std::max(0.22, c.values[i]);
    EXPECT_NEAR(c.values[i], expect, 1e-9) << r;
    if (r > 0.44 + 1e-9 && r < 2.42 - 1e-9) EXPECT_EQ(c.regimes[i], "plateau");
  }
  ASSERT_GE(c.breakpoints.size(), 2u);
  EXPECT_EQ(c.breakpoints[0].label, "plateau_start");
  EXPECT_NEAR(c.breakpoints[0].r, 0.44, 1e-8);
  EXPECT_EQ(c.breakpoints[1].label, "plateau_end");
  EXPECT_NEAR(c.breakpoints[1].r, 2.42, 1e-8);
}

TEST(Lra, VanishesAsRGoesToZero) {
  const LraCurve c = lra_curve(kStd, tilt(kStd, 1.0), kTwoSided, {1e-6, 1e-4});
  EXPECT_LT(c.values[0], 1e-6);
}

TEST(Lra, VariationalModeAgreesForTiltImportance) {
  const auto grid = lin_grid(0.1, 3.0, 30);
  const LraCurve a = lra_curve(kStd, tilt(kStd, 1.0), kTwoSided, grid, LraMode::per_x_tilt);
  const LraCurve b = lra_curve(kStd, tilt(kStd, 1.0), kTwoSided, grid, LraMode::variational);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 5e-3) << grid[i];
}

TEST(LraProperties, MonotoneAndBoundedByHalfR) {
  const auto grid = log_grid(1e-3, 4.0, 120);
  const std::vector<std::pair<DistributionModel, EventSet>> cases = {
      {tilt(kStd, 0.4), kOneSided}, {tilt(kStd, 2.0), kOneSided}, {kStd, kTwoSided},
      {tilt(kStd, 1.0), kTwoSided}, {tilt(kStd, -0.5), kTwoSided}};
  for (const auto& [q, A] : cases) {
    const LraCurve c = lra_curve(kStd, q, A, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_LE(c.values[i], grid[i] / 2 + 1e-9);
      EXPECT_GE(c.values[i], 0.0);
      if (i) EXPECT_GE(c.values[i], c.values[i - 1] - 1e-12);
    }
  }
}

TEST(LraProperties, HalfREverywhereIffLogEfficient) {
  const auto grid = log_grid(1e-3, 4.0, 80);
  const std::vector<std::pair<DistributionModel, EventSet>> cases = {
      {tilt(kStd, 0.8), kOneSided}, {tilt(kStd, 0.4), kOneSided}, {tilt(kStd, 2.0), kOneSided},
      {kStd, kOneSided}, {tilt(kStd, 1.0), kTwoSided}, {tilt(kStd, 1.0), EventSet::at_least(1.0)},
      {tilt(kStd, -1.2), EventSet::at_most(-1.2)}};
  for (const auto& [q, A] : cases) {
    const LraCurve c = lra_curve(kStd, q, A, grid);
    bool half = true;
    for (std::size_t i = 0; i < grid.size(); ++i) half = half && std::abs(c.values[i] - grid[i] / 2) <= 1e-9;
    EXPECT_EQ(half, is_log_efficient(kStd, q, A)) << q.name() << " " << A.to_string();
  }
}

TEST(MixtureLra, SelfMixtureIsTheSameCurve) {
  const auto grid = lin_grid(0.05, 3.0, 60);
  const DistributionModel q = tilt(kStd, 1.0);
  const LraCurve a = lra_curve(kStd, q, kTwoSided, grid);
  const LraCurve b = mixture_lra(mix({q, q}), kStd, kTwoSided, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
}

TEST(MixtureLra, TiltPlusCmcCrossesAtR3) {
  const auto grid = lin_grid(0.05, 3.0, 60);
  const DistributionModel q = tilt(kStd, 1.0);
  const LraCurve is = lra_curve(kStd, q, kTwoSided, grid);
  const LraCurve cmc = lra_curve(kStd, kStd, kTwoSided, grid);
  const LraCurve m = mixture_lra(mix({q, kStd}), kStd, kTwoSided, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(m.values[i], std::max(is.values[i], cmc.values[i]));
  // CMC: (r − 0.5)/2 meets the 0.22 plateau at r = 0.94.
  ASSERT_FALSE(m.breakpoints.empty());
  EXPECT_EQ(m.breakpoints[0].label, "crossing");
  EXPECT_NEAR(m.breakpoints[0].r, 0.94, 1e-8);
}

TEST(MixtureLra, EfficientTwoSidedMixture) {
  const auto grid = lin_grid(0.05, 3.0, 60);
  const WalkMixture m = mix({tilt(kStd, 1.0), tilt(kStd, -1.2)});
  EXPECT_TRUE(is_log_efficient(kStd, m, kTwoSided));
  const LraCurve j = mixture_lra_joint(m, kStd, kTwoSided, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(j.values[i], grid[i] / 2, 1e-9);
  const LraCurve pw = mixture_lra(m, kStd, kTwoSided, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LE(pw.values[i], j.values[i] + 1e-12);
}

TEST(Efficiency, Classifier) {
  EXPECT_TRUE(is_log_efficient(kStd, tilt(kStd, 0.8), kOneSided));
  EXPECT_FALSE(is_log_efficient(kStd, tilt(kStd, 1.0), EventSet::two_sided(1.0, 2.0)));
  EXPECT_FALSE(is_log_efficient(kStd, kStd, kOneSided));
  EXPECT_TRUE(cmc_dominance(kStd, kStd, kOneSided, 1.0));
  EXPECT_THROW(cmc_dominance(kStd, kStd, kOneSided, 0.1), InfeasibleError);
}

TEST(Efficiency, SecondMomentExponentForBEqualsTwoA) {
  const EventSet A = EventSet::two_sided(1.0, 2.0);
  const DistributionModel q = tilt(kStd, 1.0);
  EXPECT_NEAR(y_limit(kStd, q, 2.0, kInf, A).value, 0.5, 1e-9);
  EXPECT_NEAR(relative_variance_exponent(kStd, q, A), 0.75, 1e-9);
  // Grid oracle over A of the closed-form second-moment rate.
  const OracleResult g = grid_minimize([&](double x) { return moment_rate(kStd, 1.0, 2.0, x); }, A, 100'000);
  EXPECT_NEAR(-g.value, 0.5, 1e-9);
}

TEST(Efficiency, XiThresholdIsOnePointFive) {
  // Relative ξ-th moment stays sub-exponential while I_ξ^a(a) ≤ I_ξ^a(−2a).
  const Root r = brent_root(
      [](double xi) { return moment_rate(kStd, 1.0, xi, 1.0) - moment_rate(kStd, 1.0, xi, -2.0); }, 1.0, 3.0);
  EXPECT_NEAR(r.x, 1.5, 1e-12);
}

TEST(EfficiencyProperties, RelativeVarianceExponentIdentity) {
  const std::vector<std::pair<double, EventSet>> cases = {
      {0.8, kOneSided}, {0.4, kOneSided}, {2.0, kOneSided}, {1.0, kTwoSided}, {1.0, EventSet::two_sided(1.0, 2.0)}};
  for (const auto& [theta, A] : cases) {
    const DistributionModel q = tilt(kStd, theta);
    // sup_{x∈A}[−I_p(x) + ½ D_q(x)] + inf_A I_p, with D_q(x) = ½(x − θ)² for a tilt.
    const OracleResult g = grid_minimize(
        [&](double x) { return 0.5 * x * x - 0.25 * (x - theta) * (x - theta); }, A, 100'000);
    const double expect = -g.value + dominating_point(kStd, A).rate;
    EXPECT_NEAR(relative_variance_exponent(kStd, q, A), expect, 1e-6) << theta << " " << A.to_string();
  }
}
