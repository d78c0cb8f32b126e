#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "ldis/errors.hpp"
#include "ldis/mc_engine.hpp"
#include "ldis/oracle.hpp"
#include "ldis/rate_functions.hpp"

using namespace ldis;

namespace {

const DistributionModel kStd = DistributionModel::gaussian(0.0, 1.0);
const EventSet kOneSided = EventSet::at_least(0.8);

constexpr double kPhibar4 = 3.1671241833119921254e-5;

RunOptions threads(unsigned t) {
  RunOptions o;
  o.threads = t;
  o.chunk = 4096;
  return o;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_identical(const CellResult& a, const CellResult& b) {
  ASSERT_EQ(a.moments.size(), b.moments.size());
  for (std::size_t i = 0; i < a.moments.size(); ++i) {
    EXPECT_TRUE(same_bits(a.moments[i].log_mean, b.moments[i].log_mean));
    EXPECT_EQ(a.moments[i].hit_count, b.moments[i].hit_count);
    EXPECT_TRUE(same_bits(a.moments[i].log_max_term, b.moments[i].log_max_term));
  }
  ASSERT_EQ(a.srv.checkpoints.size(), b.srv.checkpoints.size());
  for (std::size_t i = 0; i < a.srv.checkpoints.size(); ++i) {
    EXPECT_TRUE(same_bits(a.srv.checkpoints[i].log_mean, b.srv.checkpoints[i].log_mean));
    EXPECT_TRUE(same_bits(a.srv.checkpoints[i].log_var, b.srv.checkpoints[i].log_var) ||
                (std::isnan(a.srv.checkpoints[i].log_var) && std::isnan(b.srv.checkpoints[i].log_var)));
  }
  EXPECT_EQ(a.srv.stop_flags, b.srv.stop_flags);
  EXPECT_EQ(a.weighted_mean.has_value(), b.weighted_mean.has_value());
  if (a.weighted_mean) EXPECT_TRUE(same_bits(*a.weighted_mean, *b.weighted_mean));
}

// Standard error of the ξ = 1 estimate from the ξ = 2 moment.
double std_error(const CellResult& r) {
  const double m1 = std::exp(r.moments[0].log_mean);
  const double m2 = std::exp(r.moments[1].log_mean);
  return std::sqrt(std::max(m2 - m1 * m1, 0.0) / static_cast<double>(r.moments[0].m));
}

}  // namespace

TEST(LogSumAccumulator, MatchesTwoPassBitForBit) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 200.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> terms(10'000);
    for (double& t : terms) t = g(rng);
    if (trial % 3 == 0) terms[17] = -kInf;
    LogSumAccumulator acc;
    for (double t : terms) acc.add(t);
    EXPECT_TRUE(same_bits(acc.log_sum(), two_pass_log_sum(terms)));
    // -inf terms are zeros of the sum and are not counted.
    EXPECT_EQ(acc.count(), terms.size() - (trial % 3 == 0 ? 1 : 0));
  }
}

TEST(LogSumAccumulator, EmptyAndMerge) {
  LogSumAccumulator e;
  EXPECT_EQ(e.log_sum(), -kInf);
  LogSumAccumulator a, b, all;
  for (int i = 0; i < 100; ++i) {
    const double t = std::sin(i) * 30;
    (i < 40 ? a : b).add(t);
    all.add(t);
  }
  a.merge(b);
  EXPECT_NEAR(a.log_sum(), all.log_sum(), 1e-14 * std::abs(all.log_sum()) + 1e-15);
  EXPECT_EQ(a.count(), 100u);
  EXPECT_EQ(a.log_max(), all.log_max());
}

TEST(RunCell, IdentityMeasureOnTheWholeLine) {
  const CellResult r = run_cell(kStd, kStd, 7, 5000, EventSet::whole_line(), {1.0, 2.0}, 1, {});
  EXPECT_EQ(r.moments[0].log_mean, 0.0);
  EXPECT_EQ(r.moments[1].log_mean, 0.0);
  EXPECT_EQ(r.moments[0].hit_count, 5000u);
}

TEST(RunCell, GaussianTailUnderOptimalTilt) {
  const CellResult r = run_cell(kStd, tilt(kStd, 0.8), 25, 100'000, kOneSided, {1.0, 2.0}, 11, {});
  const double est = std::exp(r.moments[0].log_mean);
  EXPECT_NEAR(est, kPhibar4, 3 * std_error(r));
  EXPECT_NEAR(std::exp(exact_alpha_gaussian(25, kOneSided, 0.0, 1.0).log_value), kPhibar4, 1e-18);
}

TEST(RunCell, BernoulliMatchesEnumeration) {
  const auto p = DistributionModel::finite_discrete({0.0, 1.0}, {0.5, 0.5});
  const auto q = DistributionModel::finite_discrete({0.0, 1.0}, {0.2, 0.8});
  const EventSet A = EventSet::at_least(0.75);
  const CellResult r = run_cell(p, q, 8, 100'000, A, {1.0, 2.0}, 5, {});
  EXPECT_NEAR(std::exp(r.moments[0].log_mean), 37.0 / 256.0, 3 * std_error(r));
}

TEST(RunCell, DeterministicAcrossThreadCounts) {
  const std::vector<std::uint64_t> cps = {10, 100, 1000, 10'000, 30'000};
  const CellResult a = run_cell(kStd, tilt(kStd, 0.8), 20, 30'000, kOneSided, {1.0, 2.0}, 9, cps, threads(1));
  const CellResult b = run_cell(kStd, tilt(kStd, 0.8), 20, 30'000, kOneSided, {1.0, 2.0}, 9, cps, threads(4));
  const CellResult c = run_cell(kStd, tilt(kStd, 0.8), 20, 30'000, kOneSided, {1.0, 2.0}, 9, cps, threads(3));
  expect_identical(a, b);
  expect_identical(a, c);
  const auto e = DistributionModel::exponential(1.0);
  const CellResult d1 = run_cell(e, DistributionModel::gaussian(1.3, 1.0), 30, 20'000, EventSet::at_least(1.3), {1.0}, 4, cps, threads(1));
  const CellResult d4 = run_cell(e, DistributionModel::gaussian(1.3, 1.0), 30, 20'000, EventSet::at_least(1.3), {1.0}, 4, cps, threads(4));
  expect_identical(d1, d4);
}

TEST(RunCell, Errors) {
  EXPECT_THROW(run_cell(kStd, DistributionModel::exponential(1.0), 5, 10, kOneSided, {1.0}, 1, {}), AbsContError);
  RunOptions o;
  o.cap = 100;
  EXPECT_THROW(run_cell(kStd, kStd, 5, 101, kOneSided, {1.0}, 1, {}, o), BudgetError);
}

TEST(RunCell, MomentInvariantsAndSrvTrace) {
  const CellResult r = run_cell(kStd, kStd, 30, 20'000, kOneSided, {1.0, 2.0}, 2, {10, 100, 1000, 20'000});
  // CMC at n = 30 with 2·10⁴ replications: α ≈ 6·10⁻⁶, so almost surely no hits.
  for (const MomentEstimate& m : r.moments) {
    EXPECT_EQ(m.hit_count == 0, m.log_mean == -kInf);
    EXPECT_LE(m.log_mean, m.log_max_term);
  }
  for (std::size_t i = 0; i < r.srv.checkpoints.size(); ++i) {
    if (i) EXPECT_GT(r.srv.checkpoints[i].m, r.srv.checkpoints[i - 1].m);
    if (r.moments[0].hit_count == 0) EXPECT_FALSE(r.srv.checkpoints[i].defined);
  }
  const CellResult t = run_cell(kStd, tilt(kStd, 0.8), 30, 20'000, kOneSided, {1.0}, 2, {10, 100, 1000, 20'000});
  EXPECT_LE(t.moments[0].log_mean, t.moments[0].log_max_term);
  EXPECT_TRUE(t.srv.checkpoints.back().defined);
  EXPECT_GT(t.srv.checkpoints.back().srv, 0.0);
}

TEST(RunNested, PrefixesMatchIndependentCells) {
  const DistributionModel q = tilt(kStd, 0.5);
  const auto nested = run_nested(kStd, q, 12, {1000, 5000, 20'000}, kOneSided, {1.0, 2.0}, 8, {}, threads(2));
  ASSERT_EQ(nested.size(), 3u);
  const CellResult mid = run_cell(kStd, q, 12, 5000, kOneSided, {1.0, 2.0}, 8, {}, threads(1));
  EXPECT_TRUE(same_bits(nested[1].moments[0].log_mean, mid.moments[0].log_mean));
  EXPECT_EQ(nested[1].moments[0].hit_count, mid.moments[0].hit_count);
}

TEST(RunNested, CumulativeSumNondecreasing) {
  // log Σ_{j≤m} Zʲ grows with m on a shared stream.
  std::vector<std::uint64_t> snaps;
  for (std::uint64_t m = 100; m <= 50'000; m = m * 3 / 2) snaps.push_back(m);
  const auto res = run_nested(kStd, tilt(kStd, 0.4), 20, snaps, kOneSided, {1.0}, 3, {});
  double prev = -kInf;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double log_sum = res[i].moments[0].log_mean + std::log(static_cast<double>(snaps[i]));
    EXPECT_GE(log_sum, prev);
    prev = log_sum;
  }
}

TEST(MixtureRun, SingleComponentEqualsRunCell) {
  WalkMixture m{{1.0}, {tilt(kStd, 0.8)}};
  const CellResult a = mixture_run(m, kStd, 15, 10'000, kOneSided, {1.0, 2.0}, 6, {100, 10'000});
  const CellResult b = run_cell(kStd, tilt(kStd, 0.8), 15, 10'000, kOneSided, {1.0, 2.0}, 6, {100, 10'000});
  expect_identical(a, b);
}

TEST(MixtureRun, HalfCmcHalfTiltDoublesTheLikelihoodRatio) {
  const int n = 100;
  const WalkMixture m{{0.5, 0.5}, {kStd, tilt(kStd, 0.8)}};
  const CellResult mx = mixture_run(m, kStd, n, 200'000, kOneSided, {1.0}, 12, {});
  const CellResult st = run_cell(kStd, tilt(kStd, 0.8), n, 100'000, kOneSided, {1.0}, 12, {});
  EXPECT_NEAR(mx.mean_log_lr_hits, st.mean_log_lr_hits + std::log(2.0), 0.05);
}

TEST(MixtureRun, EfficientTwoSidedMixture) {
  const int n = 100;
  const EventSet A = EventSet::two_sided(1.0, 1.2);
  const WalkMixture m{{0.5, 0.5}, {tilt(kStd, 1.0), tilt(kStd, -1.2)}};
  const CellResult r = mixture_run(m, kStd, n, 200'000, A, {1.0, 2.0}, 13, {});
  // E^Q[Z²] = ∫_A φ_n(x) Z(x) dx with S_n/n ~ N(0, 1/n) under p and
  // Z(x) = 1 / Σ_k ½ exp(n(θ_k x − θ_k²/2)); shifted by e^100 to stay in range.
  const double shift = 100.0;
  auto integrand = [&](double x) {
    const double lz = -std::log(0.5 * std::exp(n * (x - 0.5)) + 0.5 * std::exp(n * (-1.2 * x - 0.72)));
    return std::exp(shift - 0.5 * n * x * x + 0.5 * std::log(n / (2 * std::numbers::pi)) + lz);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double upper = gauss_kronrod<double, 61>::integrate(integrand, 1.0, kInf, 15, 1e-12);
  const double lower = gauss_kronrod<double, 61>::integrate(integrand, -kInf, -1.2, 15, 1e-12);
  const double log_second = std::log(upper + lower) - shift;
  EXPECT_NEAR(r.moments[1].log_mean - log_second, 0.0, 0.05);
  EXPECT_NEAR(std::exp(r.moments[0].log_mean - exact_alpha_gaussian(n, A, 0.0, 1.0).log_value), 1.0, 0.02);
}

TEST(WeightedMean, ConvergesToTheDominatingPoint) {
  const CellResult r = run_cell(kStd, tilt(kStd, 0.8), 200, 20'000, kOneSided, {1.0}, 21, {});
  ASSERT_TRUE(r.weighted_mean.has_value());
  EXPECT_NEAR(*r.weighted_mean, 0.8, 0.05);
}

TEST(Schedule, ValidationAndBudget) {
  SampleSchedule s;
  s.n_values = {10, 20};
  s.rates = {0.5};
  s.cap = 20'000;
  EXPECT_NO_THROW(s.validate());
  EXPECT_DOUBLE_EQ(s.m_exact(10, 0.5), std::floor(100 * std::exp(5.0)));
  EXPECT_THROW(sweep(s, kStd, kStd, kOneSided, {1.0}, 1), BudgetError);
  s.skip_over_cap = true;
  const ExperimentReport r = sweep(s, kStd, kStd, kOneSided, {1.0}, 1);
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_FALSE(r.cells[0].budget_skipped);
  EXPECT_EQ(r.cells[0].m, 14'841u);
  EXPECT_TRUE(r.cells[1].budget_skipped);
  SampleSchedule bad = s;
  bad.n_values = {20, 10};
  EXPECT_THROW(bad.validate(), DomainError);
  bad = s;
  bad.kind = RateKind::c;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Sweep, AddsXiOneAndFlagsZeroHits) {
  SampleSchedule s;
  s.n_values = {30};
  s.rates = {0.1};
  const ExperimentReport r = sweep(s, kStd, kStd, kOneSided, {2.0}, 1);
  ASSERT_EQ(r.xis.size(), 2u);
  EXPECT_EQ(r.xis[0], 1.0);
  EXPECT_TRUE(r.cells[0].zero_hit);
  EXPECT_EQ(r.cells[0].y, kInf);
}

TEST(EmpiricalLra, ExactEstimateIsInfinite) {
  ExperimentReport r;
  r.xis = {1.0};
  CellRecord c;
  c.n = 10;
  c.rate = 0.1;
  c.m = 5;
  c.moments = {{1.0, std::log(0.25), 5, 5, 0.0}};
  r.cells = {c};
  const auto v = empirical_lra(r, [](int) { return std::log(0.25); });
  EXPECT_EQ(v[0].value, kInf);
  EXPECT_EQ(v[0].note, "exact");
}

TEST(EmpiricalLra, OneSidedOptimalTiltNearHalfR) {
  // r = 0.2 at n = 60 (m = e¹² replications), averaged over 20 seeds.
  SampleSchedule s;
  s.n_values = {60};
  s.rates = {0.2};
  s.prefactor = 1;
  const AlphaProvider alpha = exact_log_alpha(kStd, kOneSided);
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ExperimentReport r = sweep(s, kStd, tilt(kStd, 0.8), kOneSided, {1.0}, seed);
    sum += empirical_lra(r, alpha)[0].value;
  }
  EXPECT_NEAR(sum / 20, 0.1, 0.03);
}

TEST(EmpiricalLra, TwoSidedPlateau) {
  // r = 1.0 sits on the 0.22 plateau; n = 15 keeps m = e¹⁵ within desk budget.
  SampleSchedule s;
  s.n_values = {15};
  s.rates = {1.0};
  s.prefactor = 1;
  const EventSet A = EventSet::two_sided(1.0, 1.2);
  const AlphaProvider alpha = exact_log_alpha(kStd, A);
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ExperimentReport r = sweep(s, kStd, tilt(kStd, 1.0), A, {1.0}, seed);
    sum += empirical_lra(r, alpha)[0].value;
  }
  EXPECT_NEAR(sum / 20, 0.22, 0.04);
}
