#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ldis/distributions.hpp"
#include "ldis/errors.hpp"
#include "ldis/quadrature.hpp"

using namespace ldis;

namespace {

DistributionModel std_normal() { return DistributionModel::gaussian(0.0, 1.0); }
DistributionModel two_sided_mix() {
  return DistributionModel::mixture({0.5, 0.5}, {DistributionModel::gaussian(1.0, 1.0),
                                                 DistributionModel::gaussian(-1.2, 1.0)});
}

}  // namespace

TEST(Distributions, FactoriesRejectInvalidParameters) {
  EXPECT_THROW(DistributionModel::gaussian(0.0, 0.0), DomainError);
  EXPECT_THROW(DistributionModel::exponential(-1.0), DomainError);
  EXPECT_THROW(DistributionModel::finite_discrete({0.0, 1.0}, {0.5, 0.6}), DomainError);
  EXPECT_THROW(DistributionModel::finite_discrete({1.0, 0.0}, {0.5, 0.5}), DomainError);
  EXPECT_THROW(DistributionModel::finite_discrete({0.0, 1.0}, {1.2, -0.2}), DomainError);
  EXPECT_THROW(DistributionModel::mixture({1.0}, {std_normal()}), DomainError);
  EXPECT_THROW(DistributionModel::mixture({0.7, 0.7}, {std_normal(), std_normal()}), DomainError);
}

TEST(Distributions, MgfDomains) {
  EXPECT_EQ(std_normal().mgf_domain().lo, -kInf);
  EXPECT_EQ(std_normal().mgf_domain().hi, kInf);
  EXPECT_EQ(DistributionModel::exponential(2.0).mgf_domain().hi, 2.0);
  EXPECT_EQ(DistributionModel::finite_discrete({0, 1}, {0.5, 0.5}).mgf_domain().hi, kInf);
}

TEST(Distributions, LogDensity) {
  EXPECT_NEAR(log_density(std_normal(), 0.0), -0.91893853320467274178, 1e-15);
  EXPECT_EQ(log_density(DistributionModel::exponential(1.0), -0.5), -kInf);
  EXPECT_NEAR(log_density(two_sided_mix(), 0.0), -1.5229006948140260809, 1e-14);
  const auto b = DistributionModel::finite_discrete({0.0, 1.0}, {0.25, 0.75});
  EXPECT_DOUBLE_EQ(log_density(b, 1.0), std::log(0.75));
  EXPECT_EQ(log_density(b, 0.5), -kInf);
}

TEST(Distributions, LogMgf) {
  for (double a : {-2.0, 0.3, 1.0, 4.0}) EXPECT_NEAR(log_mgf(std_normal(), a), 0.5 * a * a, 1e-15);
  EXPECT_EQ(log_mgf(DistributionModel::exponential(1.0), 0.0), 0.0);
  EXPECT_EQ(log_mgf(two_sided_mix(), 0.0), 0.0);
  EXPECT_NEAR(log_mgf(DistributionModel::exponential(1.0), 0.5), 0.69314718055994530942, 1e-15);
  EXPECT_THROW(log_mgf(DistributionModel::exponential(1.0), 1.0), DomainError);
}

TEST(Distributions, Tilt) {
  EXPECT_EQ(tilt(std_normal(), 1.0), DistributionModel::gaussian(1.0, 1.0));
  EXPECT_EQ(tilt(std_normal(), 0.0), std_normal());
  const auto q1 = tilt(DistributionModel::exponential(1.0), 1.0 - 1.0 / 1.3);
  EXPECT_NEAR(std::get<Exponential>(q1.kind()).rate, 1.0 / 1.3, 1e-15);
  EXPECT_THROW(tilt(two_sided_mix(), 0.1), UnsupportedError);
  EXPECT_THROW(tilt(DistributionModel::exponential(1.0), 1.5), DomainError);
}

TEST(Distributions, Moments) {
  EXPECT_NEAR(mean(DistributionModel::exponential(1.0 / 1.3)), 1.3, 1e-15);
  EXPECT_NEAR(mean(tilt(std_normal(), 0.7)), 0.7, 1e-15);
  EXPECT_NEAR(variance(two_sided_mix()), 1.0 + 2.2 * 2.2 / 4.0, 1e-12);
}

TEST(Distributions, KlDivergence) {
  EXPECT_NEAR(kl_divergence(DistributionModel::gaussian(0.7, 1.0), std_normal()), 0.245, 1e-15);
  EXPECT_EQ(kl_divergence(std_normal(), std_normal()), 0.0);
  EXPECT_NEAR(kl_divergence(DistributionModel::exponential(1.0 / 1.3), DistributionModel::exponential(1.0)),
              0.037635735532508947965, 1e-12);
  EXPECT_EQ(kl_divergence(DistributionModel::gaussian(1.3, 1.0), DistributionModel::exponential(1.0)), kInf);
  // Mixed-family pairs go through quadrature.
  EXPECT_NEAR(kl_divergence(DistributionModel::exponential(1.0 / 1.3), DistributionModel::gaussian(1.3, 1.0)),
              0.50157426873718168974, 1e-8);
  EXPECT_NEAR(kl_divergence(std_normal(), two_sided_mix()), 0.17026390470962239615, 1e-8);
}

TEST(Distributions, SamplingIsDeterministic) {
  RandomStream a(42, 3, 17), b(42, 3, 17), c(42, 3, 18);
  const double x = sample(std_normal(), a);
  EXPECT_EQ(x, sample(std_normal(), b));
  EXPECT_NE(x, sample(std_normal(), c));
}

TEST(Distributions, SampleMeans) {
  const auto e = DistributionModel::exponential(1.0);
  const auto mx = two_sided_mix();
  double se = 0.0, sm = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    RandomStream s(7, 0, static_cast<std::uint64_t>(i));
    se += sample(e, s);
    sm += sample(mx, s);
  }
  EXPECT_NEAR(se / n, 1.0, 0.004);
  EXPECT_NEAR(sm / n, -0.1, 0.005);
}

TEST(Distributions, NormalQuantileMatchesErfc) {
  for (double u : {1e-300, 1e-20, 1e-8, 0.001, 0.02, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
    const double z = normal_quantile(u);
    const double back = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    EXPECT_NEAR(back / u, 1.0, 1e-13) << u;
  }
}

TEST(Distributions, SupportContainment) {
  EXPECT_TRUE(support_contained(DistributionModel::exponential(1.0), std_normal()));
  EXPECT_FALSE(support_contained(std_normal(), DistributionModel::exponential(1.0)));
  const auto b = DistributionModel::finite_discrete({0.0, 1.0}, {0.5, 0.5});
  const auto t = DistributionModel::finite_discrete({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
  EXPECT_TRUE(support_contained(b, t));
  EXPECT_FALSE(support_contained(t, b));
}

// Properties over seeded random parameters.

TEST(DistributionProperties, LogMgfConvexAndZeroAtOrigin) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.1, 1.0), t01(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double c = u(rng);
    std::vector<DistributionModel> models = {
        DistributionModel::gaussian(u(rng), w(rng) * 3),
        DistributionModel::exponential(w(rng) * 2),
        DistributionModel::finite_discrete({c - 1 - 3 * w(rng), c, c + 1 + 3 * w(rng)}, {0.2, 0.5, 0.3}),
    };
    for (const auto& m : models) {
      EXPECT_EQ(log_mgf(m, 0.0), 0.0);
      const Range d = m.mgf_domain();
      const double hi = std::min(d.hi, 3.0) * 0.99;
      const double t1 = -3.0 + (hi + 3.0) * t01(rng);
      const double t2 = -3.0 + (hi + 3.0) * t01(rng);
      const double t = t01(rng);
      EXPECT_LE(log_mgf(m, t * t1 + (1 - t) * t2), t * log_mgf(m, t1) + (1 - t) * log_mgf(m, t2) + 1e-10);
    }
  }
}

TEST(DistributionProperties, TiltComposition) {
  const auto g = DistributionModel::gaussian(0.3, 2.0);
  const auto e = DistributionModel::exponential(2.0);
  const auto f = DistributionModel::finite_discrete({-1, 0, 2}, {0.3, 0.3, 0.4});
  for (auto [a, b] : {std::pair{0.3, -0.5}, {1.0, 0.4}, {-0.7, 0.2}}) {
    const auto g1 = std::get<Gaussian>(tilt(tilt(g, a), b).kind());
    const auto g2 = std::get<Gaussian>(tilt(g, a + b).kind());
    EXPECT_NEAR(g1.mean, g2.mean, 1e-14);
    EXPECT_EQ(g1.variance, g2.variance);
    const auto e1 = tilt(tilt(e, a), b);
    EXPECT_NEAR(std::get<Exponential>(e1.kind()).rate, std::get<Exponential>(tilt(e, a + b).kind()).rate, 1e-14);
    const auto f1 = std::get<FiniteDiscrete>(tilt(tilt(f, a), b).kind());
    const auto f2 = std::get<FiniteDiscrete>(tilt(f, a + b).kind());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f1.probs[i], f2.probs[i], 1e-14);
  }
}

TEST(DistributionProperties, TiltedMeanIsMgfDerivative) {
  const std::vector<DistributionModel> models = {DistributionModel::gaussian(0.3, 2.0),
                                                 DistributionModel::exponential(2.0),
                                                 DistributionModel::finite_discrete({-1, 0, 2}, {0.3, 0.3, 0.4})};
  for (const auto& m : models) {
    for (double th : {-1.0, -0.2, 0.0, 0.5, 1.2}) {
      const double h = 1e-6;
      const double fd = (log_mgf(m, th + h) - log_mgf(m, th - h)) / (2 * h);
      EXPECT_NEAR(mean(tilt(m, th)), fd, 1e-6);
    }
  }
}

TEST(DistributionProperties, KlNonNegativeAndQuadratureMatchesClosedForm) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.3, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g1 = DistributionModel::gaussian(u(rng), w(rng));
    const auto g2 = DistributionModel::gaussian(u(rng), w(rng));
    const auto e1 = DistributionModel::exponential(w(rng));
    const auto e2 = DistributionModel::exponential(w(rng));
    EXPECT_GT(kl_divergence(g1, g2), 0.0);
    EXPECT_GT(kl_divergence(e1, e2), 0.0);
    // Direct quadrature of ∫ log(dν/dμ) dν.
    auto quad_kl = [](const DistributionModel& nu, const DistributionModel& mu) {
      const double s = std::sqrt(variance(nu));
      return integrate_split(
                 [&](double x) {
                   const double ln = log_density(nu, x);
                   return ln == -kInf ? 0.0 : std::exp(ln) * (ln - log_density(mu, x));
                 },
                 nu.support(), mean(nu), s)
          .value;
    };
    EXPECT_NEAR(kl_divergence(g1, g2), quad_kl(g1, g2), 1e-8);
    EXPECT_NEAR(kl_divergence(e1, e2), quad_kl(e1, e2), 1e-8);
  }
}

TEST(DistributionProperties, DensitiesNormalize) {
  const auto f = DistributionModel::finite_discrete({-1, 0, 2}, {0.3, 0.3, 0.4});
  double s = 0.0;
  for (double x : {-1.0, 0.0, 2.0}) s += std::exp(log_density(f, x));
  EXPECT_EQ(s, 1.0);
  for (const auto& m : {DistributionModel::gaussian(0.3, 2.0), DistributionModel::exponential(0.5), two_sided_mix()}) {
    const double v = integrate_split([&](double x) { return std::exp(log_density(m, x)); }, m.support(), mean(m),
                                     std::sqrt(variance(m)))
                         .value;
    EXPECT_NEAR(v, 1.0, 1e-9);
  }
}
