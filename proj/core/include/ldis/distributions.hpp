#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ldis/numeric.hpp"
#include "ldis/random_stream.hpp"

namespace ldis {

class DistributionModel;

struct Gaussian {
  double mean;
  double variance;
};

struct Exponential {
  double rate;
};

struct FiniteDiscrete {
  std::vector<double> points;  // strictly increasing
  std::vector<double> probs;
};

struct Mixture {
  std::vector<double> weights;
  std::vector<DistributionModel> components;
};

// Closed interval hull [lo, hi] of a support or an open log-MGF domain (lo, hi).
struct Range {
  double lo;
  double hi;
};

// Immutable 1-D probability model. Construct through the named factories, which
// validate parameters and throw DomainError on invalid input.
class DistributionModel {
 public:
  using Kind = std::variant<Gaussian, Exponential, FiniteDiscrete, Mixture>;

  static DistributionModel gaussian(double mean, double variance);
  static DistributionModel exponential(double rate);
  static DistributionModel finite_discrete(std::vector<double> points, std::vector<double> probs);
  static DistributionModel mixture(std::vector<double> weights,
                                   std::vector<DistributionModel> components);

  const Kind& kind() const { return kind_; }
  // Open interval of θ with Λ(θ) < ∞.
  Range mgf_domain() const { return mgf_domain_; }
  // Closed hull of the support.
  Range support() const;
  bool is_discrete() const;
  std::string name() const;

  friend bool operator==(const DistributionModel& a, const DistributionModel& b);

 private:
  explicit DistributionModel(Kind k);
  Kind kind_;
  Range mgf_domain_;
};

bool operator==(const Gaussian& a, const Gaussian& b);
bool operator==(const Exponential& a, const Exponential& b);
bool operator==(const FiniteDiscrete& a, const FiniteDiscrete& b);
bool operator==(const Mixture& a, const Mixture& b);

// log density (log pmf for FiniteDiscrete); -inf outside the support.
double log_density(const DistributionModel& m, double x);

// Λ(θ) = log E exp(θX). Throws DomainError outside mgf_domain.
double log_mgf(const DistributionModel& m, double theta);

// Λ and its first two derivatives at θ (the tilted mean and variance).
struct MgfDerivatives {
  double value;
  double d1;
  double d2;
};
MgfDerivatives log_mgf_derivatives(const DistributionModel& m, double theta);

// Exponential change of measure dp^θ = dp·exp(θx − Λ(θ)). Mixture throws UnsupportedError.
DistributionModel tilt(const DistributionModel& m, double theta);

// One variate. Uniforms consumed per call: Gaussian 2, Exponential 1,
// FiniteDiscrete 1, Mixture 1 plus the chosen component's count.
double sample(const DistributionModel& m, RandomStream& stream);

double mean(const DistributionModel& m);
double variance(const DistributionModel& m);

// H(nu | mu) = ∫ log(dnu/dmu) dnu. Closed form for same-family pairs, quadrature
// otherwise; +inf when nu is not absolutely continuous w.r.t. mu.
double kl_divergence(const DistributionModel& nu, const DistributionModel& mu);

// Structural check that support(p) ⊆ support(q).
bool support_contained(const DistributionModel& p, const DistributionModel& q);

}  // namespace ldis
