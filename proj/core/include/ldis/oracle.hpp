#pragma once

#include <cstdint>
#include <functional>

#include "ldis/distributions.hpp"
#include "ldis/event_set.hpp"
#include "ldis/mc_engine.hpp"

namespace ldis {

enum class OracleMethod { closed_form, enumeration, grid };

const char* to_string(OracleMethod m);

struct OracleResult {
  double value;
  OracleMethod method;
  std::uint64_t work;     // evaluations; |support|^n for enumeration
  double log_value;       // log of value, accurate where value underflows
  double alpha = kNaN;    // enumeration only: exact P(S_n/n ∈ A) under p
  double arg = kNaN;      // grid only: minimizer
};

// log Φ̄(z) = log P(N(0,1) > z), accurate in both tails.
double log_normal_tail(double z);

// Regularized upper incomplete gamma Q(a, x): series for x < a + 1, continued fraction otherwise.
double log_gamma_q(double a, double x);
double gamma_q(double a, double x);

// P(S_n/n ∈ A), S_n ~ Normal(n·mean, n·variance).
OracleResult exact_alpha_gaussian(int n, const EventSet& A, double mean, double variance);

// P(S_n > n·b) for Exp(1) increments: Q(n, n·b).
OracleResult exact_alpha_exponential(int n, double b);
// P(S_n/n ∈ A) for Exp(rate) increments.
OracleResult exact_alpha_exponential(int n, const EventSet& A, double rate);

// E^Q[Z^ξ] summed over type classes; alpha holds E^P[1{S_n/n ∈ A}].
// Throws BudgetError when |support|^n exceeds 10⁷.
OracleResult enumerate_exact(const DistributionModel& p, const DistributionModel& q, int n,
                             const EventSet& A, double xi);

// Dense grid per interval (unbounded ends mapped through t/(1−t)) and one golden-section
// refinement around the best grid point.
OracleResult grid_minimize(const std::function<double(double)>& f, const EventSet& intervals,
                           int points_per_interval);

// log α_n for the scenarios with an exact oracle; throws OracleUnavailable otherwise.
AlphaProvider exact_log_alpha(const DistributionModel& p, const EventSet& A);

}  // namespace ldis
