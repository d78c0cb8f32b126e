#pragma once

#include "ldis/distributions.hpp"
#include "ldis/event_set.hpp"

namespace ldis {

struct RateEvaluation {
  double x;
  double value;       // I(x), possibly +inf
  double tilt_param;  // η(x) with Λ'(η) = x; ±inf at a boundary supremum; NaN when I = +inf
  bool converged;
};

// Cramér rate I(x) = sup_θ {θx − Λ(θ)} by safeguarded Newton on Λ'(η) = x.
RateEvaluation legendre(const DistributionModel& model, double x);

// I^θ(x) = I(x) − θx + Λ(θ).
double tilted_rate(const DistributionModel& model, double theta, double x);

// I_ξ^θ(x) = I(x) + (ξ − 1)(θx − Λ(θ)).
double moment_rate(const DistributionModel& model, double theta, double xi, double x);

// Member of the geometric family dν ∝ p^a q^(1−a) exp(λy) selected by a solver.
struct GeometricMinimizer {
  double p_exponent;       // a
  double lambda;           // mean multiplier
  double mean;             // E_ν[Y]
  double entropy_q;        // H(ν|q)
  double log_ratio_qp;     // E_ν[log dq/dp]
};

// H_ξ(ν|q) = ξ·E_ν[log dq/dp] + H(ν|q) for a solver minimizer.
double xi_entropy(const GeometricMinimizer& m, double xi);

struct VariationalResult {
  double objective;          // +inf when infeasible
  double lagrange_mean;      // λ
  double lagrange_entropy;   // β ≥ 0; 0 when the entropy budget is slack
  GeometricMinimizer minimizer;
  bool feasible;
};

// inf over ν with mean x of H_ξ(ν|q). The minimizer lies in the family
// dν ∝ p^ξ q^(1−ξ) exp(λy), whose log-MGF is evaluated by quadrature.
// Throws InfeasibleError if no member has mean x, DomainError if p^ξ q^(1−ξ) has
// infinite mass.
VariationalResult xi_moment_exponent_general(const DistributionModel& p, const DistributionModel& q,
                                             double xi, double x);

// Same objective with the extra constraint H(ν|q) ≤ r, at a fixed mean x.
// Returns feasible = false (objective +inf) when no ν with mean x meets the budget.
VariationalResult budgeted_entropy_min_at(const DistributionModel& p, const DistributionModel& q,
                                          double r, double xi, double x);

// inf of H_ξ(ν|q) over ν with mean in A and H(ν|q) ≤ r (r may be +inf).
// Throws InfeasibleError when that set is empty.
VariationalResult reachable_entropy_min(const DistributionModel& p, const DistributionModel& q,
                                        double r, const EventSet& A, double xi);

// Closure of the set where I is finite: Gaussian ℝ, Exponential [0, ∞),
// FiniteDiscrete [min, max], Mixture the hull of its components'.
Range rate_domain(const DistributionModel& model);

}  // namespace ldis
