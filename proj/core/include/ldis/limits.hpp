#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ldis/distributions.hpp"
#include "ldis/event_set.hpp"

namespace ldis {

// Replication-level mixture: each replication picks component i with probability
// w_i and draws its whole walk from q_i; the likelihood ratio uses the mixture of
// the product densities.
struct WalkMixture {
  std::vector<double> weights;
  std::vector<DistributionModel> components;

  void validate() const;
};

// θ with q = tilt(p, θ), if q is an exact exponential tilt of p.
std::optional<double> tilt_parameter(const DistributionModel& p, const DistributionModel& q);

// inf_{x ∈ A} I_p(x) and a minimizer (NaN when A misses the rate domain).
struct DominatingPoint {
  double rate;
  double x;
};
DominatingPoint dominating_point(const DistributionModel& p, const EventSet& A);

// {x ∈ A : I_q(x) ≤ r}. r = +inf returns A unchanged.
EventSet a_r_set(const DistributionModel& p, const DistributionModel& q, double r, const EventSet& A);

// Limit of (1/n) log((1/m_n) Σ (Zʲ)^ξ) with m_n = exp(rn). When A_r is empty the
// estimator is zero with probability → 1: value = -inf and zero_hit = true.
struct ExponentLimit {
  double value;
  bool zero_hit;
  double argmin;  // minimizing mean (NaN in the zero-hit regime)
};
ExponentLimit y_limit(const DistributionModel& p, const DistributionModel& q, double xi, double r,
                      const EventSet& A);
ExponentLimit y_limit(const DistributionModel& p, const WalkMixture& q, double xi, double r,
                      const EventSet& A);

// Smallest r at which the ξ = 1 limit reaches -inf_A I_p: H(ν*|q) at the dominating
// distribution ν* = tilt(p, η(x*)).
double required_rate(const DistributionModel& p, const DistributionModel& q, const EventSet& A);

// D_q(x) = H(tilt(p, η(x)) | q), the q-entropy of the p-tilted measure with mean x.
double tilted_q_entropy(const DistributionModel& p, const DistributionModel& q, double x);

struct Breakpoint {
  double r;
  std::string label;  // plateau_start, plateau_end, switch, crossing
};

struct LraCurve {
  std::vector<double> r_grid;
  std::vector<double> values;
  std::vector<std::string> regimes;  // per point: active, saturated or zero
  std::vector<Breakpoint> breakpoints;
  double base_rate = kNaN;
};

enum class LraMode {
  per_x_tilt,   // ν restricted to p-tilts; exact when q is a tilt of p
  variational,  // ν over the geometric family p^a q^(1−a) e^{λy}, a ∈ [0, 2], on a grid
};

LraCurve lra_curve(const DistributionModel& p, const DistributionModel& q, const EventSet& A,
                   const std::vector<double>& r_grid, LraMode mode = LraMode::per_x_tilt);

// Pointwise maximum of the component curves; breakpoints mark where the maximizing
// component changes (label "crossing").
LraCurve mixture_lra(const WalkMixture& q, const DistributionModel& p, const EventSet& A,
                     const std::vector<double>& r_grid);

// inf_x max_i [I_p(x) + ½(r − D_i(x))⁺] − inf_A I_p: the per-x value of the walk
// mixture, whose q-entropy is the minimum over components.
LraCurve mixture_lra_joint(const WalkMixture& q, const DistributionModel& p, const EventSet& A,
                           const std::vector<double>& r_grid);

// y(ξ=2, r=∞) = 2·y(ξ=1, r=∞) within 1e-6.
bool is_log_efficient(const DistributionModel& p, const DistributionModel& q, const EventSet& A);
bool is_log_efficient(const DistributionModel& p, const WalkMixture& q, const EventSet& A);

// D_q(x) ≤ I_p(x) on a grid over A ∩ {I_p ≤ r}. Throws InfeasibleError if that set is empty.
bool cmc_dominance(const DistributionModel& p, const DistributionModel& q, const EventSet& A,
                   double r);

// Exponent of σ_n/α_n: ½·y(2, ∞) − y(1, ∞).
double relative_variance_exponent(const DistributionModel& p, const DistributionModel& q,
                                  const EventSet& A);

// Log-spaced grid of `count` points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace ldis
