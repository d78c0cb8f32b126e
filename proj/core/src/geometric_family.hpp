#pragma once

#include <vector>

#include "ldis/distributions.hpp"

namespace ldis::detail {

// The family dν ∝ p^a q^(1−a) exp(λy) used by the variational solvers. a = 0 is
// q restricted to the support of p. Integrals are quadratures for continuous
// models and finite sums for discrete ones.
class GeometricFamily {
 public:
  GeometricFamily(const DistributionModel& p, const DistributionModel& q);

  struct State {
    double a;
    double lambda;
    double log_norm;        // log ∫ p^a q^(1−a) e^{λy}
    double mean;
    double var;
    double log_ratio_pq;    // E_ν[log p − log q]
  };

  State evaluate(double a, double lambda, double center) const;

  // λ with E_ν[Y] = x. Throws InfeasibleError when x is outside the open hull of
  // the family's support.
  State match_mean(double a, double x) const;

  static double entropy_q(const State& s) {
    return s.a * s.log_ratio_pq + s.lambda * s.mean - s.log_norm;
  }

  // Open interval of attainable means.
  Range mean_range() const { return mean_range_; }

 private:
  double log_weight(double a, double y) const;

  const DistributionModel& p_;
  const DistributionModel& q_;
  bool discrete_;
  std::vector<double> pts_;       // common atoms (discrete case)
  std::vector<double> lp_, lq_;   // log p, log q at the atoms
  Range support_;
  Range mean_range_;
  double scale_;
};

}  // namespace ldis::detail
