#pragma once

#include <functional>

#include "ldis/distributions.hpp"

namespace ldis {

struct QuadResult {
  double value;
  double error;  // absolute error estimate
  double l1;     // ∫|f|
};

// Adaptive Gauss–Kronrod (61-point) on [a, b]; either end may be infinite.
// Throws QuadratureError if the error estimate exceeds rel_tol·l1 (plus a tiny
// absolute floor).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = tol::kQuadRel);

// Same, with panels split at center ± tol::kTailSd·scale and clipped to `support`.
QuadResult integrate_split(const std::function<double(double)>& f, Range support, double center,
                           double scale, double rel_tol = tol::kQuadRel);

// Region carrying essentially all the mass of exp(logf) on `support`: logf is
// scanned on a grid around `center`, the peak value is recorded as `shift`, and the
// window is widened until logf has dropped by `depth` nats (or the support ends).
struct MassWindow {
  double lo;
  double hi;
  double shift;
  double peak;
};
MassWindow find_mass_window(const std::function<double(double)>& logf, Range support,
                            double center, double scale, double depth = 60.0);

}  // namespace ldis
