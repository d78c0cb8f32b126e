#pragma once

#include <functional>
#include <limits>
#include <span>

namespace ldis {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Solver constants shared by every 1-D root finder and minimizer.
namespace tol {
inline constexpr double kRootAbs = 1e-12;     // |Λ'(η) - x| target in legendre
inline constexpr int kMaxIter = 200;          // Newton / bisection cap
inline constexpr double kExpandFactor = 2.0;  // bracket growth
inline constexpr int kMaxExpand = 80;         // bracket growth steps
inline constexpr double kGoldenRel = 1e-13;   // golden-section relative width
inline constexpr double kQuadRel = 1e-11;     // inner quadrature target
inline constexpr double kKlRel = 1e-9;        // kl_divergence quadrature target
inline constexpr double kTailSd = 12.0;       // tail split at mean ± 12 sd
}  // namespace tol

// log(exp(a) + exp(b)) with -inf handled.
double log_add(double a, double b);

// log(sum exp(v)); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> v);

struct Root {
  double x;
  int iters;
  bool converged;
};

// Bisection/secant hybrid (Brent) on [lo, hi]; f(lo) and f(hi) must differ in sign.
Root brent_root(const std::function<double(double)>& f, double lo, double hi,
                double xtol = 1e-14, int max_iter = tol::kMaxIter);

struct Minimum {
  double x;
  double value;
};

// Golden-section search on [lo, hi] for a unimodal f; the endpoints are compared
// against the interior candidate so boundary minima are returned exactly.
Minimum golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                        double rel_tol = tol::kGoldenRel);

// Convex minimization over [lo, hi] where either end may be infinite. Infinite ends
// are handled by expanding from a finite start point until the function turns up.
Minimum convex_minimize(const std::function<double(double)>& f, double lo, double hi,
                        double start_scale = 1.0);

}  // namespace ldis
