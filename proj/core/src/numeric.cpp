#include "ldis/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "ldis/errors.hpp"

namespace ldis {

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  if (m == kInf) return kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Root brent_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0, true};
  if (fhi == 0.0) return {hi, 0, true};
  if ((flo < 0) == (fhi < 0)) throw ConvergenceError("brent_root: endpoints do not bracket a root");
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto stop = [xtol](double a, double b) {
    return std::abs(b - a) <= xtol * std::max(1.0, std::min(std::abs(a), std::abs(b)));
  };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  // Return whichever side is closer to zero.
  double fa = f(a);
  double fb = f(b);
  double x = std::abs(fa) <= std::abs(fb) ? a : b;
  return {x, static_cast<int>(iters), iters < static_cast<std::uintmax_t>(max_iter)};
}

Minimum golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                        double rel_tol) {
  const double g = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo;
  double b = hi;
  double x1 = a + g * (b - a);
  double x2 = b - g * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < 400; ++i) {
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(a) + std::abs(b))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b - g * (b - a);
      f2 = f(x2);
    }
  }
  Minimum best = f1 <= f2 ? Minimum{x1, f1} : Minimum{x2, f2};
  double flo = f(lo);
  double fhi = f(hi);
  if (flo <= best.value) best = {lo, flo};
  if (fhi < best.value) best = {hi, fhi};
  return best;
}

Minimum convex_minimize(const std::function<double(double)>& f, double lo, double hi,
                        double start_scale) {
  if (!(lo <= hi)) throw DomainError("convex_minimize: empty interval");
  if (std::isfinite(lo) && std::isfinite(hi)) return golden_minimize(f, lo, hi);

  // Anchor at a finite point and expand towards the infinite end(s) until the
  // function stops decreasing; convexity then confines the minimum.
  double step = std::max(start_scale, 1e-3);
  if (std::isfinite(lo)) {
    double a = lo;
    double fa = f(a);
    double b = lo + step;
    double fb = f(b);
    for (int k = 0; k < tol::kMaxExpand && fb < fa; ++k) {
      a = b;
      fa = fb;
      step *= tol::kExpandFactor;
      b = a + step;
      fb = f(b);
    }
    return golden_minimize(f, lo, b);
  }
  if (std::isfinite(hi)) {
    double b = hi;
    double fb = f(b);
    double a = hi - step;
    double fa = f(a);
    for (int k = 0; k < tol::kMaxExpand && fa < fb; ++k) {
      b = a;
      fb = fa;
      step *= tol::kExpandFactor;
      a = b - step;
      fa = f(a);
    }
    return golden_minimize(f, a, hi);
  }
  // Whole line: expand both sides from 0.
  double a = -step;
  double b = step;
  for (int k = 0; k < tol::kMaxExpand; ++k) {
    double f0 = f(0.5 * (a + b));
    bool left_ok = f(a) >= f0;
    bool right_ok = f(b) >= f0;
    if (left_ok && right_ok) break;
    if (!left_ok) a -= (b - a);
    if (!right_ok) b += (b - a);
  }
  return golden_minimize(f, a, b);
}

}  // namespace ldis
