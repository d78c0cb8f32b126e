#include "ldis/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ldis/errors.hpp"

namespace ldis {

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol) {
  if (a == b) return {0.0, 0.0, 0.0};
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 20, rel_tol, &err, &l1);
  if (!std::isfinite(v)) throw QuadratureError("integrate: non-finite result");
  if (err > 10.0 * rel_tol * l1 + 1e-300) {
    throw QuadratureError("integrate: error estimate " + std::to_string(err) +
                          " exceeds tolerance on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  }
  return {v, err, l1};
}

QuadResult integrate_split(const std::function<double(double)>& f, Range support, double center,
                           double scale, double rel_tol) {
  const double lo_cut = std::clamp(center - tol::kTailSd * scale, support.lo, support.hi);
  const double hi_cut = std::clamp(center + tol::kTailSd * scale, support.lo, support.hi);
  QuadResult out{0.0, 0.0, 0.0};
  auto add = [&](double a, double b) {
    if (!(a < b)) return;
    QuadResult r = integrate(f, a, b, rel_tol);
    out.value += r.value;
    out.error += r.error;
    out.l1 += r.l1;
  };
  add(support.lo, lo_cut);
  add(lo_cut, hi_cut);
  add(hi_cut, support.hi);
  return out;
}

MassWindow find_mass_window(const std::function<double(double)>& logf, Range support,
                            double center, double scale, double depth) {
  constexpr int kHalf = 64;
  const double h = scale / 4.0;
  double best_x = kNaN;
  double best = -kInf;
  auto probe = [&](double x) {
    x = std::clamp(x, support.lo, support.hi);
    if (!std::isfinite(x)) return;
    const double v = logf(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  };
  for (int k = -kHalf; k <= kHalf; ++k) probe(center + k * h);
  probe(support.lo);
  probe(support.hi);
  if (best == -kInf) throw QuadratureError("find_mass_window: integrand vanishes on the scan grid");
  if (!std::isfinite(best)) throw QuadratureError("find_mass_window: integrand is not finite");

  // Refine the peak so the shift is close to the true maximum.
  for (int pass = 0; pass < 3; ++pass) {
    const double c = best_x;
    const double w = h / std::pow(8.0, pass);
    for (int k = -8; k <= 8; ++k) probe(c + k * w);
  }

  auto walk = [&](double dir) {
    const double edge = dir < 0 ? support.lo : support.hi;
    double step = h;
    double x = best_x;
    for (int k = 0; k < 400; ++k) {
      double nx = x + dir * step;
      if ((dir < 0 && nx <= edge) || (dir > 0 && nx >= edge)) return edge;
      x = nx;
      if (std::abs(x - best_x) > 1e9 * scale) break;
      const double v = logf(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
      if (v < best - depth) return x;
      if (k > 16) step *= 1.25;
    }
    throw QuadratureError("find_mass_window: tail does not decay (infinite mass?)");
  };
  const double lo = walk(-1.0);
  const double hi = walk(+1.0);
  return {lo, hi, best, best_x};
}

}  // namespace ldis
