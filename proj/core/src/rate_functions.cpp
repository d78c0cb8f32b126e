#include "ldis/rate_functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geometric_family.hpp"
#include "ldis/errors.hpp"

namespace ldis {

namespace {

using detail::GeometricFamily;

// Largest step below `edge` when expanding from `from` towards an open domain end.
double step_towards(double from, double step, double edge) {
  const double next = from + step;
  if (std::isfinite(edge) && ((step > 0 && next >= edge) || (step < 0 && next <= edge))) {
    return from + 0.5 * (edge - from);
  }
  return next;
}

GeometricMinimizer describe(const GeometricFamily::State& s) {
  return {s.a, s.lambda, s.mean, GeometricFamily::entropy_q(s), -s.log_ratio_pq};
}

}  // namespace

Range rate_domain(const DistributionModel& model) {
  if (std::holds_alternative<Exponential>(model.kind())) return {0.0, kInf};
  return model.support();
}

RateEvaluation legendre(const DistributionModel& model, double x) {
  if (std::isnan(x)) throw DomainError("legendre: x is NaN");
  const Range dom = rate_domain(model);
  if (!(x >= dom.lo && x <= dom.hi) || !std::isfinite(x)) return {x, kInf, kNaN, true};

  // Boundary atoms of a discrete model: the supremum is attained only as η → ±∞.
  if (model.is_discrete() && (x == dom.lo || x == dom.hi)) {
    const double lp = log_density(model, x);
    return {x, -lp, x == dom.lo ? -kInf : kInf, true};
  }
  if (std::holds_alternative<Exponential>(model.kind()) && x <= 0.0) return {x, kInf, kNaN, true};

  const Range mgf = model.mgf_domain();
  const double tol_abs = tol::kRootAbs * std::max(1.0, std::abs(x));
  MgfDerivatives d = log_mgf_derivatives(model, 0.0);
  if (std::abs(d.d1 - x) <= tol_abs) return {x, 0.0, 0.0, true};

  // Bracket η between lo (Λ' < x) and hi (Λ' > x), expanding by ×2 inside the domain.
  double lo = 0.0;
  double hi = 0.0;
  const double dir = d.d1 < x ? 1.0 : -1.0;
  {
    double from = 0.0;
    double step = dir;
    bool found = false;
    for (int k = 0; k < tol::kMaxExpand; ++k) {
      const double next = step_towards(from, step, dir > 0 ? mgf.hi : mgf.lo);
      const double f = log_mgf_derivatives(model, next).d1 - x;
      if ((dir > 0 && f > 0) || (dir < 0 && f < 0)) {
        lo = dir > 0 ? from : next;
        hi = dir > 0 ? next : from;
        found = true;
        break;
      }
      from = next;
      step *= tol::kExpandFactor;
    }
    if (!found) {
      std::ostringstream os;
      os << "legendre: cannot bracket the tilt for x=" << x << " under " << model.name();
      throw ConvergenceError(os.str());
    }
  }

  double eta = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < tol::kMaxIter; ++it) {
    d = log_mgf_derivatives(model, eta);
    const double f = d.d1 - x;
    if (std::abs(f) <= tol_abs) {
      converged = true;
      break;
    }
    if (f < 0) lo = eta;
    else hi = eta;
    double next = d.d2 > 0 ? eta - f / d.d2 : kNaN;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == eta || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(eta)) {
      // Bracket collapsed to adjacent doubles: best attainable.
      converged = std::abs(f) <= 1e3 * tol_abs;
      break;
    }
    eta = next;
  }
  if (!converged) {
    std::ostringstream os;
    os << "legendre: Newton failed for x=" << x << " under " << model.name();
    throw ConvergenceError(os.str());
  }
  d = log_mgf_derivatives(model, eta);
  const double value = std::max(eta * x - d.value, 0.0);
  return {x, value, eta, true};
}

double tilted_rate(const DistributionModel& model, double theta, double x) {
  const double lam = log_mgf(model, theta);
  const double i = legendre(model, x).value;
  if (i == kInf) return kInf;
  return std::max(i - theta * x + lam, 0.0);
}

double moment_rate(const DistributionModel& model, double theta, double xi, double x) {
  if (!(xi > 0)) throw DomainError("moment_rate: xi must be > 0");
  const double lam = log_mgf(model, theta);
  const double i = legendre(model, x).value;
  if (i == kInf) return kInf;
  return i + (xi - 1.0) * (theta * x - lam);
}

double xi_entropy(const GeometricMinimizer& m, double xi) {
  return xi * m.log_ratio_qp + m.entropy_q;
}

VariationalResult xi_moment_exponent_general(const DistributionModel& p, const DistributionModel& q,
                                             double xi, double x) {
  if (!(xi > 0)) throw DomainError("xi_moment_exponent_general: xi must be > 0");
  GeometricFamily fam(p, q);
  const GeometricFamily::State s = fam.match_mean(xi, x);
  const GeometricMinimizer mz = describe(s);
  return {xi_entropy(mz, xi), s.lambda, 0.0, mz, true};
}

VariationalResult budgeted_entropy_min_at(const DistributionModel& p, const DistributionModel& q,
                                          double r, double xi, double x) {
  if (!(xi > 0)) throw DomainError("budgeted_entropy_min_at: xi must be > 0");
  if (!(r > 0)) throw DomainError("budgeted_entropy_min_at: r must be > 0");
  const VariationalResult infeasible{kInf, kNaN, kNaN, {}, false};
  GeometricFamily fam(p, q);
  const Range mr = fam.mean_range();
  if (!(x > mr.lo && x < mr.hi)) return infeasible;

  const GeometricFamily::State top = fam.match_mean(xi, x);
  if (GeometricFamily::entropy_q(top) <= r) {
    const GeometricMinimizer mz = describe(top);
    return {xi_entropy(mz, xi), top.lambda, 0.0, mz, true};
  }
  const GeometricFamily::State bottom = fam.match_mean(0.0, x);
  if (GeometricFamily::entropy_q(bottom) > r) return infeasible;

  // The budget binds: pick the family exponent a = ξ/(1+β) with H(ν_a|q) = r.
  auto h = [&](double a) { return GeometricFamily::entropy_q(fam.match_mean(a, x)) - r; };
  const Root root = brent_root(h, 0.0, xi, 1e-13);
  const GeometricFamily::State s = fam.match_mean(root.x, x);
  const GeometricMinimizer mz = describe(s);
  const double beta = root.x > 0 ? xi / root.x - 1.0 : kInf;
  return {xi_entropy(mz, xi), s.lambda, beta, mz, true};
}

VariationalResult reachable_entropy_min(const DistributionModel& p, const DistributionModel& q,
                                        double r, const EventSet& A, double xi) {
  if (!(r > 0)) throw DomainError("reachable_entropy_min: r must be > 0");
  if (!(xi > 0)) throw DomainError("reachable_entropy_min: xi must be > 0");
  GeometricFamily fam(p, q);
  const Range mr = fam.mean_range();
  // Stay a hair inside an open mean range so every candidate is attainable.
  const double width = std::isfinite(mr.hi - mr.lo) ? mr.hi - mr.lo : 1.0;
  Interval feasible{std::isfinite(mr.lo) ? mr.lo + 1e-9 * width : mr.lo,
                    std::isfinite(mr.hi) ? mr.hi - 1e-9 * width : mr.hi};

  if (std::isfinite(r)) {
    // {x : min_{ν: mean x} H(ν|q) ≤ r} is an interval around the mean of the a = 0 member.
    const GeometricFamily::State base = fam.evaluate(0.0, 0.0, mean(q));
    const double x0 = base.mean;
    auto h0 = [&](double x) { return GeometricFamily::entropy_q(fam.match_mean(0.0, x)) - r; };
    if (h0(x0) > 0) {
      std::ostringstream os;
      os << "reachable_entropy_min: even the closest admissible measure has H(.|q) = "
         << GeometricFamily::entropy_q(base) << " > r = " << r;
      throw InfeasibleError(os.str());
    }
    const double scale = std::sqrt(std::max(base.var, 1e-300));
    auto boundary = [&](double dir) {
      const double edge = dir > 0 ? feasible.hi : feasible.lo;
      double from = x0;
      double step = dir * scale;
      for (int k = 0; k < tol::kMaxExpand; ++k) {
        const double next = step_towards(from, step, edge);
        if (std::abs(next - edge) <= 1e-12 * std::max(1.0, std::abs(edge))) return edge;
        if (h0(next) > 0) return brent_root(h0, std::min(from, next), std::max(from, next), 1e-13).x;
        from = next;
        step *= tol::kExpandFactor;
      }
      return edge;
    };
    feasible = {boundary(-1.0), boundary(+1.0)};
  }

  const EventSet region = A.intersect(feasible);
  if (region.empty()) throw InfeasibleError("reachable_entropy_min: no admissible mean lies in A");

  VariationalResult best{kInf, kNaN, kNaN, {}, false};
  for (const Interval& iv : region.intervals()) {
    auto objective = [&](double x) {
      return std::isfinite(r) ? budgeted_entropy_min_at(p, q, r, xi, x).objective
                              : xi_moment_exponent_general(p, q, xi, x).objective;
    };
    const Minimum m = convex_minimize(objective, iv.lo, iv.hi, std::sqrt(variance(q)));
    if (m.value < best.objective) {
      best = std::isfinite(r) ? budgeted_entropy_min_at(p, q, r, xi, m.x)
                              : xi_moment_exponent_general(p, q, xi, m.x);
    }
  }
  if (!best.feasible) throw InfeasibleError("reachable_entropy_min: no feasible minimizer");
  return best;
}

}  // namespace ldis
