#include "geometric_family.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ldis/errors.hpp"
#include "ldis/quadrature.hpp"

namespace ldis::detail {

namespace {

std::map<double, double> atom_map(const DistributionModel& m) {
  std::map<double, double> out;
  if (const auto* fd = std::get_if<FiniteDiscrete>(&m.kind())) {
    for (std::size_t i = 0; i < fd->points.size(); ++i) {
      if (fd->probs[i] > 0) out[fd->points[i]] += fd->probs[i];
    }
  } else if (const auto* mx = std::get_if<Mixture>(&m.kind())) {
    for (std::size_t i = 0; i < mx->components.size(); ++i) {
      for (auto [x, w] : atom_map(mx->components[i])) out[x] += mx->weights[i] * w;
    }
  }
  return out;
}

}  // namespace

GeometricFamily::GeometricFamily(const DistributionModel& p, const DistributionModel& q)
    : p_(p), q_(q), discrete_(p.is_discrete()) {
  if (p.is_discrete() != q.is_discrete()) {
    throw UnsupportedError("geometric family: p and q must both be discrete or both continuous");
  }
  if (discrete_) {
    const auto pa = atom_map(p);
    const auto qa = atom_map(q);
    for (auto [x, w] : pa) {
      auto it = qa.find(x);
      if (it == qa.end()) continue;
      pts_.push_back(x);
      lp_.push_back(std::log(w));
      lq_.push_back(std::log(it->second));
    }
    if (pts_.empty()) throw InfeasibleError("geometric family: p and q share no atoms");
    support_ = {pts_.front(), pts_.back()};
    mean_range_ = support_;
    scale_ = 1.0;
  } else {
    const Range sp = p.support();
    const Range sq = q.support();
    support_ = {std::max(sp.lo, sq.lo), std::min(sp.hi, sq.hi)};
    if (!(support_.lo < support_.hi)) throw InfeasibleError("geometric family: disjoint supports");
    mean_range_ = support_;
    scale_ = std::min(std::sqrt(variance(p)), std::sqrt(variance(q)));
  }
}

double GeometricFamily::log_weight(double a, double y) const {
  const double lp = log_density(p_, y);
  if (lp == -kInf) return -kInf;
  const double lq = log_density(q_, y);
  if (lq == -kInf) return -kInf;
  if (a == 0.0) return lq;
  return a * lp + (1.0 - a) * lq;
}

GeometricFamily::State GeometricFamily::evaluate(double a, double lambda, double center) const {
  State s{a, lambda, 0, 0, 0, 0};
  if (discrete_) {
    const std::size_t k = pts_.size();
    std::vector<double> lw(k);
    for (std::size_t i = 0; i < k; ++i) {
      lw[i] = (a == 0.0 ? lq_[i] : a * lp_[i] + (1.0 - a) * lq_[i]) + lambda * pts_[i];
    }
    s.log_norm = log_sum_exp(lw);
    for (std::size_t i = 0; i < k; ++i) {
      const double w = std::exp(lw[i] - s.log_norm);
      s.mean += w * pts_[i];
      s.log_ratio_pq += w * (lp_[i] - lq_[i]);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double d = pts_[i] - s.mean;
      s.var += std::exp(lw[i] - s.log_norm) * d * d;
    }
    return s;
  }

  auto logf = [&](double y) { return log_weight(a, y) + lambda * y; };
  const double c0 = std::clamp(center, support_.lo, support_.hi);
  const MassWindow win = find_mass_window(logf, support_, c0, scale_);
  const double c = win.peak;
  auto w = [&](double y) {
    const double v = logf(y);
    return v == -kInf ? 0.0 : std::exp(v - win.shift);
  };
  const double i0 = integrate(w, win.lo, win.hi).value;
  const double i1 = integrate([&](double y) { return (y - c) * w(y); }, win.lo, win.hi).value;
  const double i2 = integrate([&](double y) { return (y - c) * (y - c) * w(y); }, win.lo, win.hi).value;
  const double id = integrate(
                        [&](double y) {
                          const double e = w(y);
                          return e == 0.0 ? 0.0 : (log_density(p_, y) - log_density(q_, y)) * e;
                        },
                        win.lo, win.hi)
                        .value;
  if (!(i0 > 0)) throw QuadratureError("geometric family: zero normalizer");
  s.log_norm = win.shift + std::log(i0);
  const double m1 = i1 / i0;
  s.mean = c + m1;
  s.var = std::max(i2 / i0 - m1 * m1, 0.0);
  s.log_ratio_pq = id / i0;
  return s;
}

GeometricFamily::State GeometricFamily::match_mean(double a, double x) const {
  if (!(x > mean_range_.lo && x < mean_range_.hi)) {
    throw InfeasibleError("geometric family: mean outside the attainable range");
  }
  const double tol_abs = 1e-10 * std::max(1.0, std::abs(x));

  // Evaluation that reports an infinite-mass λ as a failure instead of throwing.
  auto eval = [&](double lam, double center, State& out) {
    try {
      out = evaluate(a, lam, center);
      return std::isfinite(out.log_norm) && std::isfinite(out.mean);
    } catch (const QuadratureError&) {
      return false;
    }
  };

  const double start_center =
      discrete_ ? x : std::clamp(0.5 * (mean(p_) + mean(q_)), support_.lo, support_.hi);
  State s{};
  if (!eval(0.0, start_center, s)) {
    if (!eval(0.0, x, s)) {
      throw DomainError("geometric family: p^a q^(1-a) does not have finite mass");
    }
  }
  double lo = -kInf;  // mean(lo) < x
  double hi = kInf;   // mean(hi) > x
  double lam = 0.0;
  for (int it = 0; it < 400; ++it) {
    const double f = s.mean - x;
    if (std::abs(f) <= tol_abs) return s;
    if (f < 0) lo = std::max(lo, lam);
    else hi = std::min(hi, lam);
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo <= 1e-15 * std::max(1.0, std::abs(lam))) {
      return s;
    }
    double next = s.var > 0 ? lam - f / s.var : kNaN;
    const bool newton_ok = std::isfinite(next) && next > lo && next < hi;
    if (!newton_ok) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        next = lo + std::max(1.0, std::abs(lo));
      } else {
        next = hi - std::max(1.0, std::abs(hi));
      }
    }
    State t{};
    int shrink = 0;
    while (!eval(next, s.mean, t)) {
      // Infinite mass: the λ-domain ends before `next`; retreat towards lam.
      if (next > lam) hi = std::min(hi, next);
      else lo = std::max(lo, next);
      next = 0.5 * (lam + next);
      if (++shrink > 200) throw ConvergenceError("geometric family: cannot locate the λ-domain");
    }
    lam = next;
    s = t;
  }
  throw ConvergenceError("geometric family: mean matching did not converge");
}

}  // namespace ldis::detail
