#include "ldis/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "ldis/errors.hpp"
#include "ldis/numeric.hpp"

namespace ldis {

namespace {

constexpr double kEps = 1e-16;
constexpr int kGammaIter = 100000;
constexpr double kEnumCap = 1e7;

// log(1 − e^a) for a ≤ 0.
double log1mexp(double a) {
  if (a == -kInf) return 0.0;
  return a > -std::numbers::ln2 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

// log(e^a − e^b) for a ≥ b.
double log_sub(double a, double b) {
  if (b == -kInf) return a;
  if (b >= a) return -kInf;
  return a + log1mexp(b - a);
}

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

// log P(a, x) by the power series; valid for x < a + 1.
double log_gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < kGammaIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) return log_prefactor(a, x) + std::log(sum);
  }
  throw ConvergenceError("incomplete gamma: series did not converge");
}

// log Q(a, x) by the modified Lentz continued fraction; valid for x ≥ a + 1.
double log_gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return log_prefactor(a, x) + std::log(h);
  }
  throw ConvergenceError("incomplete gamma: continued fraction did not converge");
}

}  // namespace

const char* to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::closed_form: return "closed_form";
    case OracleMethod::enumeration: return "enumeration";
    case OracleMethod::grid: return "grid";
  }
  return "?";
}

double log_normal_tail(double z) {
  if (z < 30.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  // Laplace continued fraction for the Mills ratio.
  double cf = z;
  for (int k = 60; k >= 1; --k) cf = z + k / cf;
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(cf);
}

double log_gamma_q(double a, double x) {
  if (!(a > 0)) throw DomainError("incomplete gamma: a must be > 0");
  if (std::isnan(x)) throw DomainError("incomplete gamma: x is NaN");
  if (x <= 0) return 0.0;
  if (x == kInf) return -kInf;
  if (x < a + 1.0) return log1mexp(log_gamma_p_series(a, x));
  return log_gamma_q_cf(a, x);
}

double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

OracleResult exact_alpha_gaussian(int n, const EventSet& A, double mean, double variance) {
  if (n < 1) throw DomainError("exact_alpha_gaussian: n must be ≥ 1");
  if (!(variance > 0)) throw DomainError("exact_alpha_gaussian: variance must be > 0");
  const double k = std::sqrt(static_cast<double>(n) / variance);
  double acc = -kInf;
  std::uint64_t work = 0;
  for (const Interval& iv : A.intervals()) {
    const double zl = (iv.lo - mean) * k;
    const double zh = (iv.hi - mean) * k;
    double lp;
    if (zl >= 0) {
      lp = log_sub(log_normal_tail(zl), log_normal_tail(zh));
    } else if (zh <= 0) {
      lp = log_sub(log_normal_tail(-zh), log_normal_tail(-zl));
    } else {
      // 1 − Φ̄(−zl) − Φ̄(zh)
      lp = log1mexp(log_add(log_normal_tail(-zl), log_normal_tail(zh)));
    }
    acc = log_add(acc, lp);
    work += 2;
  }
  return {std::exp(acc), OracleMethod::closed_form, work, acc};
}

OracleResult exact_alpha_exponential(int n, double b) {
  if (n < 1) throw DomainError("exact_alpha_exponential: n must be ≥ 1");
  if (!(b > 0)) throw DomainError("exact_alpha_exponential: b must be > 0");
  const double lq = log_gamma_q(n, n * b);
  return {std::exp(lq), OracleMethod::closed_form, 1, lq};
}

OracleResult exact_alpha_exponential(int n, const EventSet& A, double rate) {
  if (n < 1) throw DomainError("exact_alpha_exponential: n must be ≥ 1");
  if (!(rate > 0)) throw DomainError("exact_alpha_exponential: rate must be > 0");
  double acc = -kInf;
  std::uint64_t work = 0;
  for (const Interval& iv : A.intervals()) {
    // S_n·rate ~ Gamma(n, 1).
    const double lo = std::max(iv.lo, 0.0) * n * rate;
    const double hi = iv.hi * n * rate;
    if (!(hi > lo)) continue;
    acc = log_add(acc, log_sub(log_gamma_q(n, lo), log_gamma_q(n, hi)));
    work += 2;
  }
  return {std::exp(acc), OracleMethod::closed_form, work, acc};
}

OracleResult enumerate_exact(const DistributionModel& p, const DistributionModel& q, int n,
                             const EventSet& A, double xi) {
  const auto* fp = std::get_if<FiniteDiscrete>(&p.kind());
  const auto* fq = std::get_if<FiniteDiscrete>(&q.kind());
  if (!fp || !fq) throw UnsupportedError("enumerate_exact: p and q must be FiniteDiscrete");
  if (n < 1) throw DomainError("enumerate_exact: n must be ≥ 1");
  if (!(xi > 0)) throw DomainError("enumerate_exact: xi must be > 0");

  std::map<double, std::pair<double, double>> merged;  // point → (p, q)
  for (std::size_t i = 0; i < fp->points.size(); ++i) merged[fp->points[i]].first += fp->probs[i];
  for (std::size_t i = 0; i < fq->points.size(); ++i) merged[fq->points[i]].second += fq->probs[i];
  std::vector<double> pts, lp, lq;
  for (auto [x, pq] : merged) {
    pts.push_back(x);
    lp.push_back(std::log(pq.first));
    lq.push_back(std::log(pq.second));
  }
  const std::size_t k = pts.size();
  const double work_d = std::pow(static_cast<double>(k), n);
  if (work_d > kEnumCap) throw BudgetError("enumerate_exact: |support|^n exceeds 1e7");

  // Every count vector c with Σc = n, one type class each.
  std::vector<int> c(k, 0);
  std::vector<double> mom_terms;
  std::vector<double> alpha_terms;
  const double lg_n1 = std::lgamma(n + 1.0);
  auto visit = [&] {
    double s = 0.0;
    double lmult = lg_n1;
    double lpc = 0.0;
    double lqc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (c[i] == 0) continue;
      s += c[i] * pts[i];
      lmult -= std::lgamma(c[i] + 1.0);
      lpc += c[i] * lp[i];
      lqc += c[i] * lq[i];
    }
    if (!A.contains(s / n)) return;
    alpha_terms.push_back(lmult + lpc);
    if (lqc > -kInf && lpc > -kInf) mom_terms.push_back(lmult + lqc + xi * (lpc - lqc));
  };
  std::function<void(std::size_t, int)> fill = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      c[i] = left;
      visit();
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[i] = v;
      fill(i + 1, left - v);
    }
  };
  fill(0, n);
  const double lm = log_sum_exp(mom_terms);
  const double la = log_sum_exp(alpha_terms);
  OracleResult r{std::exp(lm), OracleMethod::enumeration, static_cast<std::uint64_t>(work_d), lm};
  r.alpha = std::exp(la);
  return r;
}

OracleResult grid_minimize(const std::function<double(double)>& f, const EventSet& intervals,
                           int points_per_interval) {
  if (points_per_interval < 3) throw DomainError("grid_minimize: need ≥ 3 points per interval");
  if (intervals.empty()) throw DomainError("grid_minimize: empty set");
  std::uint64_t work = 0;
  auto counted = [&](double x) {
    ++work;
    return f(x);
  };
  double best = kInf;
  double best_x = kNaN;
  for (const Interval& iv : intervals.intervals()) {
    // t ∈ [0, 1] ↦ x; unbounded ends are approached but never evaluated.
    const bool lo_inf = !std::isfinite(iv.lo);
    const bool hi_inf = !std::isfinite(iv.hi);
    std::function<double(double)> map;
    if (!lo_inf && !hi_inf) {
      map = [iv](double t) { return iv.lo + t * (iv.hi - iv.lo); };
    } else if (!lo_inf) {
      map = [iv](double t) { return iv.lo + t / (1.0 - t); };
    } else if (!hi_inf) {
      map = [iv](double t) { return iv.hi - (1.0 - t) / t; };
    } else {
      map = [](double t) { return std::tan(std::numbers::pi * (t - 0.5)); };
    }
    const double t0 = lo_inf ? 1.0 / points_per_interval : 0.0;
    const double t1 = hi_inf ? 1.0 - 1.0 / points_per_interval : 1.0;
    const int m = points_per_interval;
    int kb = -1;
    double vb = kInf;
    for (int i = 0; i < m; ++i) {
      const double v = counted(map(t0 + (t1 - t0) * i / (m - 1)));
      if (v < vb) {
        vb = v;
        kb = i;
      }
    }
    if (kb < 0) continue;
    const double ta = t0 + (t1 - t0) * std::max(kb - 1, 0) / (m - 1);
    const double tb = t0 + (t1 - t0) * std::min(kb + 1, m - 1) / (m - 1);
    const Minimum mm = golden_minimize([&](double t) { return counted(map(t)); }, ta, tb, 1e-15);
    if (mm.value < best) {
      best = mm.value;
      best_x = map(mm.x);
    }
  }
  OracleResult r{best, OracleMethod::grid, work, best > 0 ? std::log(best) : kNaN};
  r.arg = best_x;
  return r;
}

AlphaProvider exact_log_alpha(const DistributionModel& p, const EventSet& A) {
  if (const auto* g = std::get_if<Gaussian>(&p.kind())) {
    const Gaussian gp = *g;
    return [gp, A](int n) { return exact_alpha_gaussian(n, A, gp.mean, gp.variance).log_value; };
  }
  if (const auto* e = std::get_if<Exponential>(&p.kind())) {
    const double rate = e->rate;
    return [rate, A](int n) { return exact_alpha_exponential(n, A, rate).log_value; };
  }
  if (p.is_discrete() && std::holds_alternative<FiniteDiscrete>(p.kind())) {
    const DistributionModel pc = p;
    return [pc, A](int n) { return enumerate_exact(pc, pc, n, A, 1.0).log_value; };
  }
  throw OracleUnavailable("no exact probability oracle for " + p.name());
}

}  // namespace ldis
