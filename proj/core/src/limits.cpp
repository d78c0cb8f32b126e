#include "ldis/limits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "geometric_family.hpp"
#include "ldis/errors.hpp"
#include "ldis/numeric.hpp"
#include "ldis/rate_functions.hpp"

namespace ldis {

namespace {

constexpr int kLraGrid = 2001;        // x points per interval in the per-x LRA table
constexpr int kVarGridX = 101;        // x points per interval in the variational table
constexpr int kVarGridA = 41;         // exponents a ∈ [0, 2]
constexpr int kBreakBisect = 60;      // bisection steps when locating a breakpoint
constexpr double kRegimeTol = 1e-9;   // |D(x) − r| below this counts as the kink
constexpr double kTieTol = 1e-12;

double rate_p(const DistributionModel& p, double x) { return legendre(p, x).value; }

double scale_of(const DistributionModel& m) { return std::sqrt(variance(m)); }

// One end of the sublevel set {I_q ≤ r}, searching from the mean towards `edge`.
double sublevel_end(const DistributionModel& q, double r, double dir) {
  const Range dom = rate_domain(q);
  const double edge = dir > 0 ? dom.hi : dom.lo;
  const double x0 = mean(q);
  auto f = [&](double x) { return rate_p(q, x) - r; };
  if (std::isfinite(edge) && f(edge) <= 0) return edge;
  double from = x0;
  double step = dir * scale_of(q);
  for (int k = 0; k < tol::kMaxExpand; ++k) {
    double next = from + step;
    if (std::isfinite(edge) && ((dir > 0 && next >= edge) || (dir < 0 && next <= edge))) {
      next = from + 0.5 * (edge - from);
    }
    if (f(next) > 0) return brent_root(f, std::min(from, next), std::max(from, next), 1e-15).x;
    from = next;
    step *= tol::kExpandFactor;
  }
  throw ConvergenceError("a_r_set: cannot bracket the sublevel boundary");
}

EventSet rate_region(const DistributionModel& p, const EventSet& A) {
  const Range dom = rate_domain(p);
  return A.intersect(Interval{dom.lo, dom.hi});
}

// Minimum of a convex objective over each interval; ties go to the point nearer `ref`.
Minimum min_over(const EventSet& region, const std::function<double(double)>& f, double scale,
                 double ref) {
  Minimum best{kNaN, kInf};
  for (const Interval& iv : region.intervals()) {
    const Minimum m = convex_minimize(f, iv.lo, iv.hi, scale);
    const bool tie = std::abs(m.value - best.value) <= kTieTol * std::max(1.0, std::abs(m.value));
    if ((m.value < best.value && !tie) ||
        (tie && std::abs(m.x - ref) < std::abs(best.x - ref))) {
      best = m;
    }
  }
  return best;
}

using EntropyFn = std::function<double(double)>;

EntropyFn q_entropy_fn(const DistributionModel& p, const DistributionModel& q) {
  if (const auto th = tilt_parameter(p, q)) {
    const double theta = *th;
    return [&p, theta](double x) { return tilted_rate(p, theta, x); };
  }
  return [&p, &q](double x) { return tilted_q_entropy(p, q, x); };
}

struct LraPoint {
  double value;
  std::string regime;
  int piece;
};

// Tabulated evaluator of inf_x [I_p(x) + ½(r − D(x))⁺] − H̄ for r up to r_max.
class PerXLra {
 public:
  PerXLra(const DistributionModel& p, EntropyFn d, const EventSet& A, double r_max)
      : d_(std::move(d)), p_(p) {
    const DominatingPoint dp = dominating_point(p, A);
    if (!std::isfinite(dp.rate)) throw InfeasibleError("lra: A has no point with finite rate under p");
    base_ = dp.rate;
    x_star_ = dp.x;
    // Points with I_p > H̄ + r/2 cannot beat the dominating point.
    const EventSet window = a_r_set(p, p, base_ + 0.5 * r_max + 1e-9, rate_region(p, A));
    for (const Interval& iv : window.intervals()) {
      Piece pc{iv, {}, {}, {}};
      for (int k = 0; k < kLraGrid; ++k) {
        const double x = iv.lo + (iv.hi - iv.lo) * k / (kLraGrid - 1);
        pc.x.push_back(x);
        pc.i.push_back(rate_p(p, x));
        pc.d.push_back(d_(x));
      }
      pieces_.push_back(std::move(pc));
    }
    if (pieces_.empty()) throw InfeasibleError("lra: empty search window");
  }

  double base_rate() const { return base_; }

  LraPoint eval(double r) const {
    double best = kInf;
    double best_x = kNaN;
    int best_piece = -1;
    auto consider = [&](double x, double v, int piece) {
      const bool tie = std::abs(v - best) <= kTieTol * std::max(1.0, std::abs(v));
      if ((v < best && !tie) || (tie && std::abs(x - x_star_) < std::abs(best_x - x_star_))) {
        best = v;
        best_x = x;
        best_piece = piece;
      }
    };
    auto g = [&](double x) {
      const double i = rate_p(p_, x);
      if (i == kInf) return kInf;
      return i + 0.5 * std::max(r - d_(x), 0.0);
    };
    for (int pi = 0; pi < static_cast<int>(pieces_.size()); ++pi) {
      const Piece& pc = pieces_[pi];
      const int n = static_cast<int>(pc.x.size());
      int kb = 0;
      double vb = kInf;
      for (int k = 0; k < n; ++k) {
        const double v = pc.i[k] + 0.5 * std::max(r - pc.d[k], 0.0);
        if (v < vb) {
          vb = v;
          kb = k;
        }
        consider(pc.x[k], v, pi);
        if (k + 1 < n && (pc.d[k] - r) * (pc.d[k + 1] - r) < 0 && std::isfinite(pc.d[k]) &&
            std::isfinite(pc.d[k + 1])) {
          const Root kink = brent_root([&](double x) { return d_(x) - r; }, pc.x[k], pc.x[k + 1], 1e-15);
          consider(kink.x, g(kink.x), pi);
        }
      }
      const double lo = pc.x[std::max(kb - 1, 0)];
      const double hi = pc.x[std::min(kb + 1, n - 1)];
      if (hi > lo) {
        const Minimum m = golden_minimize(g, lo, hi, 1e-14);
        consider(m.x, m.value, pi);
      }
    }
    const double value = std::max(best - base_, 0.0);
    std::string regime;
    if (value <= kTieTol) {
      regime = "zero";
    } else {
      const double dx = d_(best_x);
      if (dx < r - kRegimeTol) regime = "active";
      else if (dx > r + kRegimeTol) regime = "plateau";
      else regime = "kink";
    }
    return {value, regime, best_piece};
  }

 private:
  struct Piece {
    Interval iv;
    std::vector<double> x, i, d;
  };
  EntropyFn d_;
  const DistributionModel& p_;
  double base_ = 0;
  double x_star_ = 0;
  std::vector<Piece> pieces_;
};

std::string transition_label(const std::string& from, const std::string& to) {
  if (to == "plateau") return "plateau_start";
  if (from == "plateau") return "plateau_end";
  if (from == to) return "switch";
  return from + "_to_" + to;
}

void check_grid(const std::vector<double>& r_grid) {
  if (r_grid.empty()) throw DomainError("lra: empty r grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0) || !std::isfinite(r_grid[i])) throw DomainError("lra: r must be finite and > 0");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw DomainError("lra: r grid must be ascending");
  }
}

// Curve plus breakpoints where (piece, regime) changes between grid neighbours.
LraCurve trace(const PerXLra& ev, const std::vector<double>& r_grid) {
  LraCurve c;
  c.r_grid = r_grid;
  c.base_rate = ev.base_rate();
  std::vector<LraPoint> pts;
  for (double r : r_grid) pts.push_back(ev.eval(r));
  for (const LraPoint& pt : pts) {
    c.values.push_back(pt.value);
    c.regimes.push_back(pt.regime);
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const LraPoint& a = pts[i];
    const LraPoint& b = pts[i + 1];
    if (a.regime == b.regime && a.piece == b.piece) continue;
    double lo = r_grid[i];
    double hi = r_grid[i + 1];
    for (int k = 0; k < kBreakBisect; ++k) {
      const double mid = 0.5 * (lo + hi);
      const LraPoint m = ev.eval(mid);
      if (m.regime == a.regime && m.piece == a.piece) lo = mid;
      else hi = mid;
    }
    c.breakpoints.push_back({0.5 * (lo + hi), transition_label(a.regime, b.regime)});
  }
  return c;
}

LraCurve variational_curve(const DistributionModel& p, const DistributionModel& q, const EventSet& A,
                           const std::vector<double>& r_grid) {
  const DominatingPoint dp = dominating_point(p, A);
  if (!std::isfinite(dp.rate)) throw InfeasibleError("lra: A has no point with finite rate under p");
  const double r_max = r_grid.back();
  detail::GeometricFamily fam(p, q);
  const Range mr = fam.mean_range();
  // (H(ν|p), H(ν|q)) over the family, tabulated once; the r-dependence is explicit.
  std::vector<std::pair<double, double>> table;
  const EventSet window = a_r_set(p, p, dp.rate + 0.5 * r_max + 1e-9, rate_region(p, A));
  for (const Interval& iv : window.intervals()) {
    for (int k = 0; k < kVarGridX; ++k) {
      const double x = iv.lo + (iv.hi - iv.lo) * k / (kVarGridX - 1);
      if (!(x > mr.lo && x < mr.hi)) continue;
      for (int j = 0; j < kVarGridA; ++j) {
        const double a = 2.0 * j / (kVarGridA - 1);
        try {
          const auto s = fam.match_mean(a, x);
          const double hq = detail::GeometricFamily::entropy_q(s);
          table.emplace_back(hq - s.log_ratio_pq, hq);
        } catch (const Error&) {
          // a outside the finite-mass range of p^a q^(1−a) at this mean
        }
      }
    }
  }
  if (table.empty()) throw InfeasibleError("lra: no admissible family member");
  LraCurve c;
  c.r_grid = r_grid;
  c.base_rate = dp.rate;
  for (double r : r_grid) {
    double best = kInf;
    for (auto [hp, hq] : table) best = std::min(best, hp + 0.5 * std::max(r - hq, 0.0));
    const double v = std::max(best - dp.rate, 0.0);
    c.values.push_back(v);
    c.regimes.push_back(v <= kTieTol ? "zero" : "variational");
  }
  return c;
}

std::vector<double> component_thetas(const DistributionModel& p, const WalkMixture& q) {
  std::vector<double> th;
  for (const auto& c : q.components) {
    const auto t = tilt_parameter(p, c);
    if (!t) throw UnsupportedError("walk mixture: every component must be an exponential tilt of p");
    th.push_back(*t);
  }
  return th;
}

}  // namespace

void WalkMixture::validate() const {
  if (weights.empty() || weights.size() != components.size()) {
    throw DomainError("walk mixture: weights and components must be non-empty and of equal length");
  }
  double s = 0;
  for (double w : weights) {
    if (!(w > 0)) throw DomainError("walk mixture: weights must be > 0");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("walk mixture: weights must sum to 1");
  for (const auto& c : components) {
    if (std::holds_alternative<Mixture>(c.kind())) {
      throw UnsupportedError("walk mixture: components must not be mixtures");
    }
  }
}

std::optional<double> tilt_parameter(const DistributionModel& p, const DistributionModel& q) {
  if (const auto* gp = std::get_if<Gaussian>(&p.kind())) {
    const auto* gq = std::get_if<Gaussian>(&q.kind());
    if (!gq || gq->variance != gp->variance) return std::nullopt;
    return (gq->mean - gp->mean) / gp->variance;
  }
  if (const auto* ep = std::get_if<Exponential>(&p.kind())) {
    const auto* eq = std::get_if<Exponential>(&q.kind());
    if (!eq) return std::nullopt;
    return ep->rate - eq->rate;
  }
  if (const auto* dp = std::get_if<FiniteDiscrete>(&p.kind())) {
    const auto* dq = std::get_if<FiniteDiscrete>(&q.kind());
    if (!dq || dq->points != dp->points) return std::nullopt;
    // log(q_i/p_i) = θx_i − Λ(θ) on the common support, same zero pattern.
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dp->points.size(); ++i) {
      if ((dp->probs[i] > 0) != (dq->probs[i] > 0)) return std::nullopt;
      if (dp->probs[i] > 0) idx.push_back(i);
    }
    if (idx.size() < 2) return 0.0;
    auto lr = [&](std::size_t i) { return std::log(dq->probs[i]) - std::log(dp->probs[i]); };
    const std::size_t i0 = idx.front();
    const std::size_t i1 = idx.back();
    const double theta = (lr(i1) - lr(i0)) / (dp->points[i1] - dp->points[i0]);
    const double c = lr(i0) - theta * dp->points[i0];
    for (std::size_t i : idx) {
      if (std::abs(lr(i) - theta * dp->points[i] - c) > 1e-10) return std::nullopt;
    }
    return theta;
  }
  return std::nullopt;
}

DominatingPoint dominating_point(const DistributionModel& p, const EventSet& A) {
  const EventSet region = rate_region(p, A);
  if (region.empty()) return {kInf, kNaN};
  const Minimum m = min_over(region, [&](double x) { return rate_p(p, x); }, scale_of(p), mean(p));
  return {m.value, m.x};
}

EventSet a_r_set(const DistributionModel& p, const DistributionModel& q, double r, const EventSet& A) {
  (void)p;
  if (!(r > 0)) throw DomainError("a_r_set: r must be > 0");
  if (r == kInf) return A;
  return A.intersect(Interval{sublevel_end(q, r, -1.0), sublevel_end(q, r, +1.0)});
}

ExponentLimit y_limit(const DistributionModel& p, const DistributionModel& q, double xi, double r,
                      const EventSet& A) {
  if (!(xi > 0)) throw DomainError("y_limit: xi must be > 0");
  if (!(r > 0)) throw DomainError("y_limit: r must be > 0");
  if (const auto th = tilt_parameter(p, q)) {
    const EventSet region = rate_region(p, a_r_set(p, q, r, A));
    if (region.empty()) return {-kInf, true, kNaN};
    const double theta = *th;
    const Minimum m = min_over(
        region, [&](double x) { return moment_rate(p, theta, xi, x); }, scale_of(p),
        dominating_point(p, A).x);
    return {-m.value, false, m.x};
  }
  try {
    const VariationalResult v = reachable_entropy_min(p, q, r, A, xi);
    return {-v.objective, false, v.minimizer.mean};
  } catch (const InfeasibleError&) {
    return {-kInf, true, kNaN};
  }
}

ExponentLimit y_limit(const DistributionModel& p, const WalkMixture& q, double xi, double r,
                      const EventSet& A) {
  q.validate();
  if (!(xi > 0)) throw DomainError("y_limit: xi must be > 0");
  if (!(r > 0)) throw DomainError("y_limit: r must be > 0");
  const std::vector<double> th = component_thetas(p, q);
  std::vector<Interval> pieces;
  for (const auto& c : q.components) {
    const EventSet part = a_r_set(p, c, r, A);
    pieces.insert(pieces.end(), part.intervals().begin(), part.intervals().end());
  }
  const EventSet region = rate_region(p, EventSet(pieces));
  if (region.empty()) return {-kInf, true, kNaN};
  std::vector<double> lam;
  for (double t : th) lam.push_back(log_mgf(p, t));
  // Per-walk log-LR is −n·max_i(θ_i x − Λ(θ_i)) + O(1).
  auto objective = [&](double x) {
    const double i = rate_p(p, x);
    if (i == kInf) return kInf;
    double mx = -kInf;
    for (std::size_t k = 0; k < th.size(); ++k) mx = std::max(mx, th[k] * x - lam[k]);
    return i + (xi - 1.0) * mx;
  };
  const Minimum m = min_over(region, objective, scale_of(p), dominating_point(p, A).x);
  return {-m.value, false, m.x};
}

double tilted_q_entropy(const DistributionModel& p, const DistributionModel& q, double x) {
  const RateEvaluation e = legendre(p, x);
  if (e.value == kInf) return kInf;
  if (std::isinf(e.tilt_param)) {
    // Boundary atom: the p-tilts converge to the point mass at x.
    if (!q.is_discrete()) return kInf;
    return -log_density(q, x);
  }
  return kl_divergence(tilt(p, e.tilt_param), q);
}

double required_rate(const DistributionModel& p, const DistributionModel& q, const EventSet& A) {
  const EventSet region = rate_region(p, A);
  if (region.empty()) throw InfeasibleError("required_rate: A has no point with finite rate under p");
  const EntropyFn d = q_entropy_fn(p, q);
  std::vector<Minimum> mins;
  double best = kInf;
  for (const Interval& iv : region.intervals()) {
    const Minimum m = convex_minimize([&](double x) { return rate_p(p, x); }, iv.lo, iv.hi, scale_of(p));
    mins.push_back(m);
    best = std::min(best, m.value);
  }
  if (!std::isfinite(best)) throw InfeasibleError("required_rate: inf_A I_p is infinite");
  double out = kInf;
  for (const Minimum& m : mins) {
    if (m.value <= best + kTieTol * std::max(1.0, best)) out = std::min(out, d(m.x));
  }
  return out;
}

LraCurve lra_curve(const DistributionModel& p, const DistributionModel& q, const EventSet& A,
                   const std::vector<double>& r_grid, LraMode mode) {
  check_grid(r_grid);
  if (mode == LraMode::variational) return variational_curve(p, q, A, r_grid);
  const PerXLra ev(p, q_entropy_fn(p, q), A, r_grid.back());
  return trace(ev, r_grid);
}

LraCurve mixture_lra(const WalkMixture& q, const DistributionModel& p, const EventSet& A,
                     const std::vector<double>& r_grid) {
  q.validate();
  check_grid(r_grid);
  std::vector<PerXLra> evs;
  evs.reserve(q.components.size());
  for (const auto& c : q.components) evs.emplace_back(p, q_entropy_fn(p, c), A, r_grid.back());

  // Index of the largest component value; earlier components win ties.
  auto arg_max = [&](double r, double* value, std::string* regime) {
    int best = 0;
    LraPoint bp = evs[0].eval(r);
    for (int i = 1; i < static_cast<int>(evs.size()); ++i) {
      const LraPoint pt = evs[i].eval(r);
      if (pt.value > bp.value + kTieTol) {
        best = i;
        bp = pt;
      }
    }
    if (value) *value = bp.value;
    if (regime) *regime = bp.regime;
    return best;
  };

  LraCurve c;
  c.r_grid = r_grid;
  c.base_rate = evs[0].base_rate();
  std::vector<int> who;
  for (double r : r_grid) {
    double v;
    std::string reg;
    who.push_back(arg_max(r, &v, &reg));
    c.values.push_back(v);
    c.regimes.push_back(reg);
  }
  for (std::size_t i = 0; i + 1 < r_grid.size(); ++i) {
    if (who[i] == who[i + 1]) continue;
    double lo = r_grid[i];
    double hi = r_grid[i + 1];
    for (int k = 0; k < kBreakBisect; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (arg_max(mid, nullptr, nullptr) == who[i]) lo = mid;
      else hi = mid;
    }
    c.breakpoints.push_back({0.5 * (lo + hi), "crossing"});
  }
  return c;
}

LraCurve mixture_lra_joint(const WalkMixture& q, const DistributionModel& p, const EventSet& A,
                           const std::vector<double>& r_grid) {
  q.validate();
  check_grid(r_grid);
  std::vector<EntropyFn> ds;
  for (const auto& c : q.components) ds.push_back(q_entropy_fn(p, c));
  EntropyFn dmin = [ds](double x) {
    double m = kInf;
    for (const auto& d : ds) m = std::min(m, d(x));
    return m;
  };
  const PerXLra ev(p, dmin, A, r_grid.back());
  return trace(ev, r_grid);
}

bool is_log_efficient(const DistributionModel& p, const DistributionModel& q, const EventSet& A) {
  const ExponentLimit y1 = y_limit(p, q, 1.0, kInf, A);
  const ExponentLimit y2 = y_limit(p, q, 2.0, kInf, A);
  return std::abs(y2.value - 2.0 * y1.value) <= 1e-6;
}

bool is_log_efficient(const DistributionModel& p, const WalkMixture& q, const EventSet& A) {
  const ExponentLimit y1 = y_limit(p, q, 1.0, kInf, A);
  const ExponentLimit y2 = y_limit(p, q, 2.0, kInf, A);
  return std::abs(y2.value - 2.0 * y1.value) <= 1e-6;
}

bool cmc_dominance(const DistributionModel& p, const DistributionModel& q, const EventSet& A,
                   double r) {
  const EventSet region = rate_region(p, a_r_set(p, p, r, A));
  if (region.empty()) {
    std::ostringstream os;
    os << "cmc_dominance: A ∩ {I_p ≤ " << r << "} is empty";
    throw InfeasibleError(os.str());
  }
  const EntropyFn d = q_entropy_fn(p, q);
  constexpr int kPoints = 1001;
  for (const Interval& iv : region.intervals()) {
    for (int k = 0; k < kPoints; ++k) {
      const double x = iv.lo + (iv.hi - iv.lo) * k / (kPoints - 1);
      const double i = rate_p(p, x);
      if (d(x) > i + 1e-9 * std::max(1.0, i)) return false;
    }
  }
  return true;
}

double relative_variance_exponent(const DistributionModel& p, const DistributionModel& q,
                                  const EventSet& A) {
  const ExponentLimit y1 = y_limit(p, q, 1.0, kInf, A);
  const ExponentLimit y2 = y_limit(p, q, 2.0, kInf, A);
  return 0.5 * y2.value - y1.value;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi > lo) || count < 2) throw DomainError("log_grid: need 0 < lo < hi, count ≥ 2");
  std::vector<double> g(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * i / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace ldis
