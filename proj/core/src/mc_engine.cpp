#include "ldis/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "ldis/errors.hpp"

namespace ldis {

namespace {

struct Split {
  double mant;  // in [1, 2)
  long k;
};

Split split_log(double x) {
  const double y = x * std::numbers::log2e;
  const double k = std::floor(y);
  return {std::exp2(y - k), static_cast<long>(k)};
}

double shift(double v, long by) {
  if (by < INT_MIN) return 0.0;
  return std::ldexp(v, static_cast<int>(by));
}

}  // namespace

void LogSumAccumulator::add(double log_term) {
  if (log_term == -kInf) return;
  if (std::isnan(log_term) || log_term == kInf) throw DomainError("log-sum accumulator: term is NaN or +inf");
  max_ = std::max(max_, log_term);
  ++count_;
  const Split s = split_log(log_term);
  if (count_ == 1) {
    sum_ = s.mant;
    exp_ = s.k;
  } else if (s.k > exp_) {
    sum_ = shift(sum_, exp_ - s.k) + s.mant;
    exp_ = s.k;
  } else {
    sum_ += shift(s.mant, s.k - exp_);
  }
}

void LogSumAccumulator::merge(const LogSumAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  max_ = std::max(max_, other.max_);
  count_ += other.count_;
  if (other.exp_ > exp_) {
    sum_ = shift(sum_, exp_ - other.exp_) + other.sum_;
    exp_ = other.exp_;
  } else {
    sum_ += shift(other.sum_, other.exp_ - exp_);
  }
}

double LogSumAccumulator::log_sum() const {
  if (count_ == 0) return -kInf;
  return static_cast<double>(exp_) * std::numbers::ln2 + std::log(sum_);
}

double two_pass_log_sum(std::span<const double> log_terms) {
  long top = LONG_MIN;
  bool any = false;
  for (double x : log_terms) {
    if (x == -kInf) continue;
    top = std::max(top, split_log(x).k);
    any = true;
  }
  if (!any) return -kInf;
  double sum = 0.0;
  for (double x : log_terms) {
    if (x == -kInf) continue;
    const Split s = split_log(x);
    sum += shift(s.mant, s.k - top);
  }
  return static_cast<double>(top) * std::numbers::ln2 + std::log(sum);
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("LDIS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Draw {
  double log_lr;  // log Πp/q; -inf when some step falls outside the support of p
  double mean;    // S_n / n
};

// Draws one replication. Pairs whose log-LR depends on the walk only through S_n
// (Gaussian tilts of a Gaussian, exponential tilts of an exponential) draw S_n directly.
class WalkSampler {
 public:
  WalkSampler(const DistributionModel& p, const Importance& q, int n) : p_(p), n_(n) {
    if (const auto* one = std::get_if<DistributionModel>(&q)) {
      comps_.push_back(*one);
      weights_.push_back(1.0);
    } else {
      const auto& mx = std::get<WalkMixture>(q);
      mx.validate();
      comps_ = mx.components;
      weights_ = mx.weights;
    }
    for (double w : weights_) log_w_.push_back(std::log(w));

    bool covered = false;
    for (const auto& c : comps_) covered = covered || support_contained(p, c);
    if (!covered) {
      throw AbsContError("run_cell: the support of " + p.name() + " is not covered by the importance measure");
    }

    path_ = Path::generic;
    if (std::holds_alternative<Gaussian>(p.kind())) {
      const double v = std::get<Gaussian>(p.kind()).variance;
      bool ok = true;
      for (const auto& c : comps_) {
        const auto* g = std::get_if<Gaussian>(&c.kind());
        ok = ok && g && g->variance == v;
      }
      if (ok) path_ = Path::gaussian_sum;
    } else if (std::holds_alternative<Exponential>(p.kind())) {
      bool ok = true;
      for (const auto& c : comps_) ok = ok && std::holds_alternative<Exponential>(c.kind());
      if (ok) path_ = Path::gamma_sum;
    }
    if (path_ != Path::generic) {
      for (const auto& c : comps_) {
        const double th = tilt_of(c);
        theta_.push_back(th);
        n_lambda_.push_back(n_ * log_mgf(p_, th));
      }
    }
  }

  Draw draw(RandomStream& rs) const {
    std::size_t c = 0;
    if (comps_.size() > 1) {
      const double u = rs.uniform();
      double acc = 0.0;
      c = comps_.size() - 1;
      for (std::size_t i = 0; i + 1 < comps_.size(); ++i) {
        acc += weights_[i];
        if (u < acc) {
          c = i;
          break;
        }
      }
    }
    switch (path_) {
      case Path::gaussian_sum: {
        const auto& g = std::get<Gaussian>(comps_[c].kind());
        const double s = n_ * g.mean + std::sqrt(n_ * g.variance) * rs.normal_inv();
        return {sufficient_log_lr(s), s / n_};
      }
      case Path::gamma_sum: {
        const double rate = std::get<Exponential>(comps_[c].kind()).rate;
        const double s = gamma_variate(rs) / rate;
        return {sufficient_log_lr(s), s / n_};
      }
      case Path::generic:
        break;
    }
    return generic(rs, c);
  }

 private:
  enum class Path { gaussian_sum, gamma_sum, generic };

  double tilt_of(const DistributionModel& c) const {
    if (const auto* g = std::get_if<Gaussian>(&c.kind())) {
      const auto& gp = std::get<Gaussian>(p_.kind());
      return (g->mean - gp.mean) / gp.variance;
    }
    return std::get<Exponential>(p_.kind()).rate - std::get<Exponential>(c.kind()).rate;
  }

  // log Πp − log Σ_k w_k Πq_k with Πq_k/Πp = exp(θ_k S − nΛ(θ_k)).
  double sufficient_log_lr(double s) const {
    if (comps_.size() == 1) return -(theta_[0] * s - n_lambda_[0]);
    double acc = -kInf;
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      acc = log_add(acc, log_w_[k] + theta_[k] * s - n_lambda_[k]);
    }
    return -acc;
  }

  // Gamma(n, 1) by Marsaglia–Tsang: two uniforms per attempt.
  double gamma_variate(RandomStream& rs) const {
    const double d = n_ - 1.0 / 3.0;
    const double cc = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = rs.normal_inv();
      double v = 1.0 + cc * x;
      if (v <= 0) continue;
      v = v * v * v;
      const double u = rs.uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  // Step-by-step walk. Gaussian components are drawn by inversion (one uniform per
  // step), other kinds through sample(). The walk stops at the first step outside the
  // support of p; q-densities are only evaluated for walks that survive.
  Draw generic(RandomStream& rs, std::size_t c) const {
    const DistributionModel& qc = comps_[c];
    const auto* gq = std::get_if<Gaussian>(&qc.kind());
    const double sd = gq ? std::sqrt(gq->variance) : 0.0;
    thread_local std::vector<double> xs;
    xs.resize(static_cast<std::size_t>(n_));
    double lp = 0.0;
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double x = gq ? gq->mean + sd * rs.normal_inv() : sample(qc, rs);
      const double a = log_density(p_, x);
      if (a == -kInf) return {-kInf, kNaN};
      lp += a;
      s += x;
      xs[static_cast<std::size_t>(i)] = x;
    }
    double acc = -kInf;
    for (std::size_t j = 0; j < comps_.size(); ++j) {
      double lq = 0.0;
      for (double x : xs) lq += log_density(comps_[j], x);
      acc = comps_.size() == 1 ? lq : log_add(acc, log_w_[j] + lq);
    }
    return {lp - acc, s / n_};
  }

  const DistributionModel& p_;
  int n_;
  std::vector<DistributionModel> comps_;
  std::vector<double> weights_;
  std::vector<double> log_w_;
  std::vector<double> theta_;
  std::vector<double> n_lambda_;
  Path path_;
};

// Sums over one contiguous block of replications.
struct BlockSums {
  std::vector<LogSumAccumulator> moments;  // one per internal ξ
  LogSumAccumulator pos_weighted;          // Σ Z·x̄ over x̄ > 0
  LogSumAccumulator neg_weighted;          // Σ Z·|x̄| over x̄ < 0
  double sum_log_lr = 0.0;
  std::uint64_t hits = 0;

  explicit BlockSums(std::size_t k) : moments(k) {}

  void merge(const BlockSums& o) {
    for (std::size_t i = 0; i < moments.size(); ++i) moments[i].merge(o.moments[i]);
    pos_weighted.merge(o.pos_weighted);
    neg_weighted.merge(o.neg_weighted);
    sum_log_lr += o.sum_log_lr;
    hits += o.hits;
  }
};

SrvCheckpoint srv_point(std::uint64_t m, double l1, double l2, std::uint64_t hits) {
  const double lm = std::log(static_cast<double>(m));
  SrvCheckpoint c{m, hits ? l1 - lm : -kInf, kNaN, kNaN, false};
  if (hits == 0 || m < 2) return c;
  // s² = (ΣZ² − (ΣZ)²/m)/(m−1); srv = s²/(m α̂²) = (m ΣZ²/(ΣZ)² − 1)/(m−1).
  const double t = lm + l2 - 2.0 * l1;
  const double lm1 = std::log(static_cast<double>(m - 1));
  c.srv = std::expm1(t) / static_cast<double>(m - 1);
  const double inner = -std::expm1(-t);  // 1 − (ΣZ)²/(m ΣZ²)
  c.log_var = inner > 0 ? l2 + std::log(inner) - lm1 : -kInf;
  c.defined = true;
  return c;
}

}  // namespace

std::vector<CellResult> run_nested(const DistributionModel& p, const Importance& q, int n,
                                   const std::vector<std::uint64_t>& snapshots, const EventSet& A,
                                   const std::vector<double>& xis, std::uint64_t seed,
                                   const std::vector<std::uint64_t>& checkpoints, const RunOptions& opts) {
  if (n < 1) throw DomainError("run_cell: n must be ≥ 1");
  if (snapshots.empty()) throw DomainError("run_cell: no sample size requested");
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (snapshots[i] < 1) throw DomainError("run_cell: m must be ≥ 1");
    if (i > 0 && snapshots[i] <= snapshots[i - 1]) throw DomainError("run_cell: snapshots must be ascending");
  }
  for (double xi : xis) {
    if (!(xi > 0)) throw DomainError("run_cell: xi must be > 0");
  }
  const std::uint64_t total = snapshots.back();
  if (total > opts.cap) {
    std::ostringstream os;
    os << "run_cell: m = " << total << " exceeds the cap " << opts.cap;
    throw BudgetError(os.str());
  }
  if (opts.chunk == 0) throw DomainError("run_cell: chunk must be > 0");
  const WalkSampler sampler(p, q, n);

  // Internal exponents: requested ξ first, then 1 and 2 for the SRV.
  std::vector<double> xs = xis;
  auto index_of = [&](double xi) {
    const auto it = std::find(xs.begin(), xs.end(), xi);
    if (it != xs.end()) return static_cast<std::size_t>(it - xs.begin());
    xs.push_back(xi);
    return xs.size() - 1;
  };
  const std::size_t i1 = index_of(1.0);
  const std::size_t i2 = index_of(2.0);

  // Block boundaries: chunk multiples, snapshots and checkpoints. They depend only on
  // the inputs, so the ordered reduction is the same for any number of workers.
  std::vector<std::uint64_t> cuts;
  for (std::uint64_t b = opts.chunk; b < total; b += opts.chunk) cuts.push_back(b);
  for (std::uint64_t s : snapshots) cuts.push_back(s);
  for (std::uint64_t c : checkpoints) {
    if (c >= 1 && c <= total) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t blocks = cuts.size();
  std::vector<BlockSums> sums(blocks, BlockSums(xs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      BlockSums& acc = sums[b];
      const std::uint64_t lo = b == 0 ? 0 : cuts[b - 1];
      for (std::uint64_t j = lo; j < cuts[b]; ++j) {
        RandomStream rs(seed, static_cast<std::uint32_t>(n), j);
        const Draw d = sampler.draw(rs);
        if (d.log_lr == -kInf || !A.contains(d.mean)) continue;
        ++acc.hits;
        acc.sum_log_lr += d.log_lr;
        for (std::size_t k = 0; k < xs.size(); ++k) acc.moments[k].add(xs[k] * d.log_lr);
        if (d.mean > 0) acc.pos_weighted.add(d.log_lr + std::log(d.mean));
        else if (d.mean < 0) acc.neg_weighted.add(d.log_lr + std::log(-d.mean));
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(opts.threads ? opts.threads : default_thread_count(),
                                      static_cast<unsigned>(std::min<std::size_t>(blocks, 1u << 10))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<std::uint64_t> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

  std::vector<CellResult> out;
  std::vector<SrvCheckpoint> trace;
  BlockSums running(xs.size());
  std::size_t si = 0;
  std::size_t ci = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    running.merge(sums[b]);
    const std::uint64_t m = cuts[b];
    while (ci < cps.size() && cps[ci] < m) ++ci;
    if (ci < cps.size() && cps[ci] == m) {
      trace.push_back(srv_point(m, running.moments[i1].log_sum(), running.moments[i2].log_sum(), running.hits));
    }
    if (si < snapshots.size() && snapshots[si] == m) {
      CellResult r;
      const double lm = std::log(static_cast<double>(m));
      for (std::size_t k = 0; k < xis.size(); ++k) {
        const LogSumAccumulator& a = running.moments[k];
        r.moments.push_back({xis[k], a.empty() ? -kInf : a.log_sum() - lm, running.hits, m, a.log_max()});
      }
      r.srv.epsilon = opts.srv_epsilon;
      r.srv.checkpoints = trace;
      for (std::size_t t = 0; t < trace.size(); ++t) {
        if (trace[t].defined && trace[t].srv < opts.srv_epsilon) r.srv.stop_flags.push_back(t);
      }
      if (running.hits > 0) {
        const double l1 = running.moments[i1].log_sum();
        const double pos = running.pos_weighted.empty() ? 0.0 : std::exp(running.pos_weighted.log_sum() - l1);
        const double neg = running.neg_weighted.empty() ? 0.0 : std::exp(running.neg_weighted.log_sum() - l1);
        r.weighted_mean = pos - neg;
        r.mean_log_lr_hits = running.sum_log_lr / static_cast<double>(running.hits);
      }
      out.push_back(std::move(r));
      ++si;
    }
  }
  return out;
}

CellResult run_cell(const DistributionModel& p, const DistributionModel& q, int n, std::uint64_t m,
                    const EventSet& A, const std::vector<double>& xis, std::uint64_t seed,
                    const std::vector<std::uint64_t>& checkpoints, const RunOptions& opts) {
  return run_nested(p, Importance{q}, n, {m}, A, xis, seed, checkpoints, opts).front();
}

CellResult mixture_run(const WalkMixture& q, const DistributionModel& p, int n, std::uint64_t m,
                       const EventSet& A, const std::vector<double>& xis, std::uint64_t seed,
                       const std::vector<std::uint64_t>& checkpoints, const RunOptions& opts) {
  q.validate();
  if (q.components.size() == 1) return run_cell(p, q.components.front(), n, m, A, xis, seed, checkpoints, opts);
  return run_nested(p, Importance{q}, n, {m}, A, xis, seed, checkpoints, opts).front();
}

void SampleSchedule::validate() const {
  if (n_values.empty()) throw DomainError("schedule: n_values is empty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw DomainError("schedule: n must be ≥ 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw DomainError("schedule: n_values must be ascending");
  }
  if (rates.empty()) throw DomainError("schedule: no rate given");
  for (double r : rates) {
    if (!(r > 0) || !std::isfinite(r)) throw DomainError("schedule: rates must be finite and > 0");
  }
  if (kind == RateKind::c && !(reference_rate >= 0 && std::isfinite(reference_rate))) {
    throw DomainError("schedule: rate kind c needs a finite reference_rate ≥ 0");
  }
  if (prefactor < 1) throw DomainError("schedule: prefactor must be ≥ 1");
  if (cap < 1) throw DomainError("schedule: cap must be ≥ 1");
}

double SampleSchedule::exponent(double rate) const {
  return kind == RateKind::r ? rate : rate * reference_rate;
}

double SampleSchedule::m_exact(int n, double rate) const {
  return std::max(1.0, std::floor(static_cast<double>(prefactor) * std::exp(exponent(rate) * n)));
}

ExperimentReport sweep(const SampleSchedule& schedule, const DistributionModel& p, const Importance& q,
                       const EventSet& A, std::vector<double> xis, std::uint64_t seed,
                       const RunOptions& opts) {
  schedule.validate();
  if (std::find(xis.begin(), xis.end(), 1.0) == xis.end()) xis.insert(xis.begin(), 1.0);
  const std::size_t i1 = static_cast<std::size_t>(std::find(xis.begin(), xis.end(), 1.0) - xis.begin());
  RunOptions ro = opts;
  ro.cap = schedule.cap;

  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.seed = seed;
  rep.schedule = schedule;
  rep.xis = xis;
  for (int n : schedule.n_values) {
    std::vector<std::uint64_t> ms;
    std::vector<CellRecord> row;
    for (double rate : schedule.rates) {
      const double mx = schedule.m_exact(n, rate);
      CellRecord rec;
      rec.n = n;
      rec.rate = rate;
      rec.m = 0;
      if (mx > static_cast<double>(schedule.cap)) {
        if (!schedule.skip_over_cap) {
          std::ostringstream os;
          os << "sweep: m_n = " << mx << " at n = " << n << ", rate = " << rate << " exceeds the cap "
             << schedule.cap;
          throw BudgetError(os.str());
        }
        rec.budget_skipped = true;
      } else {
        rec.m = static_cast<std::uint64_t>(mx);
        ms.push_back(rec.m);
      }
      row.push_back(rec);
    }
    if (!ms.empty()) {
      std::sort(ms.begin(), ms.end());
      ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
      std::vector<std::uint64_t> cps;
      for (std::uint64_t c = 10; c < ms.back(); c *= 10) cps.push_back(c);
      for (std::uint64_t m : ms) cps.push_back(m);
      const std::vector<CellResult> res = run_nested(p, q, n, ms, A, xis, seed, cps, ro);
      for (CellRecord& rec : row) {
        if (rec.budget_skipped) continue;
        const auto k = static_cast<std::size_t>(std::lower_bound(ms.begin(), ms.end(), rec.m) - ms.begin());
        const CellResult& r = res[k];
        rec.moments = r.moments;
        rec.srv = r.srv;
        rec.weighted_mean = r.weighted_mean;
        const double lm = r.moments[i1].log_mean;
        rec.zero_hit = lm == -kInf;
        rec.y = rec.zero_hit ? kInf : -lm / n;
      }
    }
    for (auto& rec : row) rep.cells.push_back(std::move(rec));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<EmpiricalLra> empirical_lra(const ExperimentReport& report, const AlphaProvider& log_alpha) {
  if (!log_alpha) throw OracleUnavailable("empirical_lra: no exact probability for this scenario");
  const auto it = std::find(report.xis.begin(), report.xis.end(), 1.0);
  if (it == report.xis.end()) throw DomainError("empirical_lra: the report has no ξ = 1 moment");
  const auto i1 = static_cast<std::size_t>(it - report.xis.begin());
  std::vector<EmpiricalLra> out;
  for (const CellRecord& c : report.cells) {
    if (c.budget_skipped) {
      out.push_back({c.n, c.rate, kNaN, "skipped"});
      continue;
    }
    const double la = log_alpha(c.n);
    const double lh = c.moments[i1].log_mean;
    if (lh == -kInf) {
      out.push_back({c.n, c.rate, 0.0, "zero-hit"});
      continue;
    }
    const double rel = std::abs(std::expm1(lh - la));
    if (rel == 0.0) {
      out.push_back({c.n, c.rate, kInf, "exact"});
      continue;
    }
    out.push_back({c.n, c.rate, -std::log(rel) / c.n, ""});
  }
  return out;
}

}  // namespace ldis
