#pragma once

#include <climits>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ldis/distributions.hpp"
#include "ldis/event_set.hpp"
#include "ldis/limits.hpp"

namespace ldis {

// Streaming log-sum-exp. Each term e^x is split as mant·2^k with k = floor(x·log2 e);
// the running sum is kept at the largest exponent seen, and rescaling uses ldexp, so
// the result equals the two-pass max-shifted sum bit for bit.
class LogSumAccumulator {
 public:
  void add(double log_term);
  void merge(const LogSumAccumulator& other);
  double log_sum() const;  // -inf when empty
  double log_max() const { return max_; }
  std::uint64_t count() const { return count_; }
  bool empty() const { return count_ == 0; }

 private:
  double sum_ = 0.0;
  long exp_ = LONG_MIN;
  double max_ = -kInf;
  std::uint64_t count_ = 0;
};

// Two-pass reference: find the largest binary exponent, then sum the shifted mantissas
// in order.
double two_pass_log_sum(std::span<const double> log_terms);

struct MomentEstimate {
  double xi;
  double log_mean;        // log((1/m) Σ (Zʲ)^ξ); -inf with zero hits
  std::uint64_t hit_count;
  std::uint64_t m;
  double log_max_term;    // largest ξ·log Zʲ over hits
};

struct SrvCheckpoint {
  std::uint64_t m;
  double log_mean;  // log α̂_m
  double log_var;   // log s²_m; NaN while undefined
  double srv;       // s²_m / (m α̂²_m); NaN while undefined
  bool defined;     // false while there are no hits (or m = 1)
};

struct SrvTrace {
  double epsilon = 0.01;
  std::vector<SrvCheckpoint> checkpoints;
  std::vector<std::size_t> stop_flags;  // checkpoint indices with srv < epsilon
};

struct CellResult {
  std::vector<MomentEstimate> moments;  // one per requested ξ, in request order
  SrvTrace srv;
  std::optional<double> weighted_mean;  // Σ Zʲ (Sʲ/n) / Σ Zʲ over hits
  double mean_log_lr_hits = kNaN;       // average log Lʲ over hits
};

struct RunOptions {
  unsigned threads = 0;                // 0: LDIS_THREADS, else hardware concurrency
  std::uint64_t cap = 100'000'000;     // ceiling on m
  double srv_epsilon = 0.01;
  std::uint64_t chunk = 1u << 16;      // replications per work unit; fixes the reduction order
};

// Worker count from LDIS_THREADS (if set and positive) or the hardware.
unsigned default_thread_count();

// Importance measure: one i.i.d. model, or a mixture chosen once per replication.
using Importance = std::variant<DistributionModel, WalkMixture>;

// m replications of a length-n walk under q. Throws BudgetError if m > cap and
// AbsContError if the support of p is not covered by q.
CellResult run_cell(const DistributionModel& p, const DistributionModel& q, int n, std::uint64_t m,
                    const EventSet& A, const std::vector<double>& xis, std::uint64_t seed,
                    const std::vector<std::uint64_t>& checkpoints, const RunOptions& opts = {});

CellResult mixture_run(const WalkMixture& q, const DistributionModel& p, int n, std::uint64_t m,
                       const EventSet& A, const std::vector<double>& xis, std::uint64_t seed,
                       const std::vector<std::uint64_t>& checkpoints, const RunOptions& opts = {});

// One stream of max(snapshots) replications, reported at each prefix length.
std::vector<CellResult> run_nested(const DistributionModel& p, const Importance& q, int n,
                                   const std::vector<std::uint64_t>& snapshots, const EventSet& A,
                                   const std::vector<double>& xis, std::uint64_t seed,
                                   const std::vector<std::uint64_t>& checkpoints,
                                   const RunOptions& opts = {});

enum class RateKind { r, c };

// m_n = floor(prefactor · exp(ρ n)) with ρ = rate (kind r) or rate · reference_rate (kind c).
struct SampleSchedule {
  std::vector<int> n_values;
  RateKind kind = RateKind::r;
  std::vector<double> rates;
  double reference_rate = kNaN;
  std::uint64_t prefactor = 100;
  std::uint64_t cap = 100'000'000;
  bool skip_over_cap = false;  // record over-cap cells as skipped instead of failing

  void validate() const;
  double exponent(double rate) const;
  // floor(prefactor · exp(exponent · n)) as a double, so over-cap values stay visible.
  double m_exact(int n, double rate) const;
};

struct CellRecord {
  int n;
  double rate;
  std::uint64_t m;  // 0 when skipped
  bool budget_skipped = false;
  std::vector<MomentEstimate> moments;
  double y = kNaN;  // -(1/n) log α̂; +inf with zero hits
  bool zero_hit = false;
  SrvTrace srv;
  std::optional<double> weighted_mean;
};

struct ExperimentReport {
  std::string label;
  std::uint64_t seed = 0;
  SampleSchedule schedule;
  std::vector<double> xis;
  std::vector<CellRecord> cells;
  double wall_seconds = 0.0;
};

// Runs every (n, rate) cell of the schedule. For each n the cells share one stream;
// smaller budgets are prefixes of larger ones.
ExperimentReport sweep(const SampleSchedule& schedule, const DistributionModel& p, const Importance& q,
                       const EventSet& A, std::vector<double> xis, std::uint64_t seed,
                       const RunOptions& opts = {});

struct EmpiricalLra {
  int n;
  double rate;
  double value;      // -(1/n) log|α̂/α − 1|; +inf for an exact estimate
  std::string note;  // "", "zero-hit", "exact" or "skipped"
};

using AlphaProvider = std::function<double(int n)>;  // returns log α_n

std::vector<EmpiricalLra> empirical_lra(const ExperimentReport& report, const AlphaProvider& log_alpha);

}  // namespace ldis
