#include "ldis/harness/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

#include "ldis/limits.hpp"
#include "ldis/oracle.hpp"
#include "ldis/rate_functions.hpp"

namespace ldis::harness {

namespace fs = std::filesystem;

namespace {

std::string u64(std::uint64_t v) { return std::to_string(v); }

const DistributionModel* as_model(const Importance& q) { return std::get_if<DistributionModel>(&q); }

std::vector<double> rate_steps(double lo, double step, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(std::round((lo + step * i) * 1e6) / 1e6);
  return v;
}

std::string model_label(const ModelSpec& m) {
  if (m.kind == "tilt") return "tilt(" + std::to_string(m.params.at(0)).substr(0, 4) + ")";
  return m.kind;
}

ScenarioConfig base_scenario(const std::string& label, ModelSpec p, ModelSpec q, EventSet A, SampleSchedule s,
                             std::vector<std::uint64_t> seeds) {
  ScenarioConfig c;
  c.mode = "simulate";
  c.label = label;
  c.base = std::move(p);
  c.importance = std::move(q);
  c.event = std::move(A);
  c.schedule = std::move(s);
  c.seeds = std::move(seeds);
  return c;
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

EventSet two_sided_event() { return EventSet({{-kInf, -1.2}, {1.0, kInf}}); }

// First seed's ξ = 1 values, one series per rate (x = n) or per n (x = rate).
std::vector<Series> y_series(const std::string& prefix, const ExperimentReport& r) {
  const auto& s = r.schedule;
  const bool by_n = s.n_values.size() >= s.rates.size();
  std::vector<Series> out;
  const auto outer = by_n ? s.rates.size() : s.n_values.size();
  for (std::size_t k = 0; k < outer; ++k) {
    Series ser;
    ser.name = prefix + (by_n ? " rate=" + format_fixed(s.rates[k]).substr(0, 5)
                              : " n=" + std::to_string(s.n_values[k]));
    for (const CellRecord& cell : r.cells) {
      const bool match = by_n ? cell.rate == s.rates[k] : cell.n == s.n_values[k];
      if (!match) continue;
      ser.x.push_back(by_n ? cell.n : cell.rate);
      ser.y.push_back(cell.budget_skipped ? kNaN : cell.y);
    }
    out.push_back(std::move(ser));
  }
  return out;
}

Json lra_json(const LraCurve& curve) {
  Json j;
  j["base_rate"] = json_number(curve.base_rate);
  Json bps = Json::array();
  for (const Breakpoint& b : curve.breakpoints) bps.push_back({{"r", json_number(b.r)}, {"label", b.label}});
  j["breakpoints"] = bps;
  return j;
}

LraCurve compute_lra(const ScenarioConfig& c, const DistributionModel& p, const Importance& q,
                     const std::vector<double>& grid) {
  if (const auto* qm = as_model(q)) {
    return lra_curve(p, *qm, *c.event, grid, c.lra_mode == "variational" ? LraMode::variational : LraMode::per_x_tilt);
  }
  const auto& mx = std::get<WalkMixture>(q);
  return c.mixture_rule == "joint" ? mixture_lra_joint(mx, p, *c.event, grid) : mixture_lra(mx, p, *c.event, grid);
}

Table lra_table(const LraCurve& curve) {
  Table t({"r", "value", "regime"});
  for (std::size_t i = 0; i < curve.r_grid.size(); ++i) {
    t.add_row({format_fixed(curve.r_grid[i]), format_fixed(curve.values[i]), curve.regimes[i]});
  }
  return t;
}

struct SimulationRun {
  std::vector<ExperimentReport> reports;
  std::vector<std::optional<std::vector<EmpiricalLra>>> lra;
  Json json;
};

SimulationRun simulate(const ScenarioConfig& c, const RunOptions& opts, Table& table) {
  const DistributionModel p = build_model(*c.base);
  const Importance q = build_importance(*c.importance, p);
  RunOptions ro = opts;
  ro.srv_epsilon = c.srv_epsilon;
  AlphaProvider alpha;
  try {
    alpha = exact_log_alpha(p, *c.event);
  } catch (const OracleUnavailable&) {
  }
  SimulationRun run;
  run.json["label"] = c.label;
  run.json["config"] = echo_config(c);
  Json reps = Json::array();
  for (std::uint64_t seed : c.seeds) {
    ExperimentReport rep = sweep(*c.schedule, p, q, *c.event, c.xis, seed, ro);
    rep.label = c.label;
    std::optional<std::vector<EmpiricalLra>> lra;
    if (alpha) {
      try {
        lra = empirical_lra(rep, alpha);
      } catch (const BudgetError&) {
      }
    }
    append_simulation_rows(table, c.label, rep, lra ? &*lra : nullptr);
    Json rj = report_json(rep, c.include_timing);
    if (lra) {
      Json lj = Json::array();
      for (const auto& e : *lra) {
        lj.push_back({{"n", e.n}, {"rate", json_number(e.rate)}, {"value", json_number(e.value)}, {"note", e.note}});
      }
      rj["empirical_lra"] = lj;
    }
    reps.push_back(std::move(rj));
    run.reports.push_back(std::move(rep));
    run.lra.push_back(std::move(lra));
  }
  run.json["reports"] = reps;
  return run;
}

}  // namespace

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_fixed(v);
}

Json report_json(const ExperimentReport& r, bool include_timing) {
  Json j;
  j["label"] = r.label;
  j["seed"] = r.seed;
  const SampleSchedule& s = r.schedule;
  Json sched;
  sched["n"] = s.n_values;
  sched["rate_kind"] = s.kind == RateKind::r ? "r" : "c";
  Json rates = Json::array();
  for (double v : s.rates) rates.push_back(json_number(v));
  sched["rates"] = rates;
  sched["reference_rate"] = json_number(s.reference_rate);
  sched["prefactor"] = s.prefactor;
  sched["cap"] = s.cap;
  sched["skip_over_cap"] = s.skip_over_cap;
  j["schedule"] = sched;
  j["xis"] = r.xis;
  Json cells = Json::array();
  for (const CellRecord& c : r.cells) {
    Json cj;
    cj["n"] = c.n;
    cj["rate"] = json_number(c.rate);
    cj["m"] = c.m;
    cj["budget_skipped"] = c.budget_skipped;
    cj["zero_hit"] = c.zero_hit;
    cj["y"] = json_number(c.y);
    Json ms = Json::array();
    for (const MomentEstimate& m : c.moments) {
      ms.push_back({{"xi", json_number(m.xi)},
                    {"log_mean", json_number(m.log_mean)},
                    {"hits", m.hit_count},
                    {"m", m.m},
                    {"log_max_term", json_number(m.log_max_term)}});
    }
    cj["moments"] = ms;
    Json srv;
    srv["epsilon"] = json_number(c.srv.epsilon);
    Json cps = Json::array();
    for (const SrvCheckpoint& k : c.srv.checkpoints) {
      cps.push_back({{"m", k.m},
                     {"log_mean", json_number(k.log_mean)},
                     {"log_var", json_number(k.log_var)},
                     {"srv", json_number(k.srv)},
                     {"defined", k.defined}});
    }
    srv["checkpoints"] = cps;
    srv["stop_flags"] = c.srv.stop_flags;
    cj["srv"] = srv;
    cj["weighted_mean"] = c.weighted_mean ? json_number(*c.weighted_mean) : Json(nullptr);
    cells.push_back(std::move(cj));
  }
  j["cells"] = cells;
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

Table simulation_table() {
  return Table({"label", "seed", "n", "rate", "m", "xi", "log_mean", "hits", "Y_n", "status", "emp_lra",
                "weighted_mean"});
}

void append_simulation_rows(Table& t, const std::string& label, const ExperimentReport& r,
                            const std::vector<EmpiricalLra>* lra) {
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const CellRecord& c = r.cells[i];
    std::string emp = "nan";
    if (lra) {
      const EmpiricalLra& e = (*lra)[i];
      emp = e.note == "zero-hit" ? "zero-hit" : format_fixed(e.value);
    }
    const std::string wm = c.weighted_mean ? format_fixed(*c.weighted_mean) : "nan";
    if (c.budget_skipped) {
      for (double xi : r.xis) {
        t.add_row({label, u64(r.seed), std::to_string(c.n), format_fixed(c.rate), "0", format_fixed(xi), "nan", "0",
                   "nan", "skipped", "nan", "nan"});
      }
      continue;
    }
    for (const MomentEstimate& m : c.moments) {
      const bool zero = m.log_mean == -kInf;
      const bool first = m.xi == 1.0;
      t.add_row({label, u64(r.seed), std::to_string(c.n), format_fixed(c.rate), u64(c.m), format_fixed(m.xi),
                 format_fixed(m.log_mean), u64(m.hit_count), zero ? "inf" : format_fixed(-m.log_mean / c.n),
                 zero ? "zero-hit" : "ok", first ? emp : "nan", first ? wm : "nan"});
    }
  }
}

CommandOutput cmd_simulate(const ScenarioConfig& c, const RunOptions& opts) {
  CommandOutput out;
  Table t = simulation_table();
  SimulationRun run = simulate(c, opts, t);
  out.tables.push_back({"", std::move(t)});
  out.report["mode"] = "simulate";
  out.report["runs"] = Json::array({run.json});
  SvgPlot plot{c.label.empty() ? "Y_n" : c.label, "", "Y_n = -(1/n) log estimate", {}};
  const auto& s = *c.schedule;
  plot.x_label = s.n_values.size() >= s.rates.size() ? "n" : "rate";
  plot.series = y_series("seed " + u64(c.seeds.front()), run.reports.front());
  out.plot = std::move(plot);
  return out;
}

CommandOutput cmd_limit(const ScenarioConfig& c) {
  const DistributionModel p = build_model(*c.base);
  const Importance q = build_importance(*c.importance, p);
  const EventSet& A = *c.event;
  const std::vector<double> grid = c.grid->points();
  Table t({"r", "xi", "Y_limit", "regime", "argmin"});
  std::vector<Series> series;
  for (double xi : c.xis) series.push_back({"xi=" + format_fixed(xi).substr(0, 4), {}, {}});
  for (double r : grid) {
    for (std::size_t k = 0; k < c.xis.size(); ++k) {
      const double xi = c.xis[k];
      const ExponentLimit e = std::visit([&](const auto& qq) { return y_limit(p, qq, xi, r, A); }, q);
      const double y = e.zero_hit ? kInf : -e.value;
      t.add_row({format_fixed(r), format_fixed(xi), format_fixed(y), e.zero_hit ? "zero-hit" : "finite",
                 format_fixed(e.argmin)});
      series[k].x.push_back(r);
      series[k].y.push_back(y);
    }
  }
  CommandOutput out;
  out.tables.push_back({"", std::move(t)});
  const DominatingPoint dp = dominating_point(p, A);
  out.report["mode"] = "limit";
  out.report["config"] = echo_config(c);
  out.report["dominating_point"] = {{"rate", json_number(dp.rate)}, {"x", json_number(dp.x)}};
  out.plot = SvgPlot{c.label.empty() ? "Y limit" : c.label, "r", "-y(xi, r)", std::move(series)};
  return out;
}

CommandOutput cmd_lra(const ScenarioConfig& c) {
  const DistributionModel p = build_model(*c.base);
  const Importance q = build_importance(*c.importance, p);
  const LraCurve curve = compute_lra(c, p, q, c.grid->points());
  CommandOutput out;
  out.tables.push_back({"", lra_table(curve)});
  out.report["mode"] = "lra";
  out.report["config"] = echo_config(c);
  out.report["lra"] = lra_json(curve);
  out.plot = SvgPlot{c.label.empty() ? "LRA" : c.label, "r", "LRA(r)", {{"LRA", curve.r_grid, curve.values}}};
  return out;
}

CommandOutput cmd_rate(const ScenarioConfig& c) {
  const DistributionModel p = build_model(*c.base);
  Table t({"x", "rate", "tilt_param"});
  Series s{"I(x)", {}, {}};
  for (double x : c.grid->points()) {
    const RateEvaluation e = legendre(p, x);
    t.add_row({format_fixed(x), format_fixed(e.value), format_fixed(e.tilt_param)});
    s.x.push_back(x);
    s.y.push_back(e.value);
  }
  CommandOutput out;
  out.tables.push_back({"", std::move(t)});
  out.report["mode"] = "rate";
  out.report["config"] = echo_config(c);
  out.plot = SvgPlot{c.label.empty() ? "Rate function" : c.label, "x", "I(x)", {std::move(s)}};
  return out;
}

CommandOutput cmd_oracle(const ScenarioConfig& c) {
  const DistributionModel p = build_model(*c.base);
  const EventSet& A = *c.event;
  std::optional<Importance> q;
  if (c.importance) q = build_importance(*c.importance, p);
  Table t({"n", "quantity", "method", "value", "log_value", "work"});
  auto row = [&](int n, const std::string& what, const OracleResult& r) {
    t.add_row({std::to_string(n), what, to_string(r.method), format_fixed(r.value), format_fixed(r.log_value),
               u64(r.work)});
  };
  for (int n : c.schedule->n_values) {
    if (const auto* g = std::get_if<Gaussian>(&p.kind())) {
      row(n, "alpha", exact_alpha_gaussian(n, A, g->mean, g->variance));
    } else if (const auto* e = std::get_if<Exponential>(&p.kind())) {
      row(n, "alpha", exact_alpha_exponential(n, A, e->rate));
    } else if (std::holds_alternative<FiniteDiscrete>(p.kind())) {
      const DistributionModel* qm = q ? as_model(*q) : nullptr;
      const DistributionModel& qq = qm ? *qm : p;
      for (double xi : c.xis) {
        const OracleResult r = enumerate_exact(p, qq, n, A, xi);
        if (xi == c.xis.front()) {
          OracleResult a = r;
          a.value = r.alpha;
          a.log_value = std::log(r.alpha);
          row(n, "alpha", a);
        }
        row(n, "moment_xi=" + format_fixed(xi), r);
      }
    } else {
      throw OracleUnavailable("no exact oracle for " + p.name());
    }
  }
  CommandOutput out;
  out.tables.push_back({"", std::move(t)});
  const DominatingPoint dp = dominating_point(p, A);
  out.report["mode"] = "oracle";
  out.report["config"] = echo_config(c);
  out.report["dominating_point"] = {{"rate", json_number(dp.rate)}, {"x", json_number(dp.x)}};
  return out;
}

std::vector<ScenarioConfig> preset_scenarios(const std::string& preset, bool quick) {
  std::vector<ScenarioConfig> out;
  if (preset == "exp1") {
    const DistributionModel p = DistributionModel::gaussian(0.0, 1.0);
    for (double theta : {0.0, 0.4, 2.0}) {
      SampleSchedule s;
      s.n_values = quick ? std::vector<int>{10, 20} : std::vector<int>{10, 20, 30};
      s.kind = RateKind::c;
      s.rates = rate_steps(0.6, 0.1, 11);
      s.reference_rate = tilted_rate(p, theta, 0.8);
      s.prefactor = 100;
      s.cap = quick ? 1'000'000 : 500'000'000;
      s.skip_over_cap = true;
      out.push_back(base_scenario("theta=" + format_fixed(theta).substr(0, 3), gaussian_spec(0.0, 1.0),
                                  tilt_spec(theta), EventSet({{0.8, kInf}}), s, seed_range(quick ? 2 : 10)));
    }
  } else if (preset == "exp2") {
    SampleSchedule s;
    s.n_values = quick ? std::vector<int>{100, 200} : std::vector<int>{100, 200, 300, 400};
    s.kind = RateKind::r;
    s.rates = {0.036};
    s.prefactor = 100;
    s.cap = 200'000'000;
    const EventSet A({{1.3, kInf}});
    out.push_back(base_scenario("q1", exponential_spec(1.0), exponential_spec(1.0 / 1.3), A, s,
                                seed_range(quick ? 2 : 5)));
    out.push_back(base_scenario("q2", exponential_spec(1.0), gaussian_spec(1.3, 1.0), A, s,
                                seed_range(quick ? 2 : 5)));
  } else if (preset == "two_sided_lra") {
    SampleSchedule s;
    s.n_values = quick ? std::vector<int>{10} : std::vector<int>{10, 15};
    s.kind = RateKind::r;
    s.rates = {0.25, 0.5, 0.75, 1.0};
    s.prefactor = 1;
    s.cap = 100'000'000;
    s.skip_over_cap = true;
    out.push_back(base_scenario("tilt=1", gaussian_spec(0.0, 1.0), tilt_spec(1.0), two_sided_event(), s,
                                seed_range(quick ? 1 : 5)));
  } else {
    throw ConfigError("unknown preset '" + preset + "'");
  }
  return out;
}

CommandOutput cmd_reproduce(const ScenarioConfig& c, const RunOptions& opts,
                            std::optional<std::uint64_t> seed_override) {
  std::vector<ScenarioConfig> scenarios = preset_scenarios(c.preset, c.quick);
  CommandOutput out;
  Table t = simulation_table();
  Json runs = Json::array();
  std::vector<Series> series;
  std::vector<SimulationRun> sims;
  for (ScenarioConfig& s : scenarios) {
    if (seed_override) s.seeds = {*seed_override};
    s.include_timing = c.include_timing;
    s.srv_epsilon = c.srv_epsilon;
    sims.push_back(simulate(s, opts, t));
    runs.push_back(sims.back().json);
  }
  out.report["mode"] = "reproduce";
  out.report["preset"] = c.preset;
  out.report["quick"] = c.quick;
  out.report["config"] = echo_config(c);

  if (c.preset == "two_sided_lra") {
    std::vector<double> grid;
    for (int i = 1; i <= 300; ++i) grid.push_back(i / 100.0);
    const DistributionModel p = DistributionModel::gaussian(0.0, 1.0);
    const LraCurve curve = lra_curve(p, tilt(p, 1.0), two_sided_event(), grid);
    out.tables.push_back({"", lra_table(curve)});
    out.tables.push_back({"mc", std::move(t)});
    out.report["lra"] = lra_json(curve);
    series.push_back({"LRA(r)", curve.r_grid, curve.values});
    // Seed-averaged empirical LRA at the largest n.
    const SimulationRun& sim = sims.front();
    const int n_max = scenarios.front().schedule->n_values.back();
    Series mc{"MC n=" + std::to_string(n_max), {}, {}};
    for (double rate : scenarios.front().schedule->rates) {
      double sum = 0.0;
      int count = 0;
      for (const auto& lra : sim.lra) {
        if (!lra) continue;
        for (const EmpiricalLra& e : *lra) {
          if (e.n == n_max && e.rate == rate && std::isfinite(e.value) && e.note.empty()) {
            sum += e.value;
            ++count;
          }
        }
      }
      mc.x.push_back(rate);
      mc.y.push_back(count ? sum / count : kNaN);
    }
    series.push_back(std::move(mc));
    out.plot = SvgPlot{"two-sided event, tilt 1: LRA", "r", "LRA(r)", std::move(series)};
  } else {
    out.tables.push_back({"", std::move(t)});
    const bool exp1 = c.preset == "exp1";
    for (std::size_t k = 0; k < sims.size(); ++k) {
      const ExperimentReport& rep = sims[k].reports.front();
      if (exp1) {
        // Y_n against c at the largest n.
        const int n_max = rep.schedule.n_values.back();
        Series s{scenarios[k].label + " n=" + std::to_string(n_max), {}, {}};
        for (const CellRecord& cell : rep.cells) {
          if (cell.n != n_max) continue;
          s.x.push_back(cell.rate);
          s.y.push_back(cell.budget_skipped ? kNaN : cell.y);
        }
        series.push_back(std::move(s));
      } else {
        Series s{scenarios[k].label + " (" + model_label(*scenarios[k].importance) + ")", {}, {}};
        for (const CellRecord& cell : rep.cells) {
          s.x.push_back(cell.n);
          s.y.push_back(cell.y);
        }
        series.push_back(std::move(s));
      }
    }
    const DistributionModel p = build_model(*scenarios.front().base);
    const double b = exp1 ? 0.8 : 1.3;
    const double ib = legendre(p, b).value;
    const std::vector<double> xs = exp1 ? std::vector<double>{0.6, 1.6}
                                        : std::vector<double>{double(scenarios.front().schedule->n_values.front()),
                                                              double(scenarios.front().schedule->n_values.back())};
    series.push_back({"I(b)", xs, {ib, ib}});
    out.plot = SvgPlot{exp1 ? "Gaussian walk, A = [0.8, inf): Y_n(c), first seed"
                            : "Exponential walk, A = [1.3, inf), r = 0.036: Y_n, first seed",
                       exp1 ? "c" : "n", "Y_n = -(1/n) log estimate", std::move(series)};
  }
  out.report["runs"] = runs;
  return out;
}

CommandOutput run_command(const ScenarioConfig& c, const RunOptions& opts, std::optional<std::uint64_t> seed_override) {
  validate(c);
  if (c.mode == "simulate") return cmd_simulate(c, opts);
  if (c.mode == "limit") return cmd_limit(c);
  if (c.mode == "lra") return cmd_lra(c);
  if (c.mode == "rate") return cmd_rate(c);
  if (c.mode == "oracle") return cmd_oracle(c);
  return cmd_reproduce(c, opts, seed_override);
}

std::vector<std::string> write_outputs(const CommandOutput& out, const ScenarioConfig& c, const std::string& out_dir,
                                       std::ostream& fallback) {
  const std::string stem = !c.label.empty() ? c.label : (c.mode == "reproduce" ? c.preset : c.mode);
  auto resolve = [&](const std::string& path, const std::string& ext) -> std::string {
    if (path.empty()) return out_dir.empty() ? "" : (fs::path(out_dir) / (stem + ext)).string();
    if (!out_dir.empty() && fs::path(path).is_relative()) return (fs::path(out_dir) / path).string();
    return path;
  };
  if (!out_dir.empty()) fs::create_directories(out_dir);
  std::vector<std::string> written;
  const std::string csv = resolve(c.outputs.csv, ".csv");
  for (const NamedTable& nt : out.tables) {
    if (csv.empty()) {
      if (nt.name.empty()) fallback << nt.table.to_csv();
      continue;
    }
    fs::path path(csv);
    if (!nt.name.empty()) path.replace_filename(path.stem().string() + "_" + nt.name + path.extension().string());
    write_file(path.string(), nt.table.to_csv());
    written.push_back(path.string());
  }
  const std::string json = resolve(c.outputs.json, ".json");
  if (!json.empty()) {
    write_file(json, out.report.dump(2) + "\n");
    written.push_back(json);
  }
  const std::string svg = resolve(c.outputs.svg, ".svg");
  if (!svg.empty() && out.plot) {
    write_file(svg, out.plot->render());
    written.push_back(svg);
  }
  return written;
}

bool selftest(std::ostream& os) {
  bool all = true;
  auto check = [&](const std::string& name, bool ok) {
    os << (ok ? "PASS " : "FAIL ") << name << "\n";
    all = all && ok;
  };
  auto guarded = [&](const std::string& name, auto f) {
    try {
      check(name, f());
    } catch (const std::exception& e) {
      os << "FAIL " << name << " (" << e.what() << ")\n";
      all = false;
    }
  };
  const DistributionModel g = DistributionModel::gaussian(0.0, 1.0);
  const DistributionModel ex = DistributionModel::exponential(1.0);
  guarded("legendre exponential(1) at 1.3",
          [&] { return std::abs(legendre(ex, 1.3).value - 0.037635735532508985) < 1e-9; });
  guarded("legendre gaussian(0,1) at 0.8", [&] { return std::abs(legendre(g, 0.8).value - 0.32) < 1e-12; });
  guarded("under-tilt zero-hit below r = 0.08", [&] {
    const EventSet A({{0.8, kInf}});
    const DistributionModel q = tilt(g, 0.4);
    return y_limit(g, q, 1.0, 0.07, A).zero_hit && std::abs(y_limit(g, q, 1.0, 0.09, A).value + 0.32) < 1e-9;
  });
  guarded("incomplete gamma Q(100, 130)",
          [&] { return std::abs(gamma_q(100, 130) / 0.0027504083673063613 - 1.0) < 1e-12; });
  guarded("enumeration unbiasedness", [&] {
    const auto p = DistributionModel::finite_discrete({0.0, 1.0, 2.0}, {0.5, 0.3, 0.2});
    const auto q = DistributionModel::finite_discrete({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
    const OracleResult r = enumerate_exact(p, q, 6, EventSet({{1.5, kInf}}), 1.0);
    return std::abs(r.value / r.alpha - 1.0) < 1e-12;
  });
  guarded("log-sum accumulator matches two-pass sum", [&] {
    std::vector<double> terms;
    LogSumAccumulator acc;
    for (int i = 0; i < 1000; ++i) {
      const double t = std::sin(i * 0.7) * 40.0 - i * 0.01;
      terms.push_back(t);
      acc.add(t);
    }
    return acc.log_sum() == two_pass_log_sum(terms);
  });
  guarded("Monte Carlo P(N(0,1) > 1) within 5 standard errors", [&] {
    RunOptions ro;
    ro.cap = 200'000;
    const CellResult r = run_cell(g, g, 1, 200'000, EventSet({{1.0, kInf}}), {1.0}, 7, {}, ro);
    const double alpha = std::exp(log_normal_tail(1.0));
    const double est = std::exp(r.moments[0].log_mean);
    return std::abs(est - alpha) < 5.0 * std::sqrt(alpha * (1 - alpha) / 200'000);
  });
  return all;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const UnsupportedError*>(&e) || dynamic_cast<const AbsContError*>(&e) ||
      dynamic_cast<const OracleUnavailable*>(&e) || dynamic_cast<const InfeasibleError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const BudgetError*>(&e)) return 3;
  if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const QuadratureError*>(&e)) return 4;
  return 1;
}

}  // namespace ldis::harness
