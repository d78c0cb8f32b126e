#include "ldis/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ldis::harness {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

double parse_double(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": '" + tok + "' is not a number");
  }
  if (used != tok.size()) throw ConfigError(where + ": '" + tok + "' is not a number");
  return v;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& where) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    // Accept scientific notation for integral values such as 5e8.
    const double d = parse_double(tok, where);
    if (!(d >= 0) || d != std::floor(d) || d > 1.8e19) throw ConfigError(where + ": '" + tok + "' is not a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

bool parse_bool(const std::string& tok, const std::string& where) {
  if (tok == "true" || tok == "1" || tok == "yes") return true;
  if (tok == "false" || tok == "0" || tok == "no") return false;
  throw ConfigError(where + ": '" + tok + "' is not a boolean");
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& where) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(parse_double(w, where));
  return out;
}

// Reads a section and rejects keys outside `allowed`.
class Section {
 public:
  Section(const pt::ptree& root, const std::string& name, std::set<std::string> allowed)
      : name_(name) {
    const auto child = root.get_child_optional(pt::ptree::path_type(name, '/'));
    if (!child) return;
    present_ = true;
    for (const auto& [k, v] : *child) {
      if (!allowed.count(k)) throw ConfigError("[" + name + "]: unknown key '" + k + "'");
      values_[k] = v.get_value<std::string>();
    }
  }
  bool present() const { return present_; }
  bool has(const std::string& k) const { return values_.count(k) > 0; }
  std::string str(const std::string& k) const {
    const auto it = values_.find(k);
    if (it == values_.end()) throw ConfigError("[" + name_ + "]: missing key '" + k + "'");
    return it->second;
  }
  std::string str_or(const std::string& k, const std::string& dflt) const { return has(k) ? str(k) : dflt; }
  double num(const std::string& k) const { return parse_double(str(k), where(k)); }
  std::vector<double> list(const std::string& k) const { return parse_list(str(k), where(k)); }
  std::string where(const std::string& k) const { return "[" + name_ + "] " + k; }

 private:
  std::string name_;
  bool present_ = false;
  std::map<std::string, std::string> values_;
};

ModelSpec read_model(const pt::ptree& root, const std::string& name) {
  const Section s(root, name, {"kind", "mean", "variance", "rate", "theta", "points", "probs", "weights", "components"});
  if (!s.present()) throw ConfigError("missing section [" + name + "]");
  ModelSpec m;
  m.kind = s.str("kind");
  if (m.kind == "gaussian") {
    m.params = {s.num("mean"), s.num("variance")};
  } else if (m.kind == "exponential") {
    m.params = {s.num("rate")};
  } else if (m.kind == "tilt") {
    m.params = {s.num("theta")};
  } else if (m.kind == "finite_discrete") {
    m.points = s.list("points");
    m.probs = s.list("probs");
  } else if (m.kind == "mixture" || m.kind == "walk_mixture") {
    m.weights = s.list("weights");
    const std::uint64_t k = parse_u64(s.str("components"), s.where("components"));
    for (std::uint64_t i = 1; i <= k; ++i) {
      m.components.push_back(read_model(root, name + "_component" + std::to_string(i)));
    }
  } else {
    throw ConfigError(s.where("kind") + ": unknown model kind '" + m.kind + "'");
  }
  return m;
}

void write_model(std::ostream& os, const ModelSpec& m, const std::string& name) {
  os << "[" << name << "]\nkind = " << m.kind << "\n";
  if (m.kind == "gaussian") {
    os << "mean = " << fmt(m.params.at(0)) << "\nvariance = " << fmt(m.params.at(1)) << "\n";
  } else if (m.kind == "exponential") {
    os << "rate = " << fmt(m.params.at(0)) << "\n";
  } else if (m.kind == "tilt") {
    os << "theta = " << fmt(m.params.at(0)) << "\n";
  } else if (m.kind == "finite_discrete") {
    os << "points = " << fmt_list(m.points) << "\nprobs = " << fmt_list(m.probs) << "\n";
  } else {
    os << "weights = " << fmt_list(m.weights) << "\ncomponents = " << m.components.size() << "\n";
  }
  os << "\n";
  for (std::size_t i = 0; i < m.components.size(); ++i) {
    write_model(os, m.components[i], name + "_component" + std::to_string(i + 1));
  }
}

EventSet parse_event(const std::string& text, const std::string& where) {
  std::vector<Interval> pieces;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto v = parse_list(part, where);
    if (v.size() != 2) throw ConfigError(where + ": each interval needs exactly two endpoints");
    pieces.push_back({v[0], v[1]});
  }
  try {
    return EventSet(pieces);
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string write_event(const EventSet& e) {
  std::string s;
  for (std::size_t i = 0; i < e.intervals().size(); ++i) {
    s += (i ? ", " : "") + fmt(e.intervals()[i].lo) + " " + fmt(e.intervals()[i].hi);
  }
  return s;
}

bool same_schedule(const SampleSchedule& a, const SampleSchedule& b) {
  const bool ref = (std::isnan(a.reference_rate) && std::isnan(b.reference_rate)) || a.reference_rate == b.reference_rate;
  return a.n_values == b.n_values && a.kind == b.kind && a.rates == b.rates && ref &&
         a.prefactor == b.prefactor && a.cap == b.cap && a.skip_over_cap == b.skip_over_cap;
}

template <class F>
auto wrap(const std::string& what, F f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(what + ": " + e.what());
  } catch (const UnsupportedError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

std::vector<double> GridSpec::points() const {
  if (count < 2) throw ConfigError("[grid] count must be ≥ 2");
  if (!(hi > lo)) throw ConfigError("[grid] needs lo < hi");
  if (log) return log_grid(lo, hi, count);
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  g.back() = hi;
  return g;
}

bool same_config(const ScenarioConfig& a, const ScenarioConfig& b) {
  const bool sched = a.schedule.has_value() == b.schedule.has_value() &&
                     (!a.schedule || same_schedule(*a.schedule, *b.schedule));
  return a.mode == b.mode && a.preset == b.preset && a.label == b.label && a.quick == b.quick &&
         a.include_timing == b.include_timing && a.lra_mode == b.lra_mode &&
         a.mixture_rule == b.mixture_rule && a.base == b.base && a.importance == b.importance &&
         a.event == b.event && sched && a.xis == b.xis && a.seeds == b.seeds &&
         a.srv_epsilon == b.srv_epsilon && a.grid == b.grid && a.outputs == b.outputs;
}

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  static const std::set<std::string> known = {"run", "base", "importance", "event", "schedule", "simulate", "grid", "output"};
  for (const auto& [k, v] : root) {
    const bool component = k.find("_component") != std::string::npos &&
                           (k.rfind("base", 0) == 0 || k.rfind("importance", 0) == 0);
    if (!known.count(k) && !component) throw ConfigError("unknown section [" + k + "]");
  }

  ScenarioConfig c;
  const Section run(root, "run", {"mode", "preset", "label", "quick", "include_timing", "lra_mode", "mixture_rule"});
  c.mode = run.str_or("mode", c.mode);
  c.preset = run.str_or("preset", "");
  c.label = run.str_or("label", "");
  if (run.has("quick")) c.quick = parse_bool(run.str("quick"), run.where("quick"));
  if (run.has("include_timing")) c.include_timing = parse_bool(run.str("include_timing"), run.where("include_timing"));
  c.lra_mode = run.str_or("lra_mode", c.lra_mode);
  c.mixture_rule = run.str_or("mixture_rule", c.mixture_rule);

  if (root.get_child_optional("base")) c.base = read_model(root, "base");
  if (root.get_child_optional("importance")) c.importance = read_model(root, "importance");

  const Section ev(root, "event", {"intervals"});
  if (ev.present()) c.event = parse_event(ev.str("intervals"), ev.where("intervals"));

  const Section sc(root, "schedule", {"n", "rate_kind", "rates", "reference_rate", "prefactor", "cap", "skip_over_cap"});
  if (sc.present()) {
    SampleSchedule s;
    for (double v : sc.list("n")) {
      if (v != std::floor(v) || v < 1 || v > 1e9) throw ConfigError(sc.where("n") + ": n must be a positive integer");
      s.n_values.push_back(static_cast<int>(v));
    }
    const std::string kind = sc.str_or("rate_kind", "r");
    if (kind == "r") s.kind = RateKind::r;
    else if (kind == "c") s.kind = RateKind::c;
    else throw ConfigError(sc.where("rate_kind") + ": expected r or c");
    if (sc.has("rates")) s.rates = sc.list("rates");
    if (sc.has("reference_rate")) s.reference_rate = sc.num("reference_rate");
    if (sc.has("prefactor")) s.prefactor = parse_u64(sc.str("prefactor"), sc.where("prefactor"));
    if (sc.has("cap")) s.cap = parse_u64(sc.str("cap"), sc.where("cap"));
    if (sc.has("skip_over_cap")) s.skip_over_cap = parse_bool(sc.str("skip_over_cap"), sc.where("skip_over_cap"));
    c.schedule = s;
  }

  const Section sim(root, "simulate", {"xis", "seeds", "srv_epsilon"});
  if (sim.has("xis")) c.xis = sim.list("xis");
  if (sim.has("seeds")) {
    c.seeds.clear();
    for (const auto& w : words(sim.str("seeds"))) c.seeds.push_back(parse_u64(w, sim.where("seeds")));
  }
  if (sim.has("srv_epsilon")) c.srv_epsilon = sim.num("srv_epsilon");

  const Section gr(root, "grid", {"lo", "hi", "count", "spacing"});
  if (gr.present()) {
    GridSpec g;
    g.lo = gr.num("lo");
    g.hi = gr.num("hi");
    g.count = static_cast<int>(parse_u64(gr.str("count"), gr.where("count")));
    const std::string sp = gr.str_or("spacing", "linear");
    if (sp != "linear" && sp != "log") throw ConfigError(gr.where("spacing") + ": expected linear or log");
    g.log = sp == "log";
    c.grid = g;
  }

  const Section out(root, "output", {"csv", "json", "svg"});
  c.outputs.csv = out.str_or("csv", "");
  c.outputs.json = out.str_or("json", "");
  c.outputs.svg = out.str_or("svg", "");
  return c;
}

ScenarioConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string echo_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "[run]\nmode = " << c.mode << "\n";
  if (!c.preset.empty()) os << "preset = " << c.preset << "\n";
  if (!c.label.empty()) os << "label = " << c.label << "\n";
  os << "quick = " << (c.quick ? "true" : "false") << "\n";
  os << "include_timing = " << (c.include_timing ? "true" : "false") << "\n";
  os << "lra_mode = " << c.lra_mode << "\nmixture_rule = " << c.mixture_rule << "\n\n";
  if (c.base) write_model(os, *c.base, "base");
  if (c.importance) write_model(os, *c.importance, "importance");
  if (c.event) os << "[event]\nintervals = " << write_event(*c.event) << "\n\n";
  if (c.schedule) {
    const SampleSchedule& s = *c.schedule;
    os << "[schedule]\nn =";
    for (int n : s.n_values) os << " " << n;
    os << "\nrate_kind = " << (s.kind == RateKind::r ? "r" : "c") << "\n";
    if (!s.rates.empty()) os << "rates = " << fmt_list(s.rates) << "\n";
    if (!std::isnan(s.reference_rate)) os << "reference_rate = " << fmt(s.reference_rate) << "\n";
    os << "prefactor = " << s.prefactor << "\ncap = " << s.cap << "\n";
    os << "skip_over_cap = " << (s.skip_over_cap ? "true" : "false") << "\n\n";
  }
  os << "[simulate]\nxis = " << fmt_list(c.xis) << "\nseeds =";
  for (auto s : c.seeds) os << " " << s;
  os << "\nsrv_epsilon = " << fmt(c.srv_epsilon) << "\n\n";
  if (c.grid) {
    os << "[grid]\nlo = " << fmt(c.grid->lo) << "\nhi = " << fmt(c.grid->hi) << "\ncount = " << c.grid->count
       << "\nspacing = " << (c.grid->log ? "log" : "linear") << "\n\n";
  }
  if (!c.outputs.csv.empty() || !c.outputs.json.empty() || !c.outputs.svg.empty()) {
    os << "[output]\n";
    if (!c.outputs.csv.empty()) os << "csv = " << c.outputs.csv << "\n";
    if (!c.outputs.json.empty()) os << "json = " << c.outputs.json << "\n";
    if (!c.outputs.svg.empty()) os << "svg = " << c.outputs.svg << "\n";
  }
  return os.str();
}

DistributionModel build_model(const ModelSpec& spec) {
  return wrap("model '" + spec.kind + "'", [&]() -> DistributionModel {
    if (spec.kind == "gaussian") return DistributionModel::gaussian(spec.params.at(0), spec.params.at(1));
    if (spec.kind == "exponential") return DistributionModel::exponential(spec.params.at(0));
    if (spec.kind == "finite_discrete") return DistributionModel::finite_discrete(spec.points, spec.probs);
    if (spec.kind == "mixture") {
      std::vector<DistributionModel> comps;
      for (const auto& c : spec.components) comps.push_back(build_model(c));
      return DistributionModel::mixture(spec.weights, comps);
    }
    throw ConfigError("model kind '" + spec.kind + "' cannot stand alone here");
  });
}

Importance build_importance(const ModelSpec& spec, const DistributionModel& base) {
  auto one = [&](const ModelSpec& s) -> DistributionModel {
    if (s.kind == "tilt") return wrap("tilt", [&] { return tilt(base, s.params.at(0)); });
    if (s.kind == "walk_mixture") throw ConfigError("walk_mixture components cannot be walk mixtures");
    return build_model(s);
  };
  if (spec.kind == "walk_mixture") {
    WalkMixture mx;
    mx.weights = spec.weights;
    for (const auto& c : spec.components) mx.components.push_back(one(c));
    wrap("walk_mixture", [&] {
      mx.validate();
      return 0;
    });
    return mx;
  }
  return one(spec);
}

void validate(const ScenarioConfig& c) {
  static const std::set<std::string> modes = {"simulate", "limit", "lra", "rate", "oracle", "reproduce"};
  if (!modes.count(c.mode)) throw ConfigError("[run] mode: unknown mode '" + c.mode + "'");
  if (c.lra_mode != "per_x" && c.lra_mode != "variational") throw ConfigError("[run] lra_mode: expected per_x or variational");
  if (c.mixture_rule != "pointwise" && c.mixture_rule != "joint") throw ConfigError("[run] mixture_rule: expected pointwise or joint");
  if (c.mode == "reproduce") {
    if (c.preset != "exp1" && c.preset != "exp2" && c.preset != "two_sided_lra") {
      throw ConfigError("[run] preset: expected exp1, exp2 or two_sided_lra");
    }
    return;
  }
  if (!c.base) throw ConfigError("missing section [base]");
  const DistributionModel base = build_model(*c.base);
  const bool needs_q = c.mode == "simulate" || c.mode == "limit" || c.mode == "lra";
  if (needs_q && !c.importance) throw ConfigError("missing section [importance]");
  if (c.importance) build_importance(*c.importance, base);
  if (c.mode != "rate" && !c.event) throw ConfigError("missing section [event]");
  if ((c.mode == "simulate" || c.mode == "oracle") && !c.schedule) throw ConfigError("missing section [schedule]");
  if (c.mode == "simulate") wrap("[schedule]", [&] {
      c.schedule->validate();
      return 0;
    });
  if (c.mode == "oracle") {
    for (int n : c.schedule->n_values) {
      if (n < 1) throw ConfigError("[schedule] n must be ≥ 1");
    }
  }
  if ((c.mode == "limit" || c.mode == "lra" || c.mode == "rate") && !c.grid) throw ConfigError("missing section [grid]");
  if (c.grid) c.grid->points();
  if (c.xis.empty()) throw ConfigError("[simulate] xis is empty");
  for (double xi : c.xis) {
    if (!(xi > 0)) throw ConfigError("[simulate] xis must be > 0");
  }
  if (c.seeds.empty()) throw ConfigError("[simulate] seeds is empty");
  if (!(c.srv_epsilon > 0)) throw ConfigError("[simulate] srv_epsilon must be > 0");
}

ModelSpec gaussian_spec(double mean, double variance) { return {"gaussian", {mean, variance}, {}, {}, {}, {}}; }
ModelSpec exponential_spec(double rate) { return {"exponential", {rate}, {}, {}, {}, {}}; }
ModelSpec tilt_spec(double theta) { return {"tilt", {theta}, {}, {}, {}, {}}; }
ModelSpec finite_discrete_spec(std::vector<double> points, std::vector<double> probs) {
  return {"finite_discrete", {}, std::move(points), std::move(probs), {}, {}};
}
ModelSpec walk_mixture_spec(std::vector<double> weights, std::vector<ModelSpec> components) {
  return {"walk_mixture", {}, {}, {}, std::move(weights), std::move(components)};
}

}  // namespace ldis::harness
