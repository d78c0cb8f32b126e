#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ldis/distributions.hpp"
#include "ldis/errors.hpp"
#include "ldis/event_set.hpp"
#include "ldis/limits.hpp"
#include "ldis/mc_engine.hpp"

namespace ldis::harness {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model as written in the config file. kind is one of gaussian (params: mean,
// variance), exponential (rate), finite_discrete (points, probs), mixture (weights,
// components), tilt (theta; relative to the base model) or walk_mixture (weights,
// components chosen once per replication).
struct ModelSpec {
  std::string kind;
  std::vector<double> params;
  std::vector<double> points;
  std::vector<double> probs;
  std::vector<double> weights;
  std::vector<ModelSpec> components;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;
  bool log = false;

  std::vector<double> points() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct OutputSpec {
  std::string csv;
  std::string json;
  std::string svg;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ScenarioConfig {
  std::string mode = "simulate";  // simulate, limit, lra, rate, oracle, reproduce
  std::string preset;             // reproduce: exp1, exp2, two_sided_lra
  std::string label;
  bool quick = false;             // reproduce: reduced schedules
  bool include_timing = false;    // wall time in the JSON report
  std::string lra_mode = "per_x";           // per_x or variational
  std::string mixture_rule = "pointwise";   // pointwise or joint

  std::optional<ModelSpec> base;
  std::optional<ModelSpec> importance;
  std::optional<EventSet> event;
  std::optional<SampleSchedule> schedule;
  std::vector<double> xis{1.0};
  std::vector<std::uint64_t> seeds{1};
  double srv_epsilon = 0.01;
  std::optional<GridSpec> grid;
  OutputSpec outputs;
};

bool same_config(const ScenarioConfig& a, const ScenarioConfig& b);

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_string(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// Canonical key = value text; parse_config_string(echo_config(c)) reproduces c.
std::string echo_config(const ScenarioConfig& c);

// Fails fast on anything the selected mode cannot run.
void validate(const ScenarioConfig& c);

DistributionModel build_model(const ModelSpec& spec);
// Importance measure with tilt shorthands resolved against the base model.
Importance build_importance(const ModelSpec& spec, const DistributionModel& base);

ModelSpec gaussian_spec(double mean, double variance);
ModelSpec exponential_spec(double rate);
ModelSpec tilt_spec(double theta);
ModelSpec finite_discrete_spec(std::vector<double> points, std::vector<double> probs);
ModelSpec walk_mixture_spec(std::vector<double> weights, std::vector<ModelSpec> components);

}  // namespace ldis::harness
