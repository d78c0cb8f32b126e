#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldis/harness/config.hpp"
#include "ldis/harness/output.hpp"
#include "ldis/mc_engine.hpp"

namespace ldis::harness {

using Json = nlohmann::ordered_json;

struct NamedTable {
  std::string name;  // "" for the primary table; otherwise a file-name suffix
  Table table;
};

struct CommandOutput {
  std::vector<NamedTable> tables;
  Json report;
  std::optional<SvgPlot> plot;
};

// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
Json json_number(double v);
Json report_json(const ExperimentReport& r, bool include_timing);

// Simulation rows: label, seed, n, rate, m, xi, log_mean, hits, Y_n, status, emp_lra, weighted_mean.
// Y_n is -(1/n) log of the ξ-moment estimate, "inf" with zero hits.
Table simulation_table();
void append_simulation_rows(Table& t, const std::string& label, const ExperimentReport& r,
                            const std::vector<EmpiricalLra>* lra);

CommandOutput cmd_simulate(const ScenarioConfig& c, const RunOptions& opts = {});
CommandOutput cmd_limit(const ScenarioConfig& c);
CommandOutput cmd_lra(const ScenarioConfig& c);
CommandOutput cmd_rate(const ScenarioConfig& c);
CommandOutput cmd_oracle(const ScenarioConfig& c);
// seed_override replaces the preset's seed list with a single seed.
CommandOutput cmd_reproduce(const ScenarioConfig& c, const RunOptions& opts = {},
                            std::optional<std::uint64_t> seed_override = std::nullopt);

// The simulate scenarios behind a preset (exp1: one per tilt, exp2: one per importance
// measure, two_sided_lra: the Monte Carlo validation points).
std::vector<ScenarioConfig> preset_scenarios(const std::string& preset, bool quick);

// Validates, then dispatches on c.mode.
CommandOutput run_command(const ScenarioConfig& c, const RunOptions& opts = {},
                          std::optional<std::uint64_t> seed_override = std::nullopt);

// Writes every configured output. Unset paths default to <out_dir>/<stem>.{csv,json,svg}
// when out_dir is given; relative paths are resolved against out_dir. Returns the
// paths written. With neither, the primary CSV goes to `fallback`.
std::vector<std::string> write_outputs(const CommandOutput& out, const ScenarioConfig& c,
                                       const std::string& out_dir, std::ostream& fallback);

// Quick internal consistency checks; prints one PASS/FAIL line each.
bool selftest(std::ostream& os);

// 2 config or domain errors, 3 budget, 4 numeric convergence, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace ldis::harness
