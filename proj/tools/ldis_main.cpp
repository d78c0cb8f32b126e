#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ldis/harness/commands.hpp"
#include "ldis/harness/config.hpp"

int main(int argc, char** argv) {
  using namespace ldis::harness;
  CLI::App app{"ldis: importance sampling exponents, LRA curves and Monte Carlo checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string preset;
  bool quick = false;

  for (const char* name : {"simulate", "limit", "lra", "rate", "oracle"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " mode from a config file");
    sub->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "replace the configured seeds with this one");
    sub->add_option("--out", out_dir, "output directory");
  }
  auto* rep = app.add_subcommand("reproduce", "run a preset experiment");
  rep->add_option("config", config_path, "config file with [run] preset = ...")->check(CLI::ExistingFile);
  rep->add_option("--preset", preset, "exp1, exp2 or two_sided_lra");
  rep->add_option("--seed", seed, "run a single seed instead of the preset's list");
  rep->add_option("--out", out_dir, "output directory");
  rep->add_flag("--quick", quick, "reduced schedules");
  app.add_subcommand("selftest", "quick internal consistency checks");

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    if (cmd == "selftest") return selftest(std::cout) ? 0 : 1;

    ScenarioConfig c;
    if (!config_path.empty()) c = parse_config_file(config_path);
    if (cmd == "reproduce") {
      if (config_path.empty() && preset.empty()) throw ConfigError("reproduce needs a config file or --preset");
      c.mode = "reproduce";
      if (!preset.empty()) c.preset = preset;
      if (quick) c.quick = true;
    } else if (c.mode != cmd) {
      throw ConfigError("config mode '" + c.mode + "' does not match subcommand '" + cmd + "'");
    }
    if (seed) c.seeds = {*seed};

    const CommandOutput out = run_command(c, {}, seed);
    for (const std::string& path : write_outputs(out, c, out_dir, std::cout)) std::cerr << "wrote " << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
