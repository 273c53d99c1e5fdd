#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nphase/errors.hpp"
#include "nphase/runner.hpp"

namespace {

struct Args {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("config", args.config_path, "Path to a run config file")
      ->required();
  sub->add_option("--set", args.overrides,
                  "Override a config entry, e.g. --set steps=100");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-phase interfacial dynamics solver"};
  app.require_subcommand(1);

  Args args;
  CLI::App* cmd_run = app.add_subcommand("run", "Execute a configured run");
  CLI::App* cmd_check = app.add_subcommand(
      "check-tensions", "Test whether the tension set is simplicial");
  CLI::App* cmd_bounds = app.add_subcommand(
      "bounds", "Print the energy-stability step bounds");
  add_common(cmd_run, args);
  add_common(cmd_check, args);
  add_common(cmd_bounds, args);

  CLI11_PARSE(app, argc, argv);

  try {
    nphase::RunConfig cfg =
        nphase::load_config(args.config_path, args.overrides);
    if (cmd_run->parsed()) return nphase::run(cfg);
    if (cmd_check->parsed()) return nphase::check_tensions(cfg);
    return nphase::print_bounds(cfg);
  } catch (const nphase::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nphase::InvalidInput& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const nphase::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
