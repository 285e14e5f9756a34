#include <CLI11.hpp>
#include <iostream>

#include "biosim/cli/config.hpp"
#include "biosim/cli/experiments.hpp"
#include "biosim/errors.hpp"

namespace {

using namespace biosim::cli;

struct Command {
  const char* name;
  const char* help;
  const char* default_preset;
  int (*fn)(const RunConfig&, std::ostream&);
};

constexpr Command kCommands[] = {
    {"run", "integrate one configuration and write snapshots", "biofilm-6colony", run_command},
    {"converge-grid", "grid refinement study", "biofilm-6colony", converge_grid_command},
    {"converge-eps", "regularization study against eps = 0", "biofilm-6colony", converge_eps_command},
    {"barenblatt", "porous medium run against the Barenblatt solution", "pme-barenblatt", barenblatt_command},
    {"qs-sweep", "quorum sensing event times over domain lengths", "qs-sweep", qs_sweep_command},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biofilm / porous medium / quorum sensing simulator"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out;
  std::string grid;
  double tol = 0.0;
  double eps = 0.0;
  double t_end = 0.0;
  bool vtk = false;
  bool parallel = false;
  bool vectorized = false;

  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "built-in configuration");
    sub->add_option("--out", out, std::string("output directory (overrides ") + kOutDirEnv + ")");
    sub->add_option("--tol", tol, "integrator tolerance");
    sub->add_option("--eps", eps, "diffusion regularization");
    sub->add_option("--grid", grid, "grid size NxM");
    sub->add_option("--t-end", t_end, "final time");
    sub->add_flag("--vtk", vtk, "also write legacy VTK snapshots");
    sub->add_flag("--parallel", parallel, "run sweep points concurrently");
    sub->add_flag("--simd", vectorized, "use the SIMD kernels (results may differ in the last bits)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const Command* chosen = nullptr;
  for (const Command& c : kCommands) {
    if (app.got_subcommand(c.name)) chosen = &c;
  }
  CLI::App* sub = app.get_subcommand(chosen->name);

  try {
    std::optional<std::string> preset_choice;
    if (sub->count("--preset")) preset_choice = preset;
    RunConfig config = sub->count("--config")
                           ? load_config(config_path, preset_choice)
                           : preset_config(preset_choice.value_or(chosen->default_preset));
    Overrides o;
    if (sub->count("--out")) o.out_dir = out;
    if (sub->count("--tol")) o.tol = tol;
    if (sub->count("--eps")) o.epsilon = eps;
    if (sub->count("--grid")) o.grid = grid;
    if (sub->count("--t-end")) o.t_end = t_end;
    o.vtk = vtk;
    apply_overrides(config, o);
    if (parallel) config.sweep.parallel = true;
    if (vectorized) config.deterministic = false;
    config.validate();
    return chosen->fn(config, std::cout);
  } catch (const biosim::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const biosim::IntegrationAbort& e) {
    std::cerr << "integration aborted: " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
