#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biosim/cli/config.hpp"
#include "biosim/cli/output.hpp"
#include "biosim/integrator.hpp"
#include "biosim/observables.hpp"

namespace biosim::cli {

/// Integrator options for a config: tolerance, tableau, h0 and, when
/// enforce_bounds is set, the admissible box of each species.
IntegratorOptions integrator_options(const RunConfig& config, std::size_t cells);

/// Selects the scalar kernels when config.deterministic, else the best.
void select_backend(const RunConfig& config);

/// States of one run at increasing output times (all > t_start).
struct TimedStates {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  IntegrationTrace trace;
  double seconds = 0.0;
};
TimedStates integrate_to_times(const RunConfig& config, const Grid& grid, const std::vector<double>& times);

struct GridStudyRow {
  int kappa;
  double t;
  double e_u;
  std::optional<double> e_c;
  double seconds;  ///< wall time of the 2^kappa run
};
/// Runs grids with 2^k cells across the height for k = min(kappas)-1 ..
/// max(kappas) and compares consecutive levels at each sweep time.
std::vector<GridStudyRow> grid_refinement_study(const RunConfig& config);

struct EpsStudyRow {
  double eps;
  double e_u;
  std::optional<double> e_c;
};
/// Compares each eps in sweep.eps_list with the eps = 0 run at t_end.
std::vector<EpsStudyRow> regularization_study(const RunConfig& config);

struct BarenblattRow {
  int n;
  double error;
  double seconds;
};
/// PME runs on N x N grids from sweep.grids, error against the exact
/// solution at t_end.
std::vector<BarenblattRow> barenblatt_study(const RunConfig& config);

struct QsSweepPoint {
  double length;
  QsEventTimes events;
  std::vector<std::pair<double, double>> mass_series;  ///< (t, M) on accepted steps
  double t_stop;
};
struct QsSweepResult {
  std::vector<QsSweepPoint> points;
  std::array<std::optional<QuadFit>, 4> t_fits;
  std::array<std::optional<QuadFit>, 4> m_fits;
  std::vector<std::string> warnings;
};
/// One qs run per sweep length (H fixed, sweep.cells_per_unit cells per
/// unit length), stopped at T4 or t_end, then quadratic fits in L.
QsSweepResult qs_sweep_study(const RunConfig& config);

/// Exit status of a subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;

/// `run`: integrates the configured problem, writing snapshots, trace.csv,
/// observables.csv, config.ini and manifest.json into config.out_dir.
int run_command(const RunConfig& config, std::ostream& log);
int converge_grid_command(const RunConfig& config, std::ostream& log);
int converge_eps_command(const RunConfig& config, std::ostream& log);
int barenblatt_command(const RunConfig& config, std::ostream& log);
int qs_sweep_command(const RunConfig& config, std::ostream& log);

std::string version_string();

}  // namespace biosim::cli
