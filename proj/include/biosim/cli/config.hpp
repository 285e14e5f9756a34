#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biosim/errors.hpp"
#include "biosim/grid.hpp"
#include "biosim/model.hpp"
#include "biosim/problems.hpp"

namespace biosim::cli {

/// Malformed or inconsistent configuration. Maps to exit status 2.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

enum class ColonyLayout { None, SixColony, Central, Explicit };

struct ColonySpec {
  ColonyLayout layout = ColonyLayout::SixColony;
  double radius = 0.05;
  double amplitude = 0.9;
  std::vector<Colony> explicit_colonies;

  /// Colony list for a domain of the given length.
  std::vector<Colony> resolve(double length) const;
};

struct SweepSettings {
  std::vector<int> kappas{5, 6, 7};
  std::vector<double> times{2.0, 6.0};
  std::vector<double> eps_list{1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<int> grids{32, 64, 128};
  std::vector<double> lengths{1.0, 1.5, 2.0, 2.5};
  int cells_per_unit = 64;
  bool parallel = false;
};

struct RunConfig {
  std::string preset = "biofilm-6colony";
  ProblemKind kind = ProblemKind::Biofilm;
  BiofilmParams biofilm;
  QsParams qs;
  PmeParams pme;
  double epsilon = 0.0;
  ColonySpec colonies;
  double c0 = 1.0;

  int nx = 64;
  int ny = 64;
  double length = 1.0;
  double height = 1.0;

  double tol = 1e-7;
  double t_start = 0.0;
  double t_end = 6.0;
  double h0 = 1e-3;
  std::size_t max_steps = 0;  ///< 0: unlimited
  std::string tableau = "ros3prl2";
  bool enforce_bounds = true;

  double snapshot_interval = 1.0;  ///< <= 0 writes the initial and final state only
  bool stop_on_induction = false;  ///< qs: stop once s >= threshold everywhere
  double signal_threshold = 1.0;
  double biofilm_threshold = 1e-3;

  std::filesystem::path out_dir = "biosim-out";
  bool vtk = false;
  bool deterministic = true;

  SweepSettings sweep;

  /// Throws ConfigError with the offending key.
  void validate() const;
  Grid grid() const;
  ProblemDef problem_def() const;
  /// Canonical key = value text; load_config() of it reproduces this config.
  std::string to_ini() const;
  /// FNV-1a of to_ini(), hex.
  std::string hash() const;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset_config(const std::string& name);

/// Parses an INI file. A `preset` key in [run] selects the base config that
/// the remaining keys override; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path,
                      const std::optional<std::string>& preset_override = std::nullopt);
RunConfig parse_config(const std::string& text, const std::optional<std::string>& preset_override = std::nullopt);

/// "NxM" -> (N, M).
std::pair<int, int> parse_grid_size(const std::string& text);

/// Command-line overrides, applied after the config file.
struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<double> tol;
  std::optional<double> epsilon;
  std::optional<std::string> grid;
  std::optional<double> t_end;
  bool vtk = false;
};

/// --out wins over the BIOSIM_OUT_DIR environment variable, which wins over
/// the config file.
void apply_overrides(RunConfig& config, const Overrides& overrides);

inline constexpr const char* kOutDirEnv = "BIOSIM_OUT_DIR";

}  // namespace biosim::cli
