#include "biosim/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "biosim/problems.hpp"
#include "biosim/simd/kernels.hpp"

#ifndef BIOSIM_VERSION
#define BIOSIM_VERSION "unknown"
#endif

namespace biosim::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string version_string() { return BIOSIM_VERSION; }

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T, class F>
std::vector<T> map_points(std::size_t n, bool parallel, F&& fn) {
  std::vector<T> out;
  out.reserve(n);
  if (!parallel || n < 2) {
    for (std::size_t k = 0; k < n; ++k) out.push_back(fn(k));
    return out;
  }
  std::vector<std::future<T>> jobs;
  for (std::size_t k = 0; k < n; ++k) jobs.push_back(std::async(std::launch::async, fn, k));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::span<const double> species(std::span<const double> y, std::size_t cells, std::size_t s) {
  return y.subspan(s * cells, cells);
}

Field species_field(const Grid& grid, std::span<const double> y, std::size_t s) {
  const auto v = species(y, grid.cell_count(), s);
  return Field(grid, std::vector<double>(v.begin(), v.end()));
}

RunConfig with_grid(RunConfig c, int nx, int ny) {
  c.nx = nx;
  c.ny = ny;
  return c;
}

std::string time_label(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

nlohmann::json manifest_base(const RunConfig& config, const std::string& command) {
  nlohmann::json m;
  m["tool"] = "biosim";
  m["version"] = version_string();
  m["command"] = command;
  m["preset"] = config.preset;
  m["config_hash"] = config.hash();
  m["config"] = config.to_ini();
  m["simd_backend"] = std::string(simd::backend_name(simd::active_backend()));
  return m;
}

void write_manifest(const fs::path& dir, const nlohmann::json& m) {
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

template <class F>
void write_csv_file(const fs::path& path, F&& body) {
  std::ostringstream os;
  os << std::setprecision(17);
  body(os);
  write_text_file(path, os.str());
}

}  // namespace

void select_backend(const RunConfig& config) {
  simd::set_backend(config.deterministic ? simd::Backend::Scalar : simd::best_available_backend());
}

IntegratorOptions integrator_options(const RunConfig& config, std::size_t cells) {
  IntegratorOptions o;
  o.controller.tol = config.tol;
  o.tableau = config.tableau;
  o.h0 = config.h0;
  o.max_steps = config.max_steps;
  if (config.enforce_bounds) {
    switch (config.kind) {
      case ProblemKind::Biofilm:
        o.bounds = {{0, cells, 0.0, 1.0, true}, {cells, cells, 0.0, 1.0, false}};
        break;
      case ProblemKind::Qs:
        o.bounds = {{0, cells, 0.0, 1.0, true}, {cells, cells, 0.0, 1.0, false}, {2 * cells, cells, 0.0}};
        break;
      case ProblemKind::Pme: o.bounds = {{0, cells, 0.0}}; break;
    }
  }
  return o;
}

TimedStates integrate_to_times(const RunConfig& config, const Grid& grid, const std::vector<double>& times) {
  const Problem problem = config.problem_def().build(grid);
  IntegratorOptions options = integrator_options(config, grid.cell_count());
  TimedStates out;
  const auto start = Clock::now();
  std::vector<double> y = problem.initial_state;
  double t = config.t_start;
  for (double target : times) {
    if (!(target > t)) throw ConfigError("output times must increase past the start time");
    IntegrationResult r = integrate(problem.system, std::move(y), t, target, options);
    out.trace.entries.insert(out.trace.entries.end(), r.trace.entries.begin(), r.trace.entries.end());
    options.h0 = r.h_next;
    y = std::move(r.state);
    t = target;
    out.times.push_back(target);
    out.states.push_back(y);
  }
  out.seconds = seconds_since(start);
  return out;
}

std::vector<GridStudyRow> grid_refinement_study(const RunConfig& config) {
  if (config.sweep.kappas.empty()) throw ConfigError("sweep.kappas: empty");
  std::vector<double> times = config.sweep.times;
  std::sort(times.begin(), times.end());
  const int k_lo = *std::min_element(config.sweep.kappas.begin(), config.sweep.kappas.end()) - 1;
  const int k_hi = *std::max_element(config.sweep.kappas.begin(), config.sweep.kappas.end());
  const double aspect = config.length / config.height;

  std::vector<int> levels;
  for (int k = k_lo; k <= k_hi; ++k) levels.push_back(k);
  const auto runs = map_points<TimedStates>(levels.size(), config.sweep.parallel, [&](std::size_t idx) {
    const int m = 1 << levels[idx];
    const int n = static_cast<int>(std::lround(aspect * m));
    RunConfig c = with_grid(config, n, m);
    c.validate();
    return integrate_to_times(c, c.grid(), times);
  });

  const std::size_t ns = config.problem_def().species_count();
  std::vector<GridStudyRow> rows;
  for (std::size_t idx = 1; idx < levels.size(); ++idx) {
    const int kappa = levels[idx];
    if (std::find(config.sweep.kappas.begin(), config.sweep.kappas.end(), kappa) == config.sweep.kappas.end()) {
      continue;
    }
    const int m_f = 1 << kappa;
    const Grid fine(static_cast<int>(std::lround(aspect * m_f)), m_f, config.length, config.height);
    const Grid coarse(static_cast<int>(std::lround(aspect * m_f / 2)), m_f / 2, config.length, config.height);
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      GridStudyRow row{kappa, times[ti], 0.0, std::nullopt, runs[idx].seconds};
      row.e_u = refinement_error(species_field(fine, runs[idx].states[ti], 0),
                                 species_field(coarse, runs[idx - 1].states[ti], 0));
      if (ns > 1) {
        row.e_c = refinement_error(species_field(fine, runs[idx].states[ti], 1),
                                   species_field(coarse, runs[idx - 1].states[ti], 1));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<EpsStudyRow> regularization_study(const RunConfig& config) {
  const Grid grid = config.grid();
  std::vector<double> eps_values{0.0};
  eps_values.insert(eps_values.end(), config.sweep.eps_list.begin(), config.sweep.eps_list.end());
  const auto runs = map_points<TimedStates>(eps_values.size(), config.sweep.parallel, [&](std::size_t k) {
    RunConfig c = config;
    c.epsilon = eps_values[k];
    return integrate_to_times(c, grid, {config.t_end});
  });
  const std::size_t ns = config.problem_def().species_count();
  std::vector<EpsStudyRow> rows;
  for (std::size_t k = 1; k < eps_values.size(); ++k) {
    EpsStudyRow row{eps_values[k], 0.0, std::nullopt};
    row.e_u = scaled_l2_error(species_field(grid, runs[k].states[0], 0), species_field(grid, runs[0].states[0], 0));
    if (config.kind == ProblemKind::Biofilm && ns > 1) {
      row.e_c =
          scaled_l2_error(species_field(grid, runs[k].states[0], 1), species_field(grid, runs[0].states[0], 1));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<BarenblattRow> barenblatt_study(const RunConfig& config) {
  if (config.kind != ProblemKind::Pme) throw ConfigError("barenblatt: the config must describe a pme problem");
  return map_points<BarenblattRow>(config.sweep.grids.size(), config.sweep.parallel, [&](std::size_t k) {
    const int n = config.sweep.grids[k];
    RunConfig c = with_grid(config, n, n);
    c.length = c.height;
    c.validate();
    const Grid grid = c.grid();
    const TimedStates run = integrate_to_times(c, grid, {c.t_end});
    const Field exact = barenblatt_field(grid, c.t_end, c.pme);
    return BarenblattRow{n, scaled_l2_error(species_field(grid, run.states[0], 0), exact), run.seconds};
  });
}

namespace {

QsSweepPoint qs_point(const RunConfig& config, double length) {
  RunConfig c = config;
  c.length = length;
  c.ny = static_cast<int>(std::lround(config.sweep.cells_per_unit * config.height));
  c.nx = static_cast<int>(std::lround(config.sweep.cells_per_unit * length));
  c.validate();
  const Grid grid = c.grid();
  const std::size_t cells = grid.cell_count();
  const Problem problem = c.problem_def().build(grid);
  QsEventTracker tracker(grid, c.signal_threshold, c.biofilm_threshold);
  QsSweepPoint point{length, {}, {}, c.t_end};
  Observer obs = [&](const StepInfo& s) {
    point.mass_series.emplace_back(s.t, total_biomass(species_field(grid, s.state, 0)));
    const bool done = tracker.observe(s.t, species(s.state, cells, 0), species(s.state, cells, 2));
    return done ? ObserverAction::Stop : ObserverAction::Continue;
  };
  const IntegrationResult r =
      integrate(problem.system, problem.initial_state, c.t_start, c.t_end, integrator_options(c, cells), {&obs, 1});
  point.events = tracker.events();
  point.t_stop = r.t;
  return point;
}

}  // namespace

QsSweepResult qs_sweep_study(const RunConfig& config) {
  if (config.kind != ProblemKind::Qs) throw ConfigError("qs-sweep: the config must describe a qs problem");
  QsSweepResult result;
  result.points = map_points<QsSweepPoint>(config.sweep.lengths.size(), config.sweep.parallel,
                                           [&](std::size_t k) { return qs_point(config, config.sweep.lengths[k]); });
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<std::pair<double, double>> tp;
    std::vector<std::pair<double, double>> mp;
    for (const QsSweepPoint& p : result.points) {
      if (p.events.t[i]) {
        tp.emplace_back(p.length, *p.events.t[i]);
        mp.emplace_back(p.length, *p.events.mass[i]);
      } else {
        result.warnings.push_back("T" + std::to_string(i + 1) + " not reached for L=" + time_label(p.length) +
                                  "; excluded from the fit");
      }
    }
    try {
      result.t_fits[i] = quad_fit(tp);
      result.m_fits[i] = quad_fit(mp);
    } catch (const ParameterError& e) {
      result.warnings.push_back("T" + std::to_string(i + 1) + " fit skipped: " + e.what());
    }
  }
  return result;
}

int run_command(const RunConfig& config, std::ostream& log) {
  config.validate();
  select_backend(config);
  const fs::path dir = config.out_dir;
  fs::create_directories(dir / "snapshots");
  write_text_file(dir / "config.ini", config.to_ini());

  const Grid grid = config.grid();
  const std::size_t cells = grid.cell_count();
  const Problem problem = config.problem_def().build(grid);
  const auto& names = problem.system.species_names();
  const std::string hash = config.hash();

  ObservablesTable table;
  const std::string exp = "run";
  std::ostringstream index;
  index << std::setprecision(17) << "file,t,step,config_hash\n";
  std::size_t snapshot_count = 0;
  double last_snapshot_t = -INFINITY;

  auto write_snapshot = [&](double t, std::size_t step, std::span<const double> y) {
    Snapshot snap{t, step, names, {}};
    for (std::size_t s = 0; s < names.size(); ++s) snap.fields.push_back(species_field(grid, y, s));
    std::ostringstream name;
    name << "snapshot_" << std::setw(6) << std::setfill('0') << snapshot_count++;
    std::ostringstream csv;
    write_snapshot_csv(csv, snap);
    write_text_file(dir / "snapshots" / (name.str() + ".csv"), csv.str());
    if (config.vtk) {
      std::ostringstream vtk;
      write_snapshot_vtk(vtk, snap);
      write_text_file(dir / "snapshots" / (name.str() + ".vtk"), vtk.str());
    }
    index << "snapshots/" << name.str() << ".csv," << t << ',' << step << ',' << hash << '\n';
    last_snapshot_t = t;

    const Field u = snap.fields[0];
    const auto [u_min, u_max] = std::minmax_element(u.values().begin(), u.values().end());
    table.add(exp, "t", t, "total_biomass", total_biomass(u));
    table.add(exp, "t", t, "max_U", *u_max);
    table.add(exp, "t", t, "min_U", *u_min);
    if (config.kind != ProblemKind::Qs) {
      table.add(exp, "t", t, "interface_height", interface_height(u, 0.5 * config.length, config.biofilm_threshold));
    }
    if (names.size() > 1) {
      const Field c = snap.fields[1];
      const auto [c_min, c_max] = std::minmax_element(c.values().begin(), c.values().end());
      table.add(exp, "t", t, "min_C", *c_min);
      table.add(exp, "t", t, "max_C", *c_max);
    }
    if (config.kind == ProblemKind::Pme && t >= config.pme.t0) {
      table.add(exp, "t", t, "barenblatt_error", scaled_l2_error(u, barenblatt_field(grid, t, config.pme)));
    }
  };

  std::optional<QsEventTracker> tracker;
  if (config.kind == ProblemKind::Qs) tracker.emplace(grid, config.signal_threshold, config.biofilm_threshold);
  double next_snapshot = config.t_start;
  Observer obs = [&](const StepInfo& s) {
    if (s.step_index == 0 || (config.snapshot_interval > 0.0 && s.t >= next_snapshot)) {
      write_snapshot(s.t, s.step_index, s.state);
      if (config.snapshot_interval > 0.0) {
        while (next_snapshot <= s.t) next_snapshot += config.snapshot_interval;
      }
    }
    if (tracker) {
      const bool done = tracker->observe(s.t, species(s.state, cells, 0), species(s.state, cells, 2));
      if (done && config.stop_on_induction) return ObserverAction::Stop;
    }
    return ObserverAction::Continue;
  };

  nlohmann::json manifest = manifest_base(config, "run");
  const auto start = Clock::now();
  IntegrationResult result;
  int status = kExitOk;
  try {
    result = integrate(problem.system, problem.initial_state, config.t_start, config.t_end,
                       integrator_options(config, cells), {&obs, 1});
    if (result.t > last_snapshot_t) write_snapshot(result.t, result.trace.accepted_count(), result.state);
    manifest["status"] = "ok";
    if (result.stopped_early) manifest["stop_reason"] = result.stop_reason;
  } catch (const AbortedIntegration& e) {
    result = e.partial();
    status = kExitAbort;
    manifest["status"] = "aborted";
    manifest["message"] = e.what();
    log << "integration aborted: " << e.what() << "\n";
  }
  if (tracker) {
    const QsEventTimes& ev = tracker->events();
    for (std::size_t i = 0; i < 4; ++i) {
      table.add(exp, "t", ev.t[i].value_or(result.t), "T" + std::to_string(i + 1), ev.t[i]);
      table.add(exp, "t", ev.t[i].value_or(result.t), "M_total_" + std::to_string(i + 1), ev.mass[i]);
    }
  }

  write_text_file(dir / "snapshots.csv", index.str());
  write_csv_file(dir / "trace.csv", [&](std::ostream& os) { result.trace.write_csv(os); });
  write_csv_file(dir / "observables.csv", [&](std::ostream& os) { table.write_csv(os); });
  manifest["t_final"] = result.t;
  manifest["accepted_steps"] = result.trace.accepted_count();
  manifest["rejected_steps"] = result.trace.rejected_count();
  manifest["projected_components"] = result.projected_components;
  manifest["max_projection"] = result.max_projection;
  manifest["snapshots"] = snapshot_count;
  manifest["wall_seconds"] = seconds_since(start);
  write_manifest(dir, manifest);

  log << "run " << config.preset << ": t=" << result.t << " accepted=" << result.trace.accepted_count()
      << " rejected=" << result.trace.rejected_count() << " -> " << dir.string() << "\n";
  return status;
}

namespace {

template <class Study, class Writer>
int sweep_command(const RunConfig& config, const std::string& name, std::ostream& log, Study&& study,
                  Writer&& write) {
  config.validate();
  select_backend(config);
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  write_text_file(dir / "config.ini", config.to_ini());
  nlohmann::json manifest = manifest_base(config, name);
  const auto start = Clock::now();
  try {
    auto result = study(config);
    ObservablesTable table;
    write(result, table, dir, manifest);
    write_csv_file(dir / "observables.csv", [&](std::ostream& os) { table.write_csv(os); });
    manifest["status"] = "ok";
  } catch (const AbortedIntegration& e) {
    manifest["status"] = "aborted";
    manifest["message"] = e.what();
    manifest["wall_seconds"] = seconds_since(start);
    write_manifest(dir, manifest);
    log << name << ": integration aborted: " << e.what() << "\n";
    return kExitAbort;
  }
  manifest["wall_seconds"] = seconds_since(start);
  write_manifest(dir, manifest);
  return kExitOk;
}

}  // namespace

int converge_grid_command(const RunConfig& config, std::ostream& log) {
  return sweep_command(config, "converge-grid", log, grid_refinement_study,
                       [&](const std::vector<GridStudyRow>& rows, ObservablesTable& table, const fs::path& dir,
                           nlohmann::json& manifest) {
                         log << "kappa      t          E_U          E_C   seconds\n";
                         nlohmann::json timing = nlohmann::json::object();
                         write_csv_file(dir / "timing.csv", [&](std::ostream& os) {
                           os << "kappa,seconds\n";
                           std::map<int, double> seen;
                           for (const GridStudyRow& r : rows) seen[r.kappa] = r.seconds;
                           for (const auto& [k, s] : seen) {
                             os << k << ',' << s << '\n';
                             timing[std::to_string(k)] = s;
                           }
                         });
                         manifest["seconds_per_kappa"] = timing;
                         for (const GridStudyRow& r : rows) {
                           const std::string at = "(t=" + time_label(r.t) + ")";
                           table.add("converge-grid", "kappa", r.kappa, "E_U" + at, r.e_u);
                           if (r.e_c) table.add("converge-grid", "kappa", r.kappa, "E_C" + at, *r.e_c);
                           log << std::setw(5) << r.kappa << std::setw(7) << r.t << std::setw(13)
                               << std::scientific << std::setprecision(4) << r.e_u << std::setw(13)
                               << r.e_c.value_or(NAN) << std::defaultfloat << std::setw(10)
                               << std::setprecision(3) << r.seconds << "\n";
                         }
                       });
}

int converge_eps_command(const RunConfig& config, std::ostream& log) {
  return sweep_command(config, "converge-eps", log, regularization_study,
                       [&](const std::vector<EpsStudyRow>& rows, ObservablesTable& table, const fs::path&,
                           nlohmann::json&) {
                         log << "       eps          E_U          E_C\n";
                         for (const EpsStudyRow& r : rows) {
                           table.add("converge-eps", "eps", r.eps, "E_U", r.e_u);
                           if (r.e_c) table.add("converge-eps", "eps", r.eps, "E_C", *r.e_c);
                           log << std::scientific << std::setprecision(4) << std::setw(10) << r.eps
                               << std::setw(13) << r.e_u << std::setw(13) << r.e_c.value_or(NAN)
                               << std::defaultfloat << "\n";
                         }
                       });
}

int barenblatt_command(const RunConfig& config, std::ostream& log) {
  return sweep_command(config, "barenblatt", log, barenblatt_study,
                       [&](const std::vector<BarenblattRow>& rows, ObservablesTable& table, const fs::path&,
                           nlohmann::json&) {
                         log << "     N        E_0^N    order   seconds\n";
                         for (std::size_t k = 0; k < rows.size(); ++k) {
                           const BarenblattRow& r = rows[k];
                           table.add("barenblatt", "N", r.n, "E", r.error);
                           double order = NAN;
                           if (k > 0) {
                             order = std::log(rows[k - 1].error / r.error) /
                                     std::log(static_cast<double>(r.n) / rows[k - 1].n);
                             table.add("barenblatt", "N", r.n, "observed_order", order);
                           }
                           log << std::setw(6) << r.n << std::scientific << std::setprecision(4)
                               << std::setw(13) << r.error << std::defaultfloat << std::setprecision(3)
                               << std::setw(9) << order << std::setw(10) << r.seconds << "\n";
                         }
                       });
}

int qs_sweep_command(const RunConfig& config, std::ostream& log) {
  return sweep_command(
      config, "qs-sweep", log, qs_sweep_study,
      [&](const QsSweepResult& result, ObservablesTable& table, const fs::path& dir, nlohmann::json& manifest) {
        log << "     L        T1        T2        T3        T4   M_total,1   M_total,4\n";
        for (const QsSweepPoint& p : result.points) {
          for (std::size_t i = 0; i < 4; ++i) {
            table.add("qs-sweep", "L", p.length, "T" + std::to_string(i + 1), p.events.t[i]);
            table.add("qs-sweep", "L", p.length, "M_total_" + std::to_string(i + 1), p.events.mass[i]);
          }
          log << std::setw(6) << p.length << std::fixed << std::setprecision(4);
          for (const auto& t : p.events.t) log << std::setw(10) << t.value_or(NAN);
          log << std::scientific << std::setprecision(4) << std::setw(12) << p.events.mass[0].value_or(NAN)
              << std::setw(12) << p.events.mass[3].value_or(NAN) << std::defaultfloat << "\n";
        }
        write_csv_file(dir / "mass_series.csv", [&](std::ostream& os) {
          os << "L,t,M\n";
          for (const QsSweepPoint& p : result.points) {
            for (const auto& [t, m] : p.mass_series) os << p.length << ',' << t << ',' << m << '\n';
          }
        });
        write_csv_file(dir / "fits.csv", [&](std::ostream& os) {
          os << "quantity,a,b,c,rms\n";
          for (std::size_t i = 0; i < 4; ++i) {
            if (const auto& f = result.t_fits[i]) {
              os << 'T' << i + 1 << ',' << f->a << ',' << f->b << ',' << f->c << ',' << f->rms << '\n';
            }
          }
          for (std::size_t i = 0; i < 4; ++i) {
            if (const auto& f = result.m_fits[i]) {
              os << "M_total_" << i + 1 << ',' << f->a << ',' << f->b << ',' << f->c << ',' << f->rms << '\n';
            }
          }
        });
        for (const std::string& w : result.warnings) log << "warning: " << w << "\n";
        manifest["warnings"] = result.warnings;
      });
}

}  // namespace biosim::cli
