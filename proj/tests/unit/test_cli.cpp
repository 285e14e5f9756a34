#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "biosim/cli/config.hpp"
#include "biosim/cli/experiments.hpp"
#include "biosim/cli/output.hpp"

using namespace biosim;
using namespace biosim::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("biosim-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + BIOSIM_EXE + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("every preset validates and round-trips through ini") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const RunConfig c = preset_config(name);
    CHECK_NOTHROW(c.validate());
    const RunConfig back = parse_config(c.to_ini());
    CHECK(back.to_ini() == c.to_ini());
    CHECK(back.hash() == c.hash());
  }
  CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}

TEST_CASE("config keys override the preset") {
  const RunConfig c = parse_config(
      "[run]\npreset = pme-barenblatt\ntol = 1e-5\ngrid = 16x16\n[pme]\nk = 0\n[colonies]\nlayout = none\n");
  CHECK(c.kind == ProblemKind::Pme);
  CHECK(c.tol == 1e-5);
  CHECK(c.nx == 16);
  CHECK(c.pme.k_growth == 0.0);
  const RunConfig d = parse_config("[run]\ntol = 1e-5\n", std::string("qs-sweep"));
  CHECK(d.kind == ProblemKind::Qs);
  const RunConfig e = parse_config(
      "[colonies]\nlayout = explicit\nlist = 0.2 0 0.1 0.5; 0.8 0 0.1 0.5\n[sweep]\nkappas = 3, 4\nparallel = true\n");
  CHECK(e.colonies.resolve(1.0).size() == 2);
  CHECK(e.sweep.kappas == std::vector<int>{3, 4});
  CHECK(e.sweep.parallel);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[run]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nowhere]\ntol = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\ntol = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\ntol = 2\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\ngrid = 16x8\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\ntableau = euler\n").validate(), ParameterError);
  CHECK_THROWS_AS(parse_config("[biofilm]\nalpha = 0.5\n").validate(), ParameterError);
  CHECK_THROWS_AS(parse_config("[run]\nt_end = -1\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_grid_size("12"), ConfigError);
  CHECK_THROWS_AS(parse_grid_size("0x4"), ConfigError);
  CHECK(parse_grid_size("32x16") == std::pair{32, 16});
  CHECK_THROWS_AS(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST_CASE("overrides and output directory precedence") {
  RunConfig c = preset_config("biofilm-6colony");
  c.out_dir = "from-config";
  ::unsetenv(kOutDirEnv);
  Overrides o;
  o.tol = 1e-4;
  o.grid = "32x32";
  o.epsilon = 1e-3;
  o.t_end = 2.0;
  apply_overrides(c, o);
  CHECK(c.tol == 1e-4);
  CHECK(c.nx == 32);
  CHECK(c.epsilon == 1e-3);
  CHECK(c.t_end == 2.0);
  CHECK(c.out_dir == "from-config");
  ::setenv(kOutDirEnv, "from-env", 1);
  apply_overrides(c, {});
  CHECK(c.out_dir == "from-env");
  Overrides with_out;
  with_out.out_dir = "from-flag";
  apply_overrides(c, with_out);
  CHECK(c.out_dir == "from-flag");
  ::unsetenv(kOutDirEnv);
}

TEST_CASE("config hash ignores the output directory") {
  RunConfig a = preset_config("biofilm-6colony");
  RunConfig b = a;
  b.out_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  b.tol = 1e-6;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("snapshot csv round-trips exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const Grid g(6, 4, 1.5, 1.0);
  Snapshot s{0.25, 3, {"U", "C"}, {}};
  for (int k = 0; k < 2; ++k) {
    Field f(g);
    for (double& v : f.values()) v = d(rng) * std::pow(10.0, d(rng) * 30);
    s.fields.push_back(f);
  }
  s.fields[0].values()[0] = 0.1 + 0.2;
  s.fields[0].values()[1] = 5e-324;
  std::stringstream ss;
  write_snapshot_csv(ss, s);
  const std::string text = ss.str();
  CHECK(text.rfind("i,j,x,y,U,C\n", 0) == 0);
  const Snapshot back = read_snapshot_csv(ss);
  CHECK(back.species == s.species);
  REQUIRE(back.fields.size() == 2);
  CHECK(back.fields[0].grid().nx() == 6);
  CHECK(back.fields[0].grid().ny() == 4);
  CHECK(back.fields[0].grid().length() == doctest::Approx(1.5));
  for (int k = 0; k < 2; ++k)
    for (std::size_t p = 0; p < g.cell_count(); ++p) CHECK(back.fields[k].values()[p] == s.fields[k].values()[p]);

  std::stringstream bad("i,j,x,y,U\n1,1,0.5,0.5\n");
  CHECK_THROWS_AS(read_snapshot_csv(bad), ConfigError);
}

TEST_CASE("vtk and observables writers") {
  const Grid g(3, 2, 1.5, 1.0);
  Snapshot s{0.0, 0, {"U"}, {Field(g, 0.5)}};
  std::stringstream vtk;
  write_snapshot_vtk(vtk, s);
  const std::string v = vtk.str();
  CHECK(v.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(v.find("DIMENSIONS 4 3 1") != std::string::npos);
  CHECK(v.find("CELL_DATA 6") != std::string::npos);
  CHECK(v.find("SCALARS U double") != std::string::npos);

  ObservablesTable t;
  t.add("qs-sweep", "L", 1.5, "T1", 9.5);
  t.add("qs-sweep", "L", 1.5, "T2", std::nullopt);
  std::stringstream csv;
  t.write_csv(csv);
  CHECK(csv.str() == "experiment,key,key_value,name,value,censored\nqs-sweep,L,1.5,T1,9.5,0\nqs-sweep,L,1.5,T2,,1\n");
}

TEST_CASE("run command writes its artifacts") {
  const fs::path dir = scratch_dir("run");
  RunConfig c = preset_config("biofilm-6colony");
  c.nx = c.ny = 16;
  c.t_end = 0.3;
  c.snapshot_interval = 0.1;
  c.out_dir = dir;
  c.vtk = true;
  std::ostringstream log;
  REQUIRE(run_command(c, log) == kExitOk);
  for (const char* f : {"config.ini", "manifest.json", "trace.csv", "observables.csv", "snapshots.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "trace.csv").rfind("t,h,accepted,err_est,lin_iters\n", 0) == 0);
  const std::string manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"status\": \"ok\"") != std::string::npos);
  CHECK(manifest.find(c.hash()) != std::string::npos);
  CHECK(load_config(dir / "config.ini").hash() == c.hash());
  std::size_t snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "snapshots")) snaps += e.path().extension() == ".csv";
  CHECK(snaps == 4);
  std::ifstream first(dir / "snapshots" / "snapshot_000000.csv");
  const Snapshot s0 = read_snapshot_csv(first);
  const Problem p = c.problem_def().build(c.grid());
  for (std::size_t i = 0; i < c.grid().cell_count(); ++i) CHECK(s0.fields[0].values()[i] == p.initial_state[i]);
  CHECK(fs::exists(dir / "snapshots" / "snapshot_000000.vtk"));
}

TEST_CASE("aborted run reports partial results") {
  const fs::path dir = scratch_dir("abort");
  RunConfig c = preset_config("biofilm-6colony");
  c.nx = c.ny = 8;
  c.t_end = 1.0;
  c.max_steps = 4;
  c.out_dir = dir;
  std::ostringstream log;
  CHECK(run_command(c, log) == kExitAbort);
  CHECK(slurp(dir / "manifest.json").find("\"status\": \"aborted\"") != std::string::npos);
  CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("parallel and sequential sweeps agree") {
  RunConfig c = preset_config("pme-barenblatt");
  c.sweep.grids = {8, 16};
  const auto seq = barenblatt_study(c);
  c.sweep.parallel = true;
  const auto par = barenblatt_study(c);
  REQUIRE(seq.size() == par.size());
  for (std::size_t k = 0; k < seq.size(); ++k) CHECK(seq[k].error == par[k].error);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch_dir("exit");
  CHECK(run_tool("run --grid 8x8 --t-end 0.05 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "manifest.json"));
  CHECK(run_tool("run --grid 8x8 --t-end 0.05", "BIOSIM_OUT_DIR=" + (dir / "env").string()) == 0);
  CHECK(fs::exists(dir / "env" / "manifest.json"));
  CHECK(run_tool("run --tol 5 --out " + (dir / "x").string()) == 2);
  CHECK(run_tool("run --grid 8x4 --out " + (dir / "x").string()) == 2);
  CHECK(run_tool("run --preset unknown --out " + (dir / "x").string()) == 2);
  CHECK(run_tool("frobnicate") == 2);
  CHECK_FALSE(fs::exists(dir / "x"));

  std::ofstream(dir / "bad.ini") << "[run]\nnot_a_key = 3\n";
  CHECK(run_tool("run --config " + (dir / "bad.ini").string()) == 2);
  std::ofstream(dir / "abort.ini") << "[run]\ngrid = 8x8\nt_end = 1\nmax_steps = 3\n";
  CHECK(run_tool("run --config " + (dir / "abort.ini").string() + " --out " + (dir / "ab").string()) == 3);
  CHECK(run_tool("barenblatt --grid 8x8 --out " + (dir / "x2").string(), "") == 0);
}
