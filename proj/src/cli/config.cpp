#include "biosim/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "biosim/integrator.hpp"

namespace biosim::cli {

namespace pt = boost::property_tree;

namespace {

std::string layout_name(ColonyLayout l) {
  switch (l) {
    case ColonyLayout::None: return "none";
    case ColonyLayout::SixColony: return "six-colony";
    case ColonyLayout::Central: return "central";
    case ColonyLayout::Explicit: return "explicit";
  }
  return "none";
}

ColonyLayout parse_layout(const std::string& s) {
  if (s == "none") return ColonyLayout::None;
  if (s == "six-colony") return ColonyLayout::SixColony;
  if (s == "central") return ColonyLayout::Central;
  if (s == "explicit") return ColonyLayout::Explicit;
  throw ConfigError("colonies.layout: unknown layout '" + s + "'");
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "biofilm") return ProblemKind::Biofilm;
  if (s == "pme") return ProblemKind::Pme;
  if (s == "qs") return ProblemKind::Qs;
  throw ConfigError("run.problem: unknown problem '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& text, F parse_one) {
  std::vector<T> out;
  for (const std::string& item : split(text, ',')) out.push_back(parse_one(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) os << ", ";
    if constexpr (std::is_floating_point_v<T>) {
      os << fmt(v[k]);
    } else {
      os << v[k];
    }
  }
  return os.str();
}

std::vector<Colony> parse_colony_list(const std::string& text) {
  std::vector<Colony> out;
  for (const std::string& entry : split(text, ';')) {
    std::istringstream is(entry);
    Colony c;
    if (!(is >> c.x >> c.y >> c.radius >> c.amplitude)) {
      throw ConfigError("colonies.list: expected 'x y radius amplitude' entries separated by ';'");
    }
    std::string rest;
    if (is >> rest) throw ConfigError("colonies.list: trailing text in '" + entry + "'");
    out.push_back(c);
  }
  return out;
}

// Applies every key of the tree; returns false for keys it does not know.
class Applier {
 public:
  explicit Applier(RunConfig& c) : c_(c) {}

  void apply(const std::string& key, const std::string& v) {
    static const std::map<std::string, void (*)(RunConfig&, const std::string&, const std::string&)> table = {
        {"run.problem", [](RunConfig& c, const std::string&, const std::string& v) { c.kind = parse_kind(trim(v)); }},
        {"run.tableau", [](RunConfig& c, const std::string&, const std::string& v) { c.tableau = trim(v); }},
        {"run.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.tol = parse_double(k, v); }},
        {"run.eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.epsilon = parse_double(k, v); }},
        {"run.t_start",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.t_start = parse_double(k, v); }},
        {"run.t_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_end = parse_double(k, v); }},
        {"run.h0", [](RunConfig& c, const std::string& k, const std::string& v) { c.h0 = parse_double(k, v); }},
        {"run.max_steps",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           const double n = parse_double(k, v);
           if (!(n >= 0.0) || n != std::floor(n)) throw ConfigError(k + ": must be a nonnegative integer");
           c.max_steps = static_cast<std::size_t>(n);
         }},
        {"run.grid",
         [](RunConfig& c, const std::string&, const std::string& v) { std::tie(c.nx, c.ny) = parse_grid_size(v); }},
        {"run.enforce_bounds",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.enforce_bounds = parse_bool(k, v); }},
        {"run.snapshot_interval",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.snapshot_interval = parse_double(k, v); }},
        {"run.stop_on_induction",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.stop_on_induction = parse_bool(k, v); }},
        {"run.deterministic",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
        {"domain.length",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.length = parse_double(k, v); }},
        {"domain.height",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.height = parse_double(k, v); }},
        {"biofilm.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.k = parse_double(k, v); }},
        {"biofilm.K_U",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.K_U = parse_double(k, v); }},
        {"biofilm.nu_U",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.nu_U = parse_double(k, v); }},
        {"biofilm.d_c",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.d_c = parse_double(k, v); }},
        {"biofilm.delta",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.delta = parse_double(k, v); }},
        {"biofilm.alpha",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.alpha = parse_double(k, v); }},
        {"biofilm.beta",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.beta = parse_double(k, v); }},
        {"biofilm.lambda",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm.lambda = parse_double(k, v); }},
        {"biofilm.c0", [](RunConfig& c, const std::string& k, const std::string& v) { c.c0 = parse_double(k, v); }},
        {"qs.d_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.qs.d_s = parse_double(k, v); }},
        {"qs.alpha_s",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.qs.alpha_s = parse_double(k, v); }},
        {"qs.beta_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.qs.beta_s = parse_double(k, v); }},
        {"qs.psi", [](RunConfig& c, const std::string& k, const std::string& v) { c.qs.psi = parse_double(k, v); }},
        {"qs.m_hill", [](RunConfig& c, const std::string& k, const std::string& v) { c.qs.m_hill = parse_double(k, v); }},
        {"qs.signal_threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.signal_threshold = parse_double(k, v); }},
        {"qs.biofilm_threshold",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.biofilm_threshold = parse_double(k, v); }},
        {"pme.m", [](RunConfig& c, const std::string& k, const std::string& v) { c.pme.m_exp = parse_double(k, v); }},
        {"pme.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.pme.k_growth = parse_double(k, v); }},
        {"pme.t0", [](RunConfig& c, const std::string& k, const std::string& v) { c.pme.t0 = parse_double(k, v); }},
        {"pme.r0", [](RunConfig& c, const std::string& k, const std::string& v) { c.pme.r0 = parse_double(k, v); }},
        {"colonies.layout",
         [](RunConfig& c, const std::string&, const std::string& v) { c.colonies.layout = parse_layout(trim(v)); }},
        {"colonies.radius",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.colonies.radius = parse_double(k, v); }},
        {"colonies.amplitude",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.colonies.amplitude = parse_double(k, v); }},
        {"colonies.list",
         [](RunConfig& c, const std::string&, const std::string& v) {
           c.colonies.explicit_colonies = parse_colony_list(v);
         }},
        {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); }},
        {"output.vtk", [](RunConfig& c, const std::string& k, const std::string& v) { c.vtk = parse_bool(k, v); }},
        {"sweep.kappas",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.sweep.kappas = parse_list<int>(k, v, parse_int);
         }},
        {"sweep.times",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.sweep.times = parse_list<double>(k, v, parse_double);
         }},
        {"sweep.eps",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.sweep.eps_list = parse_list<double>(k, v, parse_double);
         }},
        {"sweep.grids",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.sweep.grids = parse_list<int>(k, v, parse_int);
         }},
        {"sweep.lengths",
         [](RunConfig& c, const std::string& k, const std::string& v) {
           c.sweep.lengths = parse_list<double>(k, v, parse_double);
         }},
        {"sweep.cells_per_unit",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.cells_per_unit = parse_int(k, v); }},
        {"sweep.parallel",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep.parallel = parse_bool(k, v); }},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c_, key, v);
  }

 private:
  RunConfig& c_;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<Colony> ColonySpec::resolve(double length) const {
  switch (layout) {
    case ColonyLayout::None: return {};
    case ColonyLayout::SixColony: return six_colony_layout(length, radius, amplitude);
    case ColonyLayout::Central: return {central_colony(length, radius, amplitude)};
    case ColonyLayout::Explicit: return explicit_colonies;
  }
  return {};
}

std::pair<int, int> parse_grid_size(const std::string& text) {
  const std::string t = trim(text);
  const auto x = t.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("grid: expected NxM, got '" + text + "'");
  const int n = parse_int("grid", t.substr(0, x));
  const int m = parse_int("grid", t.substr(x + 1));
  if (n < 2 || m < 2) throw ConfigError("grid: need at least 2 cells per direction, got '" + text + "'");
  return {n, m};
}

void RunConfig::validate() const {
  if (nx < 2 || ny < 2) throw ConfigError("run.grid: at least 2 cells per direction");
  if (!(length > 0.0) || !(height > 0.0)) throw ConfigError("domain: length and height must be positive");
  if (std::abs(length / nx - height / ny) > 1e-12 * std::max(length / nx, height / ny)) {
    throw ConfigError("run.grid: cells must be square (length/N == height/M)");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("run.eps: must lie in [0, 1)");
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("run.tol: must lie in (0, 1)");
  if (!(t_end > t_start)) throw ConfigError("run.t_end: must exceed the start time");
  if (!(h0 > 0.0)) throw ConfigError("run.h0: must be positive");
  if (!(c0 >= 0.0 && c0 <= 1.0)) throw ConfigError("biofilm.c0: must lie in [0, 1]");
  if (!(signal_threshold > 0.0)) throw ConfigError("qs.signal_threshold: must be positive");
  if (!(biofilm_threshold > 0.0)) throw ConfigError("qs.biofilm_threshold: must be positive");
  try {
    row_tableau(tableau);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("run.tableau: ") + e.what());
  }
  try {
    switch (kind) {
      case ProblemKind::Biofilm: biofilm.validate(); break;
      case ProblemKind::Qs: std::get<QsParams>(problem_def().params).validate(); break;
      case ProblemKind::Pme:
        pme.validate();
        if (t_start < pme.t0) throw ConfigError("run.t_start: PME runs start at or after pme.t0");
        break;
    }
    for (const Colony& c : colonies.resolve(length)) {
      if (!(c.radius > 0.0) || !(c.amplitude >= 0.0 && c.amplitude < 1.0)) {
        throw ConfigError("colonies: radius must be positive and amplitude in [0, 1)");
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (kind == ProblemKind::Qs && colonies.resolve(length).empty()) {
    throw ConfigError("colonies: the qs problem needs one colony");
  }
  for (int k : sweep.kappas) {
    if (k < 2 || k > 11) throw ConfigError("sweep.kappas: values must lie in 2..11");
  }
  for (int n : sweep.grids) {
    if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("sweep.grids: values must be powers of two");
  }
  for (std::size_t k = 1; k < sweep.eps_list.size(); ++k) {
    if (!(sweep.eps_list[k] < sweep.eps_list[k - 1])) throw ConfigError("sweep.eps: list must be descending");
  }
  for (double e : sweep.eps_list) {
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("sweep.eps: values must lie in [0, 1)");
  }
  for (double l : sweep.lengths) {
    if (!(l > 0.0)) throw ConfigError("sweep.lengths: values must be positive");
  }
  if (sweep.cells_per_unit < 2) throw ConfigError("sweep.cells_per_unit: at least 2");
}

Grid RunConfig::grid() const { return Grid(nx, ny, length, height); }

ProblemDef RunConfig::problem_def() const {
  ProblemDef def;
  def.kind = kind;
  def.regularization = Regularization(epsilon);
  def.colonies = colonies.resolve(length);
  def.c0 = c0;
  switch (kind) {
    case ProblemKind::Biofilm: def.params = biofilm; break;
    case ProblemKind::Pme: def.params = pme; break;
    case ProblemKind::Qs: {
      QsParams q = qs;
      q.base = biofilm;
      def.params = q;
      break;
    }
  }
  return def;
}

std::string RunConfig::to_ini() const {
  std::ostringstream os;
  os << "[run]\n"
     << "problem = " << problem_kind_name(kind) << "\n"
     << "tableau = " << tableau << "\n"
     << "tol = " << fmt(tol) << "\n"
     << "eps = " << fmt(epsilon) << "\n"
     << "t_start = " << fmt(t_start) << "\n"
     << "t_end = " << fmt(t_end) << "\n"
     << "h0 = " << fmt(h0) << "\n"
     << "max_steps = " << max_steps << "\n"
     << "grid = " << nx << "x" << ny << "\n"
     << "enforce_bounds = " << (enforce_bounds ? "true" : "false") << "\n"
     << "snapshot_interval = " << fmt(snapshot_interval) << "\n"
     << "stop_on_induction = " << (stop_on_induction ? "true" : "false") << "\n"
     << "deterministic = " << (deterministic ? "true" : "false") << "\n\n"
     << "[domain]\nlength = " << fmt(length) << "\nheight = " << fmt(height) << "\n\n"
     << "[biofilm]\n"
     << "k = " << fmt(biofilm.k) << "\nK_U = " << fmt(biofilm.K_U) << "\nnu_U = " << fmt(biofilm.nu_U)
     << "\nd_c = " << fmt(biofilm.d_c) << "\ndelta = " << fmt(biofilm.delta) << "\nalpha = " << fmt(biofilm.alpha)
     << "\nbeta = " << fmt(biofilm.beta) << "\nlambda = " << fmt(biofilm.lambda) << "\nc0 = " << fmt(c0) << "\n\n"
     << "[qs]\n"
     << "d_s = " << fmt(qs.d_s) << "\nalpha_s = " << fmt(qs.alpha_s) << "\nbeta_s = " << fmt(qs.beta_s)
     << "\npsi = " << fmt(qs.psi) << "\nm_hill = " << fmt(qs.m_hill) << "\nsignal_threshold = "
     << fmt(signal_threshold) << "\nbiofilm_threshold = " << fmt(biofilm_threshold) << "\n\n"
     << "[pme]\n"
     << "m = " << fmt(pme.m_exp) << "\nk = " << fmt(pme.k_growth) << "\nt0 = " << fmt(pme.t0)
     << "\nr0 = " << fmt(pme.r0) << "\n\n"
     << "[colonies]\nlayout = " << layout_name(colonies.layout) << "\nradius = " << fmt(colonies.radius)
     << "\namplitude = " << fmt(colonies.amplitude) << "\n";
  if (!colonies.explicit_colonies.empty()) {
    os << "list = ";
    for (std::size_t k = 0; k < colonies.explicit_colonies.size(); ++k) {
      const Colony& c = colonies.explicit_colonies[k];
      os << (k ? "; " : "") << fmt(c.x) << ' ' << fmt(c.y) << ' ' << fmt(c.radius) << ' ' << fmt(c.amplitude);
    }
    os << "\n";
  }
  os << "\n[output]\ndir = " << out_dir.string() << "\nvtk = " << (vtk ? "true" : "false") << "\n\n"
     << "[sweep]\nkappas = " << join(sweep.kappas) << "\ntimes = " << join(sweep.times)
     << "\neps = " << join(sweep.eps_list) << "\ngrids = " << join(sweep.grids) << "\nlengths = "
     << join(sweep.lengths) << "\ncells_per_unit = " << sweep.cells_per_unit
     << "\nparallel = " << (sweep.parallel ? "true" : "false") << "\n";
  return os.str();
}

std::string RunConfig::hash() const {
  // the output directory does not change results
  RunConfig copy = *this;
  copy.out_dir.clear();
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(copy.to_ini());
  return os.str();
}

std::vector<std::string> preset_names() {
  return {"biofilm-6colony", "biofilm-nutrient-limited", "pme-barenblatt", "qs-sweep"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "biofilm-6colony") return c;
  if (name == "biofilm-nutrient-limited") {
    c.biofilm.K_U = 0.65;
    c.biofilm.d_c = 3.3;
    return c;
  }
  if (name == "pme-barenblatt") {
    c.kind = ProblemKind::Pme;
    c.colonies.layout = ColonyLayout::None;
    c.t_start = c.pme.t0;
    c.t_end = 1.0;
    c.snapshot_interval = 0.1;
    c.enforce_bounds = false;
    return c;
  }
  if (name == "qs-sweep") {
    c.kind = ProblemKind::Qs;
    c.biofilm.lambda = 5.0;
    c.colonies = {ColonyLayout::Central, 0.03, 0.01, {}};
    c.t_end = 40.0;
    c.stop_on_induction = true;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig parse_config(const std::string& text, const std::optional<std::string>& preset_override) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::string preset = "biofilm-6colony";
  if (const auto p = tree.get_optional<std::string>("run.preset")) preset = trim(*p);
  if (preset_override) preset = *preset_override;
  RunConfig config = preset_config(preset);
  Applier applier(config);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (section == "run" && key == "preset") continue;
      applier.apply(section + "." + key, value.data());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), preset_override);
}

void apply_overrides(RunConfig& config, const Overrides& o) {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') config.out_dir = env;
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (o.tol) config.tol = *o.tol;
  if (o.epsilon) config.epsilon = *o.epsilon;
  if (o.grid) std::tie(config.nx, config.ny) = parse_grid_size(*o.grid);
  if (o.t_end) config.t_end = *o.t_end;
  if (o.vtk) config.vtk = true;
}

}  // namespace biosim::cli
