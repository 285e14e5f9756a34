#include "biosim/cli/output.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "biosim/cli/config.hpp"

namespace biosim::cli {

namespace {

class PrecisionGuard {
 public:
  PrecisionGuard(std::ostream& os, int digits) : os_(os), old_(os.precision(digits)) {}
  ~PrecisionGuard() { os_.precision(old_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  std::ostream& os_;
  std::streamsize old_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("snapshot: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_snapshot_csv(std::ostream& os, const Snapshot& snap) {
  if (snap.fields.empty() || snap.fields.size() != snap.species.size()) {
    throw ParameterError("snapshot: one field per species required");
  }
  const Grid& g = snap.fields.front().grid();
  PrecisionGuard guard(os, std::numeric_limits<double>::max_digits10);
  os << "i,j,x,y";
  for (const std::string& s : snap.species) os << ',' << s;
  os << '\n';
  for (int i = 1; i <= g.nx(); ++i) {
    for (int j = 1; j <= g.ny(); ++j) {
      const auto [x, y] = g.cell_center(i, j);
      os << i << ',' << j << ',' << x << ',' << y;
      for (const Field& f : snap.fields) os << ',' << f(i, j);
      os << '\n';
    }
  }
}

Snapshot read_snapshot_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("snapshot: empty file");
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "i" || header[1] != "j" || header[2] != "x" || header[3] != "y") {
    throw ConfigError("snapshot: header must start with i,j,x,y and name at least one species");
  }
  Snapshot snap;
  snap.species.assign(header.begin() + 4, header.end());
  const std::size_t ns = snap.species.size();

  std::vector<std::vector<double>> columns(ns);
  int nx = 0;
  int ny = 0;
  double x_last = 0.0;
  double y_last = 0.0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != ns + 4) throw ConfigError("snapshot: wrong column count in '" + line + "'");
    const int i = static_cast<int>(to_double(cells[0]));
    const int j = static_cast<int>(to_double(cells[1]));
    nx = std::max(nx, i);
    ny = std::max(ny, j);
    x_last = to_double(cells[2]);
    y_last = to_double(cells[3]);
    for (std::size_t s = 0; s < ns; ++s) columns[s].push_back(to_double(cells[s + 4]));
  }
  if (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) != columns.front().size()) {
    throw ConfigError("snapshot: rows do not cover an N x M grid");
  }
  // last row is cell (N, M) with centre ((N-1/2) dx, (M-1/2) dx)
  const double dx = x_last / (nx - 0.5);
  const double dy = y_last / (ny - 0.5);
  if (std::abs(dx - dy) > 1e-9 * dx) throw ConfigError("snapshot: cells are not square");
  const Grid grid(nx, ny, dx * nx, dx * ny);
  for (std::size_t s = 0; s < ns; ++s) snap.fields.emplace_back(grid, std::move(columns[s]));
  return snap;
}

void write_snapshot_vtk(std::ostream& os, const Snapshot& snap) {
  if (snap.fields.empty()) throw ParameterError("snapshot: no fields");
  const Grid& g = snap.fields.front().grid();
  PrecisionGuard guard(os, std::numeric_limits<double>::max_digits10);
  os << "# vtk DataFile Version 3.0\n"
     << "biosim t=" << snap.t << " step=" << snap.step << "\n"
     << "ASCII\nDATASET STRUCTURED_POINTS\n"
     << "DIMENSIONS " << g.nx() + 1 << ' ' << g.ny() + 1 << " 1\n"
     << "ORIGIN 0 0 0\n"
     << "SPACING " << g.dx() << ' ' << g.dx() << " 1\n"
     << "CELL_DATA " << g.cell_count() << '\n';
  for (std::size_t s = 0; s < snap.fields.size(); ++s) {
    os << "SCALARS " << snap.species[s] << " double 1\nLOOKUP_TABLE default\n";
    // VTK orders cells with x fastest
    for (int j = 1; j <= g.ny(); ++j) {
      for (int i = 1; i <= g.nx(); ++i) os << snap.fields[s](i, j) << '\n';
    }
  }
}

void ObservablesTable::add(std::string experiment, std::string key, double key_value, std::string name,
                           std::optional<double> value) {
  rows_.push_back({std::move(experiment), std::move(key), key_value, std::move(name), value});
}

void ObservablesTable::write_csv(std::ostream& os) const {
  PrecisionGuard guard(os, std::numeric_limits<double>::max_digits10);
  os << "experiment,key,key_value,name,value,censored\n";
  for (const ObservableRow& r : rows_) {
    os << r.experiment << ',' << r.key << ',' << r.key_value << ',' << r.name << ',';
    if (r.value) os << *r.value;
    os << ',' << (r.value ? 0 : 1) << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace biosim::cli
