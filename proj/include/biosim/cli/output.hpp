#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biosim/grid.hpp"

namespace biosim::cli {

/// Per-species fields on one grid at one time.
struct Snapshot {
  double t = 0.0;
  std::size_t step = 0;
  std::vector<std::string> species;
  std::vector<Field> fields;
};

/// Header `i,j,x,y,<species...>`, one row per cell by flat index, values
/// printed with 17 significant digits so that reading gives the same bits.
void write_snapshot_csv(std::ostream& os, const Snapshot& snap);
/// Inverse of write_snapshot_csv; the grid is reconstructed from the cell
/// indices and centres. t and step are not part of the file.
Snapshot read_snapshot_csv(std::istream& is);

/// Legacy VTK STRUCTURED_POINTS with one CELL_DATA scalar per species.
void write_snapshot_vtk(std::ostream& os, const Snapshot& snap);

/// Long-format observables table keyed by (experiment, key, key value).
struct ObservableRow {
  std::string experiment;
  std::string key;         ///< "t", "L", "kappa", "eps" or "N"
  double key_value;
  std::string name;
  std::optional<double> value;  ///< empty: censored (event not reached)
};

class ObservablesTable {
 public:
  void add(std::string experiment, std::string key, double key_value, std::string name,
           std::optional<double> value);
  const std::vector<ObservableRow>& rows() const noexcept { return rows_; }
  /// Columns experiment,key,key_value,name,value,censored.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<ObservableRow> rows_;
};

/// Writes text to path, creating the parent directory.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace biosim::cli
