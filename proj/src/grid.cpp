#include "biosim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biosim/errors.hpp"

namespace biosim {

Grid::Grid(int nx, int ny, double length, double height)
    : nx_(nx), ny_(ny), length_(length), height_(height), dx_(0.0) {
  if (nx < 2 || ny < 2) {
    throw ParameterError("grid needs at least 2 cells per direction, got " + std::to_string(nx) +
                         "x" + std::to_string(ny));
  }
  if (!(length > 0.0) || !(height > 0.0) || !std::isfinite(length) || !std::isfinite(height)) {
    throw ParameterError("grid extents must be positive and finite");
  }
  const double dx_x = length / nx;
  const double dx_y = height / ny;
  if (std::abs(dx_x - dx_y) > 1e-12 * std::max(dx_x, dx_y)) {
    throw ParameterError("grid cells must be square: L/N = " + std::to_string(dx_x) +
                         " but H/M = " + std::to_string(dx_y));
  }
  dx_ = dx_x;
}

std::size_t Grid::order(int i, int j) const {
  if (i < 1 || i > nx_ || j < 1 || j > ny_) {
    throw IndexError("cell (" + std::to_string(i) + "," + std::to_string(j) +
                     ") outside grid " + std::to_string(nx_) + "x" + std::to_string(ny_));
  }
  return offset(i, j) + 1;
}

std::pair<int, int> Grid::inverse_order(std::size_t p) const {
  if (p < 1 || p > cell_count()) {
    throw IndexError("flat index " + std::to_string(p) + " outside 1.." +
                     std::to_string(cell_count()));
  }
  const std::size_t q = p - 1;
  const auto m = static_cast<std::size_t>(ny_);
  return {static_cast<int>(q / m) + 1, static_cast<int>(q % m) + 1};
}

std::pair<double, double> Grid::cell_center(int i, int j) const {
  static_cast<void>(order(i, j));
  return {(i - 0.5) * dx_, (j - 0.5) * dx_};
}

Field::Field(Grid grid, double fill) : grid_(grid), values_(grid.cell_count(), fill) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count()) {
    throw ParameterError("field has " + std::to_string(values_.size()) + " values, grid has " +
                         std::to_string(grid_.cell_count()) + " cells");
  }
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field initialize_colonies(const Grid& grid, std::span<const Colony> colonies) {
  for (const Colony& c : colonies) {
    if (!(c.amplitude >= 0.0 && c.amplitude < 1.0)) {
      throw ParameterError("colony amplitude must lie in [0,1), got " + std::to_string(c.amplitude));
    }
    if (!(c.radius > 0.0)) {
      throw ParameterError("colony radius must be positive");
    }
  }
  Field field(grid);
  for (int i = 1; i <= grid.nx(); ++i) {
    for (int j = 1; j <= grid.ny(); ++j) {
      const double x = (i - 0.5) * grid.dx();
      const double y = (j - 0.5) * grid.dx();
      double value = 0.0;
      for (const Colony& c : colonies) {
        const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
        if (r2 < c.radius * c.radius) value = std::max(value, c.amplitude);
      }
      field(i, j) = value;
    }
  }
  return field;
}

}  // namespace biosim
