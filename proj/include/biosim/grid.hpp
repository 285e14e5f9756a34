#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace biosim {

/// Uniform cell-centered N x M grid on [0,L] x [0,H] with square cells.
///
/// Cell indices (i, j) are 1-based, i along x and j along y. Cells are
/// ordered lexicographically with j running fastest, so neighbours in y are
/// one apart and neighbours in x are M apart. For square grids the flat index
/// p = (i-1)*M + j coincides with (i-1)*N + j.
class Grid {
 public:
  /// Throws ParameterError unless N, M >= 2 and L/N == H/M (1e-12 relative).
  Grid(int nx, int ny, double length, double height);

  /// Unit-spaced square domain of side `side` with n x n cells.
  static Grid square(int n, double side = 1.0) { return Grid(n, n, side, side); }

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double length() const noexcept { return length_; }
  double height() const noexcept { return height_; }
  double dx() const noexcept { return dx_; }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }

  /// 1-based flat index of cell (i, j). Throws IndexError when out of range.
  std::size_t order(int i, int j) const;
  /// Inverse of order(). Throws IndexError when p is outside 1..N*M.
  std::pair<int, int> inverse_order(std::size_t p) const;

  /// 0-based storage offset; no range checks.
  std::size_t offset(int i, int j) const noexcept {
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(ny_) +
           static_cast<std::size_t>(j - 1);
  }

  std::pair<double, double> cell_center(int i, int j) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_;
  int ny_;
  double length_;
  double height_;
  double dx_;
};

/// Cell-centered values of one species.
class Field {
 public:
  explicit Field(Grid grid, double fill = 0.0);
  Field(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) noexcept { return values_[grid_.offset(i, j)]; }
  double operator()(int i, int j) const noexcept { return values_[grid_.offset(i, j)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Disc-shaped inoculation site; discs centred on the substratum give
/// semi-spherical colonies.
struct Colony {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.1;
  double amplitude = 0.9;
};

/// Field equal to the colony amplitude at cell centres strictly inside a
/// disc; overlapping discs take the larger amplitude.
/// Throws ParameterError for amplitude outside [0,1) or radius <= 0.
Field initialize_colonies(const Grid& grid, std::span<const Colony> colonies);

}  // namespace biosim
