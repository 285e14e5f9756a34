#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "biosim/grid.hpp"

namespace biosim {

/// ||A - B||_2 / (N*M). Throws ParameterError when the grids differ.
double scaled_l2_error(const Field& a, const Field& b);

/// 2x2 block mean of a field on a grid with twice the cells in each direction.
Field restrict_by_averaging(const Field& fine);

/// ||restrict(fine) - coarse||_2 / (N_c*M_c); fine must exactly double coarse.
double refinement_error(const Field& fine, const Field& coarse);

/// Top-face height of the highest cell with U >= threshold in the column
/// whose centre is nearest x_line; 0 if the column holds none.
double interface_height(const Field& u, double x_line, double threshold = 1e-3);

/// Midpoint quadrature dx^2 * sum(U).
double total_biomass(const Field& u);

/// Crossing times of the signal threshold and the biomass at each crossing.
/// Index 0..3 hold T1..T4.
struct QsEventTimes {
  std::array<std::optional<double>, 4> t;
  std::array<std::optional<double>, 4> mass;

  bool complete() const noexcept;
};

/// Incremental detector fed with accepted states.
class QsEventTracker {
 public:
  QsEventTracker(Grid grid, double threshold = 1.0, double biofilm_threshold = 1e-3);

  /// Records the state at time t. Returns true once all four events are set.
  bool observe(double t, std::span<const double> u, std::span<const double> s);

  const QsEventTimes& events() const noexcept { return events_; }
  double threshold() const noexcept { return threshold_; }
  double biofilm_threshold() const noexcept { return biofilm_threshold_; }

 private:
  Grid grid_;
  double threshold_;
  double biofilm_threshold_;
  QsEventTimes events_;
};

struct QsSample {
  double t;
  std::vector<double> u;
  std::vector<double> s;
};

QsEventTimes detect_qs_events(const Grid& grid, std::span<const QsSample> samples, double threshold = 1.0,
                              double biofilm_threshold = 1e-3);

/// Least-squares a*L^2 + b*L + c.
struct QuadFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double rms = 0.0;

  double operator()(double x) const noexcept { return (a * x + b) * x + c; }
};

/// Solves the normal equations. Throws ParameterError on fewer than three
/// distinct abscissae.
QuadFit quad_fit(std::span<const std::pair<double, double>> points);

}  // namespace biosim
