#include "biosim/observables.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "biosim/errors.hpp"

namespace biosim {

double scaled_l2_error(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ParameterError("scaled_l2_error: grid mismatch");
  double sum = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t p = 0; p < av.size(); ++p) {
    const double d = av[p] - bv[p];
    sum += d * d;
  }
  return std::sqrt(sum) / static_cast<double>(a.grid().cell_count());
}

Field restrict_by_averaging(const Field& fine) {
  const Grid& g = fine.grid();
  if (g.nx() % 2 != 0 || g.ny() % 2 != 0 || g.nx() < 4 || g.ny() < 4) {
    throw ParameterError("restrict_by_averaging: grid cannot be halved");
  }
  Grid coarse(g.nx() / 2, g.ny() / 2, g.length(), g.height());
  Field out(coarse);
  for (int i = 1; i <= coarse.nx(); ++i) {
    for (int j = 1; j <= coarse.ny(); ++j) {
      out(i, j) = 0.25 * (fine(2 * i - 1, 2 * j - 1) + fine(2 * i, 2 * j - 1) + fine(2 * i - 1, 2 * j) +
                          fine(2 * i, 2 * j));
    }
  }
  return out;
}

double refinement_error(const Field& fine, const Field& coarse) {
  const Grid& f = fine.grid();
  const Grid& c = coarse.grid();
  if (f.nx() != 2 * c.nx() || f.ny() != 2 * c.ny() || f.length() != c.length() || f.height() != c.height()) {
    throw ParameterError("refinement_error: grids are not nested");
  }
  return scaled_l2_error(restrict_by_averaging(fine), coarse);
}

double interface_height(const Field& u, double x_line, double threshold) {
  const Grid& g = u.grid();
  int i = static_cast<int>(std::floor(x_line / g.dx())) + 1;
  i = std::clamp(i, 1, g.nx());
  for (int j = g.ny(); j >= 1; --j) {
    if (u(i, j) >= threshold) return j * g.dx();
  }
  return 0.0;
}

double total_biomass(const Field& u) {
  double sum = 0.0;
  for (double v : u.values()) sum += v;
  return sum * u.grid().dx() * u.grid().dx();
}

bool QsEventTimes::complete() const noexcept {
  return std::all_of(t.begin(), t.end(), [](const auto& v) { return v.has_value(); });
}

QsEventTracker::QsEventTracker(Grid grid, double threshold, double biofilm_threshold)
    : grid_(std::move(grid)), threshold_(threshold), biofilm_threshold_(biofilm_threshold) {
  if (!(threshold > 0.0)) throw ParameterError("signal threshold must be positive");
  if (!(biofilm_threshold > 0.0)) throw ParameterError("biofilm threshold must be positive");
}

bool QsEventTracker::observe(double t, std::span<const double> u, std::span<const double> s) {
  const std::size_t n = grid_.cell_count();
  if (u.size() != n || s.size() != n) throw ParameterError("QsEventTracker: state size mismatch");

  double s_max = -INFINITY;
  double s_min = INFINITY;
  double s_max_biofilm = -INFINITY;
  double s_sum_biofilm = 0.0;
  std::size_t biofilm_cells = 0;
  double mass = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    s_max = std::max(s_max, s[p]);
    s_min = std::min(s_min, s[p]);
    mass += u[p];
    if (u[p] >= biofilm_threshold_) {
      ++biofilm_cells;
      s_sum_biofilm += s[p];
      s_max_biofilm = std::max(s_max_biofilm, s[p]);
    }
  }
  mass *= grid_.dx() * grid_.dx();

  const bool hit[4] = {
      s_max >= threshold_,
      biofilm_cells > 0 && s_sum_biofilm >= threshold_ * static_cast<double>(biofilm_cells),
      biofilm_cells > 0 && s_max_biofilm >= threshold_,
      s_min >= threshold_,
  };
  for (std::size_t k = 0; k < 4; ++k) {
    if (hit[k] && !events_.t[k]) {
      events_.t[k] = t;
      events_.mass[k] = mass;
    }
  }
  return events_.complete();
}

QsEventTimes detect_qs_events(const Grid& grid, std::span<const QsSample> samples, double threshold,
                              double biofilm_threshold) {
  QsEventTracker tracker(grid, threshold, biofilm_threshold);
  for (const QsSample& s : samples) {
    if (tracker.observe(s.t, s.u, s.s)) break;
  }
  return tracker.events();
}

QuadFit quad_fit(std::span<const std::pair<double, double>> points) {
  std::set<double> distinct;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw ParameterError("quad_fit: non-finite point");
    distinct.insert(x);
  }
  if (distinct.size() < 3) throw ParameterError("quad_fit: need at least three distinct abscissae");

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const auto& [x, y] : points) {
    const Eigen::Vector3d row(x * x, x, 1.0);
    normal += row * row.transpose();
    rhs += row * y;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (lu.rank() < 3) throw ParameterError("quad_fit: rank-deficient design");
  const Eigen::Vector3d coef = lu.solve(rhs);

  QuadFit fit{coef[0], coef[1], coef[2], 0.0};
  double sq = 0.0;
  for (const auto& [x, y] : points) {
    const double r = fit(x) - y;
    sq += r * r;
  }
  fit.rms = std::sqrt(sq / static_cast<double>(points.size()));
  return fit;
}

}  // namespace biosim
