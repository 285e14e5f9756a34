#include "biosim/fvm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biosim/errors.hpp"

namespace biosim {

BoundarySpec BoundarySpec::biofilm(double lambda) {
  BoundarySpec spec;
  spec.species.resize(2);
  spec.species[0][Edge::North] = EdgeCondition::dirichlet(0.0);
  spec.species[1][Edge::North] = EdgeCondition::robin(1.0, lambda);
  return spec;
}

BoundarySpec BoundarySpec::quorum_sensing(double lambda) {
  BoundarySpec spec;
  spec.species.resize(3);
  spec.species[1][Edge::North] = EdgeCondition::robin(1.0, lambda);
  spec.species[2][Edge::North] = EdgeCondition::robin(0.0, lambda);
  return spec;
}

BoundarySpec BoundarySpec::all_neumann(std::size_t species_count) {
  BoundarySpec spec;
  spec.species.resize(species_count);
  return spec;
}

bool BoundarySpec::mirror_symmetric() const {
  return std::all_of(species.begin(), species.end(),
                     [](const SpeciesBoundary& b) { return b[Edge::West] == b[Edge::East]; });
}

double face_flux(double u_left, double u_right, double d_left, double d_right, double dx) {
  return (d_left + d_right) * (u_right - u_left) / (2.0 * dx);
}

double dirichlet_boundary_flux(double u_cell, double boundary_value, double d_boundary, double dx) {
  return 2.0 / dx * d_boundary * (boundary_value - u_cell);
}

double robin_boundary_flux(double c_cell, double bulk_value, double lambda, double d, double dx) {
  const double inflow = 2.0 * dx * bulk_value / (2.0 * lambda + dx);
  return d / dx * (inflow - c_cell * (1.0 + (dx - 2.0 * lambda) / (dx + 2.0 * lambda)));
}

DiffusionLaw DiffusionLaw::constant(double d) {
  DiffusionLaw law;
  law.constant_ = d;
  return law;
}

DiffusionLaw DiffusionLaw::nonlinear(std::function<double(double)> value,
                                     std::function<double(double)> derivative) {
  if (!value || !derivative) throw ParameterError("nonlinear diffusion law needs value and derivative");
  DiffusionLaw law;
  law.value_ = std::move(value);
  law.derivative_ = std::move(derivative);
  return law;
}

namespace {

// d(robin flux)/dc; the flux is affine in c.
double robin_slope(double lambda, double d, double dx) {
  return -d / dx * (1.0 + (dx - 2.0 * lambda) / (dx + 2.0 * lambda));
}

struct Neighbour {
  Edge edge;
  bool interior;
  std::ptrdiff_t step;  // offset of the neighbour cell in storage
};

// Visit the four faces of cell (i, j).
template <class Fn>
void for_each_face(const Grid& g, int i, int j, Fn&& fn) {
  const auto m = static_cast<std::ptrdiff_t>(g.ny());
  fn(Neighbour{Edge::West, i > 1, -m});
  fn(Neighbour{Edge::East, i < g.nx(), m});
  fn(Neighbour{Edge::South, j > 1, -1});
  fn(Neighbour{Edge::North, j < g.ny(), 1});
}

}  // namespace

SemiDiscreteSystem::SemiDiscreteSystem(Grid grid, std::vector<std::string> species,
                                       std::vector<DiffusionLaw> diffusion, BoundarySpec boundary,
                                       ReactionFn reaction)
    : grid_(grid),
      species_(std::move(species)),
      diffusion_(std::move(diffusion)),
      boundary_(std::move(boundary)),
      reaction_(std::move(reaction)) {
  if (species_.empty()) throw ParameterError("system needs at least one species");
  if (diffusion_.size() != species_.size() || boundary_.species.size() != species_.size()) {
    throw ParameterError("species, diffusion laws and boundary conditions must have equal counts");
  }
  for (std::size_t s = 0; s < species_.size(); ++s) {
    for (const EdgeCondition& e : boundary_.species[s].edges) {
      if (e.kind == BoundaryKind::Robin) {
        if (!diffusion_[s].is_constant()) {
          throw ParameterError("Robin boundary requires a constant diffusion coefficient (species " +
                               species_[s] + ")");
        }
        if (!(e.lambda >= 0.0)) throw ParameterError("Robin lambda must be nonnegative");
      }
    }
  }
}

std::span<const double> SemiDiscreteSystem::species_view(std::span<const double> y, std::size_t s) const {
  return y.subspan(s * grid_.cell_count(), grid_.cell_count());
}

Field SemiDiscreteSystem::species_field(std::span<const double> y, std::size_t s) const {
  const auto v = species_view(y, s);
  return Field(grid_, std::vector<double>(v.begin(), v.end()));
}

void SemiDiscreteSystem::check_state(std::span<const double> y) const {
  if (y.size() != size()) {
    throw ParameterError("state has " + std::to_string(y.size()) + " entries, system expects " +
                         std::to_string(size()));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw EvaluationError("state contains non-finite entries");
  }
}

void SemiDiscreteSystem::coefficient_values(std::span<const double> u, std::size_t s,
                                            std::vector<double>& out) const {
  out.resize(u.size());
  const DiffusionLaw& law = diffusion_[s];
  if (law.is_constant()) {
    std::fill(out.begin(), out.end(), law.value(0.0));
  } else {
    for (std::size_t p = 0; p < u.size(); ++p) out[p] = law.value(u[p]);
  }
}

void SemiDiscreteSystem::rhs(double /*t*/, std::span<const double> y, std::span<double> f) const {
  check_state(y);
  if (f.size() != size()) throw ParameterError("rhs output has wrong length");
  const std::size_t ncell = grid_.cell_count();
  const std::size_t ns = species_.size();
  const double dx = grid_.dx();
  std::vector<double> coeff;

  for (std::size_t s = 0; s < ns; ++s) {
    const auto u = species_view(y, s);
    const DiffusionLaw& law = diffusion_[s];
    const SpeciesBoundary& bc = boundary_.species[s];
    coefficient_values(u, s, coeff);
    double* out = f.data() + s * ncell;
    for (int i = 1; i <= grid_.nx(); ++i) {
      for (int j = 1; j <= grid_.ny(); ++j) {
        const std::size_t p = grid_.offset(i, j);
        double sum = 0.0;
        for_each_face(grid_, i, j, [&](const Neighbour& nb) {
          if (nb.interior) {
            const std::size_t q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + nb.step);
            sum += face_flux(u[p], u[q], coeff[p], coeff[q], dx);
            return;
          }
          const EdgeCondition& e = bc[nb.edge];
          switch (e.kind) {
            case BoundaryKind::Neumann: break;
            case BoundaryKind::Dirichlet:
              sum += dirichlet_boundary_flux(u[p], e.value, law.value(e.value), dx);
              break;
            case BoundaryKind::Robin: sum += robin_boundary_flux(u[p], e.value, e.lambda, coeff[p], dx); break;
          }
        });
        out[p] = sum / dx;
      }
    }
  }

  if (reaction_) {
    std::vector<double> local(ns), rate(ns), jac(ns * ns);
    for (std::size_t p = 0; p < ncell; ++p) {
      for (std::size_t s = 0; s < ns; ++s) local[s] = y[s * ncell + p];
      reaction_(local, rate, jac);
      for (std::size_t s = 0; s < ns; ++s) f[s * ncell + p] += rate[s];
    }
  }

  for (double v : f) {
    if (!std::isfinite(v)) throw EvaluationError("right-hand side evaluated to a non-finite value");
  }
}

std::vector<double> SemiDiscreteSystem::rhs(double t, std::span<const double> y) const {
  std::vector<double> f(size());
  rhs(t, y, f);
  return f;
}

StencilMatrix SemiDiscreteSystem::jacobian(double /*t*/, std::span<const double> y) const {
  check_state(y);
  const std::size_t ncell = grid_.cell_count();
  const std::size_t ns = species_.size();
  const double dx = grid_.dx();
  const auto m = static_cast<std::ptrdiff_t>(grid_.ny());
  StencilMatrix jac(size());
  auto& d0 = jac.diagonal(0);
  auto& d_east = jac.diagonal(m);
  auto& d_west = jac.diagonal(-m);
  auto& d_north = jac.diagonal(1);
  auto& d_south = jac.diagonal(-1);
  const auto off_diagonal = [&](Edge e) -> std::vector<double>& {
    switch (e) {
      case Edge::West: return d_west;
      case Edge::East: return d_east;
      case Edge::South: return d_south;
      case Edge::North: break;
    }
    return d_north;
  };

  std::vector<double> coeff, slope;
  for (std::size_t s = 0; s < ns; ++s) {
    const auto u = species_view(y, s);
    const DiffusionLaw& law = diffusion_[s];
    const SpeciesBoundary& bc = boundary_.species[s];
    coefficient_values(u, s, coeff);
    slope.assign(ncell, 0.0);
    if (!law.is_constant()) {
      for (std::size_t p = 0; p < ncell; ++p) slope[p] = law.derivative(u[p]);
    }
    const std::size_t base = s * ncell;
    for (int i = 1; i <= grid_.nx(); ++i) {
      for (int j = 1; j <= grid_.ny(); ++j) {
        const std::size_t p = grid_.offset(i, j);
        const std::size_t row = base + p;
        for_each_face(grid_, i, j, [&](const Neighbour& nb) {
          if (nb.interior) {
            const std::size_t q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + nb.step);
            const double sum_d = coeff[p] + coeff[q];
            const double grad = u[q] - u[p];
            d0[row] += (slope[p] * grad - sum_d) / (2.0 * dx * dx);
            off_diagonal(nb.edge)[row] += (slope[q] * grad + sum_d) / (2.0 * dx * dx);
            return;
          }
          const EdgeCondition& e = bc[nb.edge];
          switch (e.kind) {
            case BoundaryKind::Neumann: break;
            case BoundaryKind::Dirichlet: d0[row] += -2.0 * law.value(e.value) / (dx * dx); break;
            case BoundaryKind::Robin: d0[row] += robin_slope(e.lambda, coeff[p], dx) / dx; break;
          }
        });
      }
    }
  }

  if (reaction_) {
    std::vector<double> local(ns), rate(ns), local_jac(ns * ns);
    std::vector<std::vector<double>*> blocks(ns * ns, nullptr);
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = 0; b < ns; ++b) {
        const auto offset = (static_cast<std::ptrdiff_t>(b) - static_cast<std::ptrdiff_t>(a)) *
                            static_cast<std::ptrdiff_t>(ncell);
        blocks[a * ns + b] = &jac.diagonal(offset);
      }
    }
    for (std::size_t p = 0; p < ncell; ++p) {
      for (std::size_t s = 0; s < ns; ++s) local[s] = y[s * ncell + p];
      std::fill(local_jac.begin(), local_jac.end(), 0.0);
      reaction_(local, rate, local_jac);
      for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ns; ++b) (*blocks[a * ns + b])[a * ncell + p] += local_jac[a * ns + b];
      }
    }
  }

  for (const auto& [offset, d] : jac.diagonals()) {
    for (double v : d) {
      if (!std::isfinite(v)) throw EvaluationError("Jacobian has non-finite entries");
    }
  }
  return jac;
}

DiffusionSplit SemiDiscreteSystem::diffusion_operator(std::span<const double> y) const {
  check_state(y);
  const std::size_t ncell = grid_.cell_count();
  const double dx = grid_.dx();
  DiffusionSplit split{StencilMatrix(size()), std::vector<double>(size(), 0.0)};
  std::vector<double> coeff;
  for (std::size_t s = 0; s < species_.size(); ++s) {
    const auto u = species_view(y, s);
    const DiffusionLaw& law = diffusion_[s];
    const SpeciesBoundary& bc = boundary_.species[s];
    coefficient_values(u, s, coeff);
    const std::size_t base = s * ncell;
    for (int i = 1; i <= grid_.nx(); ++i) {
      for (int j = 1; j <= grid_.ny(); ++j) {
        const std::size_t p = grid_.offset(i, j);
        const std::size_t row = base + p;
        for_each_face(grid_, i, j, [&](const Neighbour& nb) {
          if (nb.interior) {
            const std::size_t q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + nb.step);
            const double w = (coeff[p] + coeff[q]) / (2.0 * dx * dx);
            split.matrix.add(row, base + q, w);
            split.matrix.add(row, row, -w);
            return;
          }
          const EdgeCondition& e = bc[nb.edge];
          switch (e.kind) {
            case BoundaryKind::Neumann: break;
            case BoundaryKind::Dirichlet: {
              const double w = 2.0 * law.value(e.value) / (dx * dx);
              split.matrix.add(row, row, -w);
              split.source[row] += w * e.value;
              break;
            }
            case BoundaryKind::Robin:
              split.matrix.add(row, row, robin_slope(e.lambda, coeff[p], dx) / dx);
              split.source[row] += coeff[p] / (dx * dx) * 2.0 * dx * e.value / (2.0 * e.lambda + dx);
              break;
          }
        });
      }
    }
  }
  return split;
}

}  // namespace biosim
