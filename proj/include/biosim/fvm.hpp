#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "biosim/grid.hpp"
#include "biosim/ode_system.hpp"
#include "biosim/sparse.hpp"

namespace biosim {

enum class BoundaryKind { Neumann, Dirichlet, Robin };

/// One edge condition: zero flux, fixed value, or c + lambda dc/dn = value.
struct EdgeCondition {
  BoundaryKind kind = BoundaryKind::Neumann;
  double value = 0.0;
  double lambda = 0.0;

  static EdgeCondition neumann() { return {}; }
  static EdgeCondition dirichlet(double v) { return {BoundaryKind::Dirichlet, v, 0.0}; }
  static EdgeCondition robin(double bulk, double lambda) { return {BoundaryKind::Robin, bulk, lambda}; }

  friend bool operator==(const EdgeCondition&, const EdgeCondition&) = default;
};

/// West is x = 0, East x = L, South the substratum y = 0, North the top y = H.
enum class Edge { West = 0, East = 1, South = 2, North = 3 };

struct SpeciesBoundary {
  std::array<EdgeCondition, 4> edges{};

  EdgeCondition& operator[](Edge e) { return edges[static_cast<std::size_t>(e)]; }
  const EdgeCondition& operator[](Edge e) const { return edges[static_cast<std::size_t>(e)]; }
  friend bool operator==(const SpeciesBoundary&, const SpeciesBoundary&) = default;
};

struct BoundarySpec {
  std::vector<SpeciesBoundary> species;

  /// U: Neumann, Dirichlet 0 on top. C: Neumann, Robin(1, lambda) on top.
  static BoundarySpec biofilm(double lambda);
  /// U: Neumann everywhere. C: Robin(1, lambda) top. S: Robin(0, lambda) top.
  static BoundarySpec quorum_sensing(double lambda);
  static BoundarySpec all_neumann(std::size_t species_count);

  /// True when West and East conditions agree for every species.
  bool mirror_symmetric() const;
  friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

/// Flux into the left cell across a shared face: arithmetic-mean coefficient
/// times the central difference, (D_l + D_r) (u_r - u_l) / (2 dx).
double face_flux(double u_left, double u_right, double d_left, double d_right, double dx);
/// (2/dx) D_b (u_b - u_cell); the half-cell distance to the boundary.
double dirichlet_boundary_flux(double u_cell, double boundary_value, double d_boundary, double dx);
/// (d/dx) (2 dx bulk/(2 lambda + dx) - c (1 + (dx - 2 lambda)/(dx + 2 lambda)))
double robin_boundary_flux(double c_cell, double bulk_value, double lambda, double d, double dx);

/// Constant or density-dependent diffusion coefficient of one species.
class DiffusionLaw {
 public:
  static DiffusionLaw constant(double d);
  static DiffusionLaw nonlinear(std::function<double(double)> value,
                                std::function<double(double)> derivative);

  bool is_constant() const noexcept { return !value_; }
  double value(double u) const { return value_ ? value_(u) : constant_; }
  double derivative(double u) const { return derivative_ ? derivative_(u) : 0.0; }

 private:
  double constant_ = 0.0;
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
};

/// Pointwise reaction terms. `local` holds all species at one cell; the
/// callee writes rate[a] and jacobian[a * n + b] = d rate[a] / d local[b].
using ReactionFn =
    std::function<void(std::span<const double> local, std::span<double> rate, std::span<double> jacobian)>;

/// Diffusion part written as (matrix) * state + source.
struct DiffusionSplit {
  StencilMatrix matrix;
  std::vector<double> source;
};

/// Finite-volume semi-discretization of a multi-species diffusion-reaction
/// system on a uniform grid. The state concatenates one Field per species.
class SemiDiscreteSystem final : public OdeSystem {
 public:
  /// Throws ParameterError on inconsistent species, laws or boundary data.
  SemiDiscreteSystem(Grid grid, std::vector<std::string> species, std::vector<DiffusionLaw> diffusion,
                     BoundarySpec boundary, ReactionFn reaction = {});

  const Grid& grid() const noexcept { return grid_; }
  std::size_t species_count() const noexcept { return species_.size(); }
  const std::vector<std::string>& species_names() const noexcept { return species_; }
  const BoundarySpec& boundary() const noexcept { return boundary_; }
  bool has_reactions() const noexcept { return static_cast<bool>(reaction_); }

  std::size_t size() const override { return species_.size() * grid_.cell_count(); }

  /// Throws EvaluationError when the state or the result is not finite.
  void rhs(double t, std::span<const double> y, std::span<double> f) const override;
  std::vector<double> rhs(double t, std::span<const double> y) const;

  StencilMatrix jacobian(double t, std::span<const double> y) const override;

  /// Picard form of the diffusion part, block diagonal over species.
  DiffusionSplit diffusion_operator(std::span<const double> y) const;

  /// View of one species inside a state vector.
  std::span<const double> species_view(std::span<const double> y, std::size_t s) const;
  Field species_field(std::span<const double> y, std::size_t s) const;

 private:
  void check_state(std::span<const double> y) const;
  void coefficient_values(std::span<const double> u, std::size_t s, std::vector<double>& out) const;

  Grid grid_;
  std::vector<std::string> species_;
  std::vector<DiffusionLaw> diffusion_;
  BoundarySpec boundary_;
  ReactionFn reaction_;
};

}  // namespace biosim
