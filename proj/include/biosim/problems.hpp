#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "biosim/fvm.hpp"
#include "biosim/grid.hpp"
#include "biosim/model.hpp"

namespace biosim {

enum class ProblemKind { Biofilm, Pme, Qs };

std::string_view problem_kind_name(ProblemKind kind) noexcept;

/// A ready-to-integrate semi-discrete problem plus its initial state.
struct Problem {
  ProblemKind kind;
  SemiDiscreteSystem system;
  std::vector<double> initial_state;
};

/// Biomass U and nutrient C with growth, decay and uptake. C starts at
/// `c0` everywhere (saturated by default).
Problem build_biofilm(const Grid& grid, const BiofilmParams& params, Regularization eps,
                      std::span<const Colony> colonies, double c0 = 1.0);

/// Single species u_t = div((u+eps)^m grad u) + k u with zero-flux walls,
/// started from the Barenblatt profile at t0 centred in the domain.
Problem build_pme(const Grid& grid, const PmeParams& params, Regularization eps);

/// Biomass, nutrient and autoinducer S. S starts at 0, C at `c0`.
Problem build_qs(const Grid& grid, const QsParams& params, Regularization eps, const Colony& colony,
                 double c0 = 1.0);

/// Self-similar Barenblatt solution of the PME with linear source, radius
/// measured from (xc, yc). For k = 0 the classical form with tau = t is used.
double barenblatt_exact(double x, double y, double t, const PmeParams& params, double xc, double yc);
/// Squared support radius of barenblatt_exact at time t.
double barenblatt_support_radius_sq(double t, const PmeParams& params);
/// barenblatt_exact sampled at cell centres, centred in the domain.
Field barenblatt_field(const Grid& grid, double t, const PmeParams& params);

/// Six substratum colonies symmetric about x = L/2: equal spacing s within
/// each triple, 1.25 s between the two inner colonies and s/2 to the walls.
std::vector<Colony> six_colony_layout(double length, double radius = 0.05, double amplitude = 0.9);

/// One colony at the centre of the substratum.
Colony central_colony(double length, double radius = 0.1, double amplitude = 0.9);

/// Declarative problem description, resolved against a grid by build().
struct ProblemDef {
  ProblemKind kind = ProblemKind::Biofilm;
  std::variant<BiofilmParams, PmeParams, QsParams> params = BiofilmParams{};
  Regularization regularization;
  std::vector<Colony> colonies;   ///< biofilm: all; qs: first only; pme: unused
  double c0 = 1.0;

  std::size_t species_count() const noexcept;
  Problem build(const Grid& grid) const;
};

}  // namespace biosim
