#include "biosim/problems.hpp"

#include <cmath>

#include "biosim/errors.hpp"

namespace biosim {

std::string_view problem_kind_name(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::Biofilm: return "biofilm";
    case ProblemKind::Pme: return "pme";
    case ProblemKind::Qs: return "qs";
  }
  return "unknown";
}

namespace {

DiffusionLaw biomass_law(const BiofilmParams& p, Regularization eps) {
  return DiffusionLaw::nonlinear([p, eps](double u) { return diffusion_coefficient(u, p, eps); },
                                 [p, eps](double u) { return diffusion_coefficient_derivative(u, p, eps); });
}

void append(std::vector<double>& state, const Field& f) {
  state.insert(state.end(), f.values().begin(), f.values().end());
}

}  // namespace

Problem build_biofilm(const Grid& grid, const BiofilmParams& params, Regularization eps,
                      std::span<const Colony> colonies, double c0) {
  params.validate();
  if (!(c0 >= 0.0 && c0 <= 1.0)) throw ParameterError("initial nutrient must lie in [0,1]");
  ReactionFn reaction = [p = params](std::span<const double> v, std::span<double> rate, std::span<double> jac) {
    const Rate2 g = biomass_reaction_partials(v[0], v[1], p);
    const Rate2 n = nutrient_reaction_partials(v[0], v[1], p);
    rate[0] = g.value;
    rate[1] = -n.value;
    jac[0] = g.d_first;
    jac[1] = g.d_second;
    jac[2] = -n.d_first;
    jac[3] = -n.d_second;
  };
  SemiDiscreteSystem system(grid, {"U", "C"}, {biomass_law(params, eps), DiffusionLaw::constant(params.d_c)},
                            BoundarySpec::biofilm(params.lambda), std::move(reaction));
  std::vector<double> state;
  state.reserve(system.size());
  append(state, initialize_colonies(grid, colonies));
  append(state, Field(grid, c0));
  return {ProblemKind::Biofilm, std::move(system), std::move(state)};
}

Problem build_pme(const Grid& grid, const PmeParams& params, Regularization eps) {
  params.validate();
  const double k = params.k_growth;
  ReactionFn reaction;
  if (k != 0.0) {
    reaction = [k](std::span<const double> v, std::span<double> rate, std::span<double> jac) {
      rate[0] = k * v[0];
      jac[0] = k;
    };
  }
  DiffusionLaw law = DiffusionLaw::nonlinear(
      [params, eps](double u) { return pme_diffusion_coefficient(u, params, eps); },
      [params, eps](double u) { return pme_diffusion_coefficient_derivative(u, params, eps); });
  SemiDiscreteSystem system(grid, {"U"}, {std::move(law)}, BoundarySpec::all_neumann(1), std::move(reaction));
  const Field u0 = barenblatt_field(grid, params.t0, params);
  std::vector<double> state(u0.values().begin(), u0.values().end());
  return {ProblemKind::Pme, std::move(system), std::move(state)};
}

Problem build_qs(const Grid& grid, const QsParams& params, Regularization eps, const Colony& colony,
                 double c0) {
  params.validate();
  if (!(c0 >= 0.0 && c0 <= 1.0)) throw ParameterError("initial nutrient must lie in [0,1]");
  ReactionFn reaction = [p = params](std::span<const double> v, std::span<double> rate, std::span<double> jac) {
    const Rate2 g = biomass_reaction_partials(v[0], v[1], p.base);
    const Rate2 n = nutrient_reaction_partials(v[0], v[1], p.base);
    const Rate2 s = signal_reaction_partials(v[0], v[2], p);
    rate[0] = g.value;
    rate[1] = -n.value;
    rate[2] = s.value;
    // rows U, C, S; columns U, C, S
    jac[0] = g.d_first;
    jac[1] = g.d_second;
    jac[2] = 0.0;
    jac[3] = -n.d_first;
    jac[4] = -n.d_second;
    jac[5] = 0.0;
    jac[6] = s.d_first;
    jac[7] = 0.0;
    jac[8] = s.d_second;
  };
  SemiDiscreteSystem system(grid, {"U", "C", "S"},
                            {biomass_law(params.base, eps), DiffusionLaw::constant(params.base.d_c),
                             DiffusionLaw::constant(params.d_s)},
                            BoundarySpec::quorum_sensing(params.base.lambda), std::move(reaction));
  std::vector<double> state;
  state.reserve(system.size());
  const Colony colonies[] = {colony};
  append(state, initialize_colonies(grid, colonies));
  append(state, Field(grid, c0));
  append(state, Field(grid, 0.0));
  return {ProblemKind::Qs, std::move(system), std::move(state)};
}

namespace {

double barenblatt_tau(double t, const PmeParams& p) {
  const double km = p.k_growth * p.m_exp;
  return km > 0.0 ? std::exp(km * t) / km : t;
}

double barenblatt_k0_sq(const PmeParams& p) {
  return p.r0 * p.r0 * std::pow(barenblatt_tau(p.t0, p), -1.0 / (p.m_exp + 1.0));
}

}  // namespace

double barenblatt_support_radius_sq(double t, const PmeParams& p) {
  return barenblatt_k0_sq(p) * std::pow(barenblatt_tau(t, p), 1.0 / (p.m_exp + 1.0));
}

double barenblatt_exact(double x, double y, double t, const PmeParams& p, double xc, double yc) {
  const double m = p.m_exp;
  const double tau = barenblatt_tau(t, p);
  const double r2 = (x - xc) * (x - xc) + (y - yc) * (y - yc);
  const double inner = m / (4.0 * (m + 1.0)) * (barenblatt_k0_sq(p) - r2 / std::pow(tau, 1.0 / (m + 1.0)));
  if (inner <= 0.0) return 0.0;
  return std::exp(p.k_growth * t) * std::pow(tau, -1.0 / (m + 1.0)) * std::pow(inner, 1.0 / m);
}

Field barenblatt_field(const Grid& grid, double t, const PmeParams& params) {
  Field f(grid);
  const double xc = 0.5 * grid.length();
  const double yc = 0.5 * grid.height();
  for (int i = 1; i <= grid.nx(); ++i) {
    for (int j = 1; j <= grid.ny(); ++j) {
      f(i, j) = barenblatt_exact((i - 0.5) * grid.dx(), (j - 0.5) * grid.dx(), t, params, xc, yc);
    }
  }
  return f;
}

std::vector<Colony> six_colony_layout(double length, double radius, double amplitude) {
  // walls s/2, two gaps of s per triple, inner gap 1.25 s: L = 6.25 s
  const double s = length / 6.25;
  const double x1 = 0.5 * s;
  std::vector<Colony> out;
  for (int k = 0; k < 3; ++k) out.push_back({x1 + k * s, 0.0, radius, amplitude});
  for (int k = 2; k >= 0; --k) out.push_back({length - (x1 + k * s), 0.0, radius, amplitude});
  return out;
}

Colony central_colony(double length, double radius, double amplitude) {
  return {0.5 * length, 0.0, radius, amplitude};
}

std::size_t ProblemDef::species_count() const noexcept {
  switch (kind) {
    case ProblemKind::Biofilm: return 2;
    case ProblemKind::Pme: return 1;
    case ProblemKind::Qs: return 3;
  }
  return 0;
}

Problem ProblemDef::build(const Grid& grid) const {
  switch (kind) {
    case ProblemKind::Biofilm: {
      const auto* p = std::get_if<BiofilmParams>(&params);
      if (p == nullptr) throw ParameterError("biofilm problem needs BiofilmParams");
      return build_biofilm(grid, *p, regularization, colonies, c0);
    }
    case ProblemKind::Pme: {
      const auto* p = std::get_if<PmeParams>(&params);
      if (p == nullptr) throw ParameterError("pme problem needs PmeParams");
      return build_pme(grid, *p, regularization);
    }
    case ProblemKind::Qs: {
      const auto* p = std::get_if<QsParams>(&params);
      if (p == nullptr) throw ParameterError("qs problem needs QsParams");
      if (colonies.empty()) throw ParameterError("qs problem needs one colony");
      return build_qs(grid, *p, regularization, colonies.front(), c0);
    }
  }
  throw ParameterError("unknown problem kind");
}

}  // namespace biosim
