#include "biosim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biosim/errors.hpp"

namespace biosim {

namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be finite and nonnegative, got " +
                         std::to_string(v));
  }
}

}  // namespace

void BiofilmParams::validate() const {
  require_nonnegative(k, "k");
  require_nonnegative(K_U, "K_U");
  require_nonnegative(nu_U, "nu_U");
  require_nonnegative(d_c, "d_c");
  require_nonnegative(delta, "delta");
  require_nonnegative(lambda, "lambda");
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (!(alpha >= 1.0)) throw ParameterError("alpha must be >= 1");
  if (!(beta >= 1.0)) throw ParameterError("beta must be >= 1");
  if (!(K_U > 0.0)) throw ParameterError("K_U must be positive");
}

std::vector<std::string> BiofilmParams::warnings() const {
  std::vector<std::string> out;
  if (d_c < 100.0 * delta) {
    out.push_back("d_c is not much larger than delta; the biomass/nutrient scale separation is lost");
  }
  return out;
}

void QsParams::validate() const {
  base.validate();
  require_nonnegative(d_s, "d_s");
  require_nonnegative(alpha_s, "alpha_s");
  require_nonnegative(beta_s, "beta_s");
  require_nonnegative(psi, "psi");
  require_nonnegative(m_hill, "m_hill");
}

void PmeParams::validate() const {
  if (!(m_exp > 1.0)) throw ParameterError("PME exponent m must be > 1");
  require_nonnegative(k_growth, "k");
  if (!(t0 > 0.0)) throw ParameterError("PME t0 must be positive");
  if (!(r0 > 0.0)) throw ParameterError("PME r0 must be positive");
}

Regularization::Regularization(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ParameterError("regularization epsilon must lie in [0,1), got " + std::to_string(epsilon));
  }
}

double diffusion_coefficient(double u, const BiofilmParams& p, Regularization reg) {
  const double eps = reg.epsilon();
  if (reg.degenerate()) {
    if (u <= 0.0) return 0.0;
    const double uc = std::min(u, 1.0 - kSingularityGuard);
    return p.delta * std::pow(uc, p.alpha) / std::pow(1.0 - uc, p.beta);
  }
  if (u < 0.0) return p.delta * std::pow(eps, p.alpha);
  if (u <= 1.0 - eps) return p.delta * std::pow(u + eps, p.alpha) / std::pow(1.0 - u, p.beta);
  return p.delta * std::pow(eps, -p.beta);
}

double diffusion_coefficient_derivative(double u, const BiofilmParams& p, Regularization reg) {
  const double eps = reg.epsilon();
  if (reg.degenerate()) {
    if (u <= 0.0 || u >= 1.0 - kSingularityGuard) return 0.0;
  } else if (u < 0.0 || u > 1.0 - eps) {
    return 0.0;
  }
  const double base = u + eps;
  const double one_minus = 1.0 - u;
  const double den = std::pow(one_minus, p.beta);
  return p.delta * (p.alpha * std::pow(base, p.alpha - 1.0) +
                    p.beta * std::pow(base, p.alpha) / one_minus) / den;
}

double pme_diffusion_coefficient(double u, const PmeParams& p, Regularization reg) {
  return std::pow(std::max(u, 0.0) + reg.epsilon(), p.m_exp);
}

double pme_diffusion_coefficient_derivative(double u, const PmeParams& p, Regularization reg) {
  if (u <= 0.0) return 0.0;
  return p.m_exp * std::pow(u + reg.epsilon(), p.m_exp - 1.0);
}

double biomass_reaction(double u, double c, const BiofilmParams& p) {
  return (c / (p.K_U + c) - p.k) * u;
}

Rate2 biomass_reaction_partials(double u, double c, const BiofilmParams& p) {
  const double monod = c / (p.K_U + c);
  const double dmonod = p.K_U / ((p.K_U + c) * (p.K_U + c));
  return {(monod - p.k) * u, monod - p.k, dmonod * u};
}

double nutrient_reaction(double u, double c, const BiofilmParams& p) {
  if (c == 0.0) return 0.0;
  return p.nu_U * c * u / (p.K_U + c);
}

Rate2 nutrient_reaction_partials(double u, double c, const BiofilmParams& p) {
  const double monod = c / (p.K_U + c);
  const double dmonod = p.K_U / ((p.K_U + c) * (p.K_U + c));
  return {nutrient_reaction(u, c, p), p.nu_U * monod, p.nu_U * dmonod * u};
}

double signal_reaction(double u, double s, const QsParams& p) {
  const double sm = std::pow(std::max(s, 0.0), p.m_hill);
  return (p.alpha_s + p.beta_s * sm / (1.0 + sm)) * u - p.psi * s;
}

Rate2 signal_reaction_partials(double u, double s, const QsParams& p) {
  const double sp = std::max(s, 0.0);
  const double sm = std::pow(sp, p.m_hill);
  const double hill = sm / (1.0 + sm);
  // d/ds s^m/(1+s^m) = m s^(m-1) / (1+s^m)^2
  const double dhill = sp > 0.0 ? p.m_hill * std::pow(sp, p.m_hill - 1.0) / ((1.0 + sm) * (1.0 + sm)) : 0.0;
  return {(p.alpha_s + p.beta_s * hill) * u - p.psi * s, p.alpha_s + p.beta_s * hill,
          p.beta_s * dhill * u - p.psi};
}

}  // namespace biosim
