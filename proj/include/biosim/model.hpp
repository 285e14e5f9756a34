#pragma once

#include <string>
#include <vector>

namespace biosim {

/// Dimensionless biofilm growth parameters. Defaults are the growth-limited
/// regime; alpha, beta and lambda are not fixed by the source data and are
/// configurable.
struct BiofilmParams {
  double k = 0.67;       ///< biomass decay (lysis) rate
  double K_U = 0.13;     ///< Monod half saturation concentration
  double nu_U = 530.0;   ///< maximum substrate uptake rate
  double d_c = 33.0;     ///< nutrient diffusion coefficient
  double delta = 1e-8;   ///< biomass motility coefficient
  double alpha = 4.0;    ///< degeneracy exponent, >= 1
  double beta = 4.0;     ///< singularity exponent, >= 1
  double lambda = 0.0;   ///< concentration boundary layer thickness

  /// Throws ParameterError on negative or out-of-range values.
  void validate() const;
  /// Soft warnings, e.g. when d_c is not much larger than delta.
  std::vector<std::string> warnings() const;
};

/// Biofilm parameters plus autoinducer transport and production.
struct QsParams {
  BiofilmParams base;
  double d_s = 16.5;       ///< signal diffusion coefficient
  double alpha_s = 4500.0; ///< base production rate
  double beta_s = 45000.0; ///< induced (additional) production rate
  double psi = 0.02;       ///< signal decay rate
  double m_hill = 2.5;     ///< Hill exponent

  void validate() const;
};

/// Porous medium equation with linear source, u_t = div(u^m grad u) + k u.
struct PmeParams {
  double m_exp = 4.0;
  double k_growth = 3.0;
  double t0 = 0.1;
  double r0 = 0.1;

  void validate() const;
};

/// Regularization parameter; epsilon = 0 selects the degenerate coefficient.
class Regularization {
 public:
  Regularization() = default;
  /// Throws ParameterError unless 0 <= epsilon < 1.
  explicit Regularization(double epsilon);

  double epsilon() const noexcept { return epsilon_; }
  bool degenerate() const noexcept { return epsilon_ == 0.0; }

 private:
  double epsilon_ = 0.0;
};

/// Distance from 1 at which the degenerate coefficient is clamped.
inline constexpr double kSingularityGuard = 1e-12;

/// Biomass diffusion coefficient D(u), or its regularized form D_eps(u).
double diffusion_coefficient(double u, const BiofilmParams& p, Regularization eps);
/// dD/du of diffusion_coefficient(); zero on clamped and constant branches.
double diffusion_coefficient_derivative(double u, const BiofilmParams& p, Regularization eps);

/// (max(u,0) + eps)^m.
double pme_diffusion_coefficient(double u, const PmeParams& p, Regularization eps);
double pme_diffusion_coefficient_derivative(double u, const PmeParams& p, Regularization eps);

/// Local rate together with its partial derivatives.
struct Rate2 {
  double value;
  double d_first;   ///< derivative w.r.t. the first argument
  double d_second;  ///< derivative w.r.t. the second argument
};

/// (c/(K_U+c) - k) * u
double biomass_reaction(double u, double c, const BiofilmParams& p);
Rate2 biomass_reaction_partials(double u, double c, const BiofilmParams& p);

/// nu_U * c * u / (K_U + c); enters the nutrient equation with a minus sign.
double nutrient_reaction(double u, double c, const BiofilmParams& p);
Rate2 nutrient_reaction_partials(double u, double c, const BiofilmParams& p);

/// (alpha_s + beta_s * s^m / (1 + s^m)) * u - psi * s
double signal_reaction(double u, double s, const QsParams& p);
Rate2 signal_reaction_partials(double u, double s, const QsParams& p);

}  // namespace biosim
