#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biosim/errors.hpp"
#include "biosim/ode_system.hpp"
#include "biosim/sparse.hpp"

namespace biosim {

/// Rosenbrock-Wanner scheme in the standard (k-stage) form
///   (I - h*gamma*J) k_i = h f(t + c_i h, y + sum_j alpha_ij k_j)
///                         + h J sum_{j<i} gamma_ij k_j + h^2 gamma_i f_t,
///   y1 = y + sum b_i k_i,  yhat1 = y + sum bhat_i k_i.
/// make() also stores the transformed coefficients used by row_step, which
/// avoid Jacobian products inside the stage loop.
struct RowTableau {
  std::string name;
  int stages = 0;
  int order = 0;
  int embedded_order = 0;
  double gamma = 0.0;
  std::vector<std::vector<double>> alpha;      ///< strictly lower triangular
  std::vector<std::vector<double>> gamma_ij;   ///< lower triangular, diagonal = gamma
  std::vector<double> b;
  std::vector<double> b_hat;

  std::vector<double> c;           ///< stage abscissae, row sums of alpha
  std::vector<double> gamma_sum;   ///< row sums of gamma_ij (diagonal included)
  std::vector<std::vector<double>> a_transformed;
  std::vector<std::vector<double>> c_transformed;
  std::vector<double> m;
  std::vector<double> m_hat;

  static RowTableau make(std::string name, int order, int embedded_order,
                         std::vector<std::vector<double>> alpha,
                         std::vector<std::vector<double>> gamma_ij, std::vector<double> b,
                         std::vector<double> b_hat);
};

/// Registered schemes: "ros3prl2" (alias "ros3pl"), "ros34pw2", "ros2".
/// Throws ParameterError for unknown names.
const RowTableau& row_tableau(std::string_view name);
std::vector<std::string> row_tableau_names();

/// Tolerances of the weighted error norm
///   err = sqrt(mean((e_i / w_i)^2)),  w_i = (atol + rtol*max(|y_i|, |y1_i|)) / tol,
/// so the estimate is compared directly against tol.
struct ErrorWeights {
  double tol = 1e-7;
  double atol = 1e-7;
  double rtol = 1e-7;
};

struct StepOutcome {
  bool ok = false;
  std::vector<double> state;     ///< valid when ok
  double error_estimate = 0.0;
  int linear_iterations = 0;
  std::string failure;           ///< reason when !ok
};

/// One ROW step with the Jacobian frozen at (t, y). Never throws on
/// evaluation or solver trouble; reports it through StepOutcome::ok.
StepOutcome row_step(const OdeSystem& system, std::span<const double> y, double t, double h,
                     const RowTableau& tableau, const ErrorWeights& weights = {},
                     const SolveOptions& linear = {});

struct ControllerOptions {
  double tol = 1e-7;
  double safety = 0.9;
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  double f_min = 0.2;
  double f_max = 5.0;
  int max_consecutive_rejections = 20;
};

struct StepProposal {
  bool accept = false;
  double h_next = 0.0;
};

/// Embedded-error step size controller.
class StepController {
 public:
  StepController(ControllerOptions options, int embedded_order);

  /// accept iff err <= tol; h_next = h * clamp(safety*(tol/err)^(1/(p+1)),
  /// f_min, f_max) clamped to [h_min, h_max]. Throws IntegrationAbort after
  /// more than max_consecutive_rejections rejections in a row.
  StepProposal propose(double error_estimate, double h);
  /// Rejection without a usable estimate (solver failure, non-finite stage).
  StepProposal fail(double h);

  const ControllerOptions& options() const noexcept { return options_; }
  int consecutive_rejections() const noexcept { return consecutive_; }
  int total_rejections() const noexcept { return rejections_; }

 private:
  void count_rejection();

  ControllerOptions options_;
  int embedded_order_;
  int consecutive_ = 0;
  int rejections_ = 0;
};

struct TraceEntry {
  double t;          ///< start of the attempted step
  double h;
  bool accepted;
  double error_estimate;
  int linear_iterations;
  bool bounds_violated = false;
};

struct IntegrationTrace {
  std::vector<TraceEntry> entries;

  std::size_t accepted_count() const;
  std::size_t rejected_count() const;
  /// Columns t,h,accepted,err_est,lin_iters.
  void write_csv(std::ostream& os) const;
};

struct StepInfo {
  double t;
  double h;                 ///< size of the step that reached t (0 at start)
  std::size_t step_index;   ///< accepted steps so far
  double error_estimate;
  std::span<const double> state;
};

enum class ObserverAction { Continue, Stop };
using Observer = std::function<ObserverAction(const StepInfo&)>;

/// Admissible box for one contiguous block of the state. After a step passes
/// the error test, components outside the box by no more than their error
/// weight atol + rtol*|y| are projected onto it; a larger excursion rejects
/// the step, which is retried with half the step size.
struct StateBounds {
  std::size_t offset = 0;
  std::size_t count = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool upper_strict = false;

  bool contains(std::span<const double> y) const noexcept;
};

struct BoundsOutcome {
  bool admissible = true;
  std::size_t projected = 0;
  double max_correction = 0.0;
};

/// Projects small excursions in place; leaves y untouched when inadmissible.
BoundsOutcome enforce_bounds(std::span<const StateBounds> bounds, std::span<double> y, double atol,
                             double rtol);

struct IntegratorOptions {
  ControllerOptions controller;
  std::vector<StateBounds> bounds;
  double h0 = 1e-3;
  /// Attempted steps (accepted or not) before IntegrationAbort; 0 = no limit.
  std::size_t max_steps = 0;
  std::string tableau = "ros3prl2";
  /// Negative values mean "use controller.tol".
  double atol = -1.0;
  double rtol = -1.0;
  /// Non-positive rel_tol means min(1e-10, tol/100).
  SolveOptions linear{0.0, 2000, Preconditioner::Jacobi};
};

struct IntegrationResult {
  std::vector<double> state;
  double t = 0.0;
  IntegrationTrace trace;
  bool stopped_early = false;
  std::string stop_reason;
  double h_next = 0.0;                   ///< proposed size of the next step
  std::size_t projected_components = 0;  ///< summed over accepted steps
  double max_projection = 0.0;
};

/// Abort raised by integrate(); carries the state and trace reached so far.
class AbortedIntegration : public IntegrationAbort {
 public:
  AbortedIntegration(const std::string& what, IntegrationResult partial)
      : IntegrationAbort(what), partial_(std::move(partial)) {}
  const IntegrationResult& partial() const noexcept { return partial_; }

 private:
  IntegrationResult partial_;
};

/// Adaptive integration from t0 to t_end; the last step lands exactly on
/// t_end. Observers see the initial state and every accepted step; any
/// observer returning Stop ends the run cleanly.
IntegrationResult integrate(const OdeSystem& system, std::vector<double> y0, double t0, double t_end,
                            const IntegratorOptions& options, std::span<const Observer> observers = {});

/// Fixed step size, no error control. Throws IntegrationAbort if a step fails.
IntegrationResult integrate_fixed(const OdeSystem& system, std::vector<double> y0, double t0,
                                  double t_end, double h, const RowTableau& tableau,
                                  const SolveOptions& linear = {});

}  // namespace biosim
