#include "biosim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "biosim/errors.hpp"

namespace biosim {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

StepOutcome row_step(const OdeSystem& system, std::span<const double> y, double t, double h,
                     const RowTableau& tableau, const ErrorWeights& weights, const SolveOptions& linear) {
  StepOutcome out;
  const std::size_t n = system.size();
  const auto stages = static_cast<std::size_t>(tableau.stages);
  const double gh = tableau.gamma * h;

  StencilMatrix stage_matrix;
  std::vector<double> f_t;
  try {
    stage_matrix = shift_scale(system.jacobian(t, y), gh);
    if (!system.autonomous()) {
      f_t.resize(n);
      system.time_derivative(t, y, f_t);
    }
  } catch (const EvaluationError& e) {
    out.failure = e.what();
    return out;
  }

  std::vector<std::vector<double>> u(stages, std::vector<double>(n, 0.0));
  std::vector<double> y_stage(n), f(n), rhs(n);
  for (std::size_t i = 0; i < stages; ++i) {
    std::copy(y.begin(), y.end(), y_stage.begin());
    for (std::size_t j = 0; j < i; ++j) {
      const double a = tableau.a_transformed[i][j];
      if (a == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) y_stage[k] += a * u[j][k];
    }
    try {
      system.rhs(t + tableau.c[i] * h, y_stage, f);
    } catch (const EvaluationError& e) {
      out.failure = e.what();
      return out;
    }
    for (std::size_t k = 0; k < n; ++k) rhs[k] = f[k];
    for (std::size_t j = 0; j < i; ++j) {
      const double c = tableau.c_transformed[i][j] / h;
      if (c == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) rhs[k] += c * u[j][k];
    }
    if (!f_t.empty()) {
      const double gt = tableau.gamma_sum[i] * h;
      for (std::size_t k = 0; k < n; ++k) rhs[k] += gt * f_t[k];
    }
    for (double& v : rhs) v *= gh;
    if (i > 0) u[i] = u[i - 1];
    const SolveReport report = bicgstab(stage_matrix, rhs, u[i], linear);
    out.linear_iterations += report.iterations;
    if (!report.converged) {
      out.failure = report.breakdown ? "linear solver breakdown" : "linear solver did not converge";
      return out;
    }
  }

  out.state.assign(y.begin(), y.end());
  double sum = 0.0;
  std::vector<double> err(n, 0.0);
  for (std::size_t i = 0; i < stages; ++i) {
    const double mi = tableau.m[i];
    const double di = tableau.m[i] - tableau.m_hat[i];
    for (std::size_t k = 0; k < n; ++k) {
      out.state[k] += mi * u[i][k];
      err[k] += di * u[i][k];
    }
  }
  if (!all_finite(out.state)) {
    out.failure = "non-finite stage values";
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::max(std::abs(y[k]), std::abs(out.state[k]));
    const double w = (weights.atol + weights.rtol * scale) / weights.tol;
    const double e = err[k] / w;
    sum += e * e;
  }
  out.error_estimate = n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
  if (!std::isfinite(out.error_estimate)) {
    out.failure = "non-finite error estimate";
    return out;
  }
  out.ok = true;
  return out;
}

StepController::StepController(ControllerOptions options, int embedded_order)
    : options_(options), embedded_order_(embedded_order) {
  if (!(options_.tol > 0.0)) throw ParameterError("tolerance must be positive");
  if (!(options_.h_min > 0.0) || !(options_.h_max >= options_.h_min)) {
    throw ParameterError("step bounds must satisfy 0 < h_min <= h_max");
  }
  if (!(options_.f_min > 0.0 && options_.f_min <= 1.0 && options_.f_max >= 1.0)) {
    throw ParameterError("step growth clamp must satisfy 0 < f_min <= 1 <= f_max");
  }
}

void StepController::count_rejection() {
  ++rejections_;
  if (++consecutive_ > options_.max_consecutive_rejections) {
    throw IntegrationAbort("step rejected " + std::to_string(consecutive_) + " times in a row");
  }
}

StepProposal StepController::propose(double error_estimate, double h) {
  StepProposal p;
  p.accept = error_estimate <= options_.tol;
  constexpr double kTiny = 1e-300;
  const double ratio = options_.tol / std::max(error_estimate, kTiny);
  double factor = options_.safety * std::pow(ratio, 1.0 / (embedded_order_ + 1));
  factor = std::clamp(factor, options_.f_min, options_.f_max);
  p.h_next = std::clamp(h * factor, options_.h_min, options_.h_max);
  if (p.accept) {
    consecutive_ = 0;
  } else {
    count_rejection();
  }
  return p;
}

StepProposal StepController::fail(double h) {
  count_rejection();
  return {false, std::clamp(0.5 * h, options_.h_min, options_.h_max)};
}

std::size_t IntegrationTrace::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const TraceEntry& e) { return e.accepted; }));
}

std::size_t IntegrationTrace::rejected_count() const { return entries.size() - accepted_count(); }

void IntegrationTrace::write_csv(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  os << "t,h,accepted,err_est,lin_iters\n";
  for (const TraceEntry& e : entries) {
    os << e.t << ',' << e.h << ',' << (e.accepted ? 1 : 0) << ',' << e.error_estimate << ','
       << e.linear_iterations << '\n';
  }
  os.precision(old_precision);
}

bool StateBounds::contains(std::span<const double> y) const noexcept {
  const std::size_t end = std::min(y.size(), offset + count);
  for (std::size_t k = offset; k < end; ++k) {
    const double v = y[k];
    if (!(v >= lower)) return false;
    if (upper_strict ? !(v < upper) : !(v <= upper)) return false;
  }
  return true;
}

BoundsOutcome enforce_bounds(std::span<const StateBounds> bounds, std::span<double> y, double atol,
                             double rtol) {
  BoundsOutcome out;
  std::vector<std::pair<std::size_t, double>> fixes;
  for (const StateBounds& b : bounds) {
    const std::size_t end = std::min(y.size(), b.offset + b.count);
    const double top = b.upper_strict ? std::nextafter(b.upper, b.lower) : b.upper;
    for (std::size_t k = b.offset; k < end; ++k) {
      const double v = y[k];
      const double target = std::clamp(v, b.lower, top);
      if (target == v) continue;
      const double correction = std::abs(target - v);
      if (!(correction <= atol + rtol * std::abs(target))) {
        out.admissible = false;
        return out;
      }
      fixes.emplace_back(k, target);
      out.max_correction = std::max(out.max_correction, correction);
    }
  }
  for (const auto& [k, v] : fixes) y[k] = v;
  out.projected = fixes.size();
  return out;
}

namespace {

bool notify(std::span<const Observer> observers, const StepInfo& info) {
  bool stop = false;
  for (const Observer& o : observers) {
    if (o && o(info) == ObserverAction::Stop) stop = true;
  }
  return stop;
}

}  // namespace

IntegrationResult integrate(const OdeSystem& system, std::vector<double> y0, double t0, double t_end,
                            const IntegratorOptions& options, std::span<const Observer> observers) {
  if (!(t_end > t0)) throw ParameterError("t_end must exceed t0");
  if (y0.size() != system.size()) throw ParameterError("initial state has the wrong length");
  const RowTableau& tableau = row_tableau(options.tableau);
  StepController controller(options.controller, tableau.embedded_order);
  const double tol = options.controller.tol;
  const ErrorWeights weights{tol, options.atol < 0.0 ? tol : options.atol,
                             options.rtol < 0.0 ? tol : options.rtol};
  SolveOptions linear = options.linear;
  if (!(linear.rel_tol > 0.0)) linear.rel_tol = std::min(1e-10, tol / 100.0);

  IntegrationResult result;
  result.state = std::move(y0);
  result.t = t0;
  result.h_next = options.h0;
  if (notify(observers, StepInfo{t0, 0.0, 0, 0.0, result.state})) {
    result.stopped_early = true;
    result.stop_reason = "observer stop at initial state";
    return result;
  }

  double h = std::clamp(options.h0, options.controller.h_min, options.controller.h_max);
  bool last_rejected = false;
  std::size_t accepted = 0;
  try {
    while (result.t < t_end) {
      if (options.max_steps > 0 && result.trace.entries.size() >= options.max_steps) {
        throw IntegrationAbort("step budget of " + std::to_string(options.max_steps) + " attempts exhausted");
      }
      const double remaining = t_end - result.t;
      bool final_step = false;
      if (h >= remaining || remaining - h < 1e-10 * std::max(1.0, std::abs(t_end))) {
        h = remaining;
        final_step = true;
      }
      StepOutcome step = row_step(system, result.state, result.t, h, tableau, weights, linear);
      if (!step.ok) {
        result.trace.entries.push_back(
            {result.t, h, false, std::numeric_limits<double>::infinity(), step.linear_iterations, false});
        h = controller.fail(h).h_next;
        last_rejected = true;
        continue;
      }
      BoundsOutcome bounds;
      if (step.error_estimate <= tol && !options.bounds.empty()) {
        bounds = enforce_bounds(options.bounds, step.state, weights.atol, weights.rtol);
      }
      if (!bounds.admissible) {
        result.trace.entries.push_back(
            {result.t, h, false, step.error_estimate, step.linear_iterations, true});
        h = controller.fail(h).h_next;
        last_rejected = true;
        continue;
      }
      StepProposal proposal = controller.propose(step.error_estimate, h);
      result.trace.entries.push_back(
          {result.t, h, proposal.accept, step.error_estimate, step.linear_iterations, false});
      if (!proposal.accept) {
        h = proposal.h_next;
        last_rejected = true;
        continue;
      }
      result.t = final_step ? t_end : result.t + h;
      result.state = std::move(step.state);
      result.projected_components += bounds.projected;
      result.max_projection = std::max(result.max_projection, bounds.max_correction);
      ++accepted;
      const double h_taken = h;
      h = last_rejected ? std::min(proposal.h_next, h) : proposal.h_next;
      last_rejected = false;
      result.h_next = h;
      if (notify(observers, StepInfo{result.t, h_taken, accepted, step.error_estimate, result.state})) {
        result.stopped_early = result.t < t_end;
        result.stop_reason = "observer stop";
        return result;
      }
    }
  } catch (const IntegrationAbort& e) {
    const std::string what = std::string(e.what()) + " at t=" + std::to_string(result.t);
    throw AbortedIntegration(what, std::move(result));
  }
  return result;
}

IntegrationResult integrate_fixed(const OdeSystem& system, std::vector<double> y0, double t0, double t_end,
                                  double h, const RowTableau& tableau, const SolveOptions& linear) {
  if (!(t_end > t0) || !(h > 0.0)) throw ParameterError("fixed-step integration needs t_end > t0 and h > 0");
  IntegrationResult result;
  result.state = std::move(y0);
  result.t = t0;
  const auto steps = static_cast<long>(std::llround((t_end - t0) / h));
  for (long k = 0; k < std::max(1L, steps); ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const double step_h = (k + 1 == std::max(1L, steps)) ? t_end - t : h;
    StepOutcome step = row_step(system, result.state, t, step_h, tableau, {}, linear);
    if (!step.ok) throw IntegrationAbort("fixed step failed at t=" + std::to_string(t) + ": " + step.failure);
    result.trace.entries.push_back({t, step_h, true, step.error_estimate, step.linear_iterations, false});
    result.state = std::move(step.state);
    result.t = t + step_h;
  }
  result.t = t_end;
  return result;
}

}  // namespace biosim
