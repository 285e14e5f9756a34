#include <doctest.h>

#include <cmath>
#include <sstream>

#include "biosim/errors.hpp"
#include "biosim/integrator.hpp"

using namespace biosim;

namespace {

class Linear final : public OdeSystem {
 public:
  explicit Linear(double lambda) : lambda_(lambda) {}
  std::size_t size() const override { return 1; }
  void rhs(double, std::span<const double> y, std::span<double> f) const override { f[0] = lambda_ * y[0]; }
  StencilMatrix jacobian(double, std::span<const double>) const override {
    StencilMatrix j(1);
    j.add(0, 0, lambda_);
    return j;
  }

 private:
  double lambda_;
};

// y' = lambda (y - cos t) - sin t, exact y = cos t; stiff for large |lambda|.
class Prothero final : public OdeSystem {
 public:
  explicit Prothero(double lambda = -50.0) : lambda_(lambda) {}
  std::size_t size() const override { return 1; }
  void rhs(double t, std::span<const double> y, std::span<double> f) const override {
    f[0] = lambda_ * (y[0] - std::cos(t)) - std::sin(t);
  }
  StencilMatrix jacobian(double, std::span<const double>) const override {
    StencilMatrix j(1);
    j.add(0, 0, lambda_);
    return j;
  }
  bool autonomous() const override { return false; }
  void time_derivative(double t, std::span<const double>, std::span<double> out) const override {
    out[0] = lambda_ * std::sin(t) - std::cos(t);
  }

 private:
  double lambda_;
};

// Two decoupled species, the second a fast decay pushing towards zero.
class Decay2 final : public OdeSystem {
 public:
  std::size_t size() const override { return 2; }
  void rhs(double, std::span<const double> y, std::span<double> f) const override {
    f[0] = -y[0];
    f[1] = -1000.0 * y[1];
  }
  StencilMatrix jacobian(double, std::span<const double>) const override {
    StencilMatrix j(2);
    j.add(0, 0, -1.0);
    j.add(1, 1, -1000.0);
    return j;
  }
};

class Exploding final : public OdeSystem {
 public:
  std::size_t size() const override { return 1; }
  void rhs(double, std::span<const double>, std::span<double> f) const override {
    f[0] = std::numeric_limits<double>::quiet_NaN();
  }
  StencilMatrix jacobian(double, std::span<const double>) const override { return StencilMatrix::identity(1); }
};

double sum_b(const std::vector<double>& b) {
  double s = 0.0;
  for (double v : b) s += v;
  return s;
}

// Order conditions of a ROW method with beta_ij = alpha_ij + gamma_ij.
void check_order(const RowTableau& t, const std::vector<double>& b, int order) {
  const int s = t.stages;
  std::vector<double> alpha_i(s, 0.0);
  std::vector<double> beta_i(s, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < i; ++j) {
      alpha_i[i] += t.alpha[i][j];
      beta_i[i] += t.alpha[i][j] + t.gamma_ij[i][j];
    }
  const double g = t.gamma;
  CHECK(sum_b(b) == doctest::Approx(1.0).epsilon(1e-14));
  if (order < 2) return;
  double c2 = 0.0;
  for (int i = 0; i < s; ++i) c2 += b[i] * beta_i[i];
  CHECK(c2 == doctest::Approx(0.5 - g).epsilon(1e-13));
  if (order < 3) return;
  double c3a = 0.0;
  double c3b = 0.0;
  for (int i = 0; i < s; ++i) {
    c3a += b[i] * alpha_i[i] * alpha_i[i];
    for (int j = 0; j < i; ++j) c3b += b[i] * (t.alpha[i][j] + t.gamma_ij[i][j]) * beta_i[j];
  }
  CHECK(c3a == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(c3b == doctest::Approx(1.0 / 6.0 - g + g * g).epsilon(1e-13));
}

}  // namespace

TEST_CASE("tableaus satisfy their order conditions") {
  for (const std::string& name : row_tableau_names()) {
    CAPTURE(name);
    const RowTableau& t = row_tableau(name);
    check_order(t, t.b, t.order);
    check_order(t, t.b_hat, t.embedded_order);
    for (int i = 0; i < t.stages; ++i) CHECK(t.gamma_ij[i][i] == t.gamma);
  }
  CHECK(row_tableau("ros3pl").name == row_tableau("ros3prl2").name);
  CHECK_THROWS_AS(row_tableau("rk4"), ParameterError);
}

namespace {
double observed_order(const OdeSystem& sys, const RowTableau& tab) {
  std::vector<double> err;
  for (double h : {0.02, 0.01, 0.005}) {
    const auto r = integrate_fixed(sys, {1.0}, 0.0, 1.0, h, tab);
    err.push_back(std::abs(r.state[0] - std::cos(1.0)));
  }
  return std::log2(err[1] / err[2]);
}
}  // namespace

TEST_CASE("fixed-step convergence orders") {
  for (const std::string& name : row_tableau_names()) {
    CAPTURE(name);
    const RowTableau& tab = row_tableau(name);
    CHECK(std::abs(observed_order(Prothero(-1.0), tab) - tab.order) < 0.2);
  }
  // ros3prl2 is built to keep its order on this stiff test.
  CHECK(observed_order(Prothero(-50.0), row_tableau("ros3prl2")) > 2.7);
}

TEST_CASE("linear decay is exact to tolerance") {
  const Linear sys(-2.0);
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    IntegratorOptions o;
    o.controller.tol = tol;
    const auto r = integrate(sys, {1.0}, 0.0, 1.0, o);
    CHECK(r.t == 1.0);
    CHECK(std::abs(r.state[0] - std::exp(-2.0)) < 100 * tol);
  }
}

TEST_CASE("tolerance sweep: error and work are monotone") {
  const Prothero sys;
  double prev_err = INFINITY;
  std::size_t prev_steps = 0;
  for (double tol : {1e-3, 1e-5, 1e-7, 1e-9}) {
    IntegratorOptions o;
    o.controller.tol = tol;
    const auto r = integrate(sys, {1.0}, 0.0, 2.0, o);
    const double err = std::abs(r.state[0] - std::cos(2.0));
    CHECK(err < prev_err);
    CHECK(r.trace.accepted_count() >= prev_steps);
    for (const auto& e : r.trace.entries)
      if (e.accepted) CHECK(e.error_estimate <= tol);
    prev_err = err;
    prev_steps = r.trace.accepted_count();
  }
}

TEST_CASE("controller step proposals") {
  ControllerOptions opt;
  opt.tol = 1e-4;
  StepController c(opt, 2);
  auto p = c.propose(1e-4 / 8.0, 0.1);
  CHECK(p.accept);
  CHECK(p.h_next == doctest::Approx(0.1 * 0.9 * 2.0));
  p = c.propose(1e-12, 0.1);
  CHECK(p.h_next == doctest::Approx(0.5));
  p = c.propose(1.0, 0.1);
  CHECK_FALSE(p.accept);
  CHECK(p.h_next == doctest::Approx(0.02));
  CHECK(c.consecutive_rejections() == 1);
  CHECK(c.fail(0.1).h_next == doctest::Approx(0.05));
  for (int k = 0; k < 18; ++k) c.fail(0.1);
  CHECK_THROWS_AS(c.fail(0.1), IntegrationAbort);
}

TEST_CASE("bounds projection") {
  const StateBounds b[] = {{0, 2, 0.0, 1.0, true}, {2, 1, 0.0}};
  std::vector<double> y{-1e-9, 1.0, -1e-3};
  auto out = enforce_bounds(b, y, 1e-7, 1e-7);
  CHECK_FALSE(out.admissible);
  CHECK(y[0] == -1e-9);
  y = {-1e-9, 1.0, -1e-8};
  out = enforce_bounds(b, y, 1e-7, 1e-7);
  CHECK(out.admissible);
  CHECK(out.projected == 3);
  CHECK(y[0] == 0.0);
  CHECK(y[1] < 1.0);
  CHECK(y[2] == 0.0);
  CHECK(out.max_correction == doctest::Approx(1e-8));
  CHECK(b[0].contains(std::vector<double>{0.0, 0.5, 5.0}));
  CHECK_FALSE(b[0].contains(std::vector<double>{0.0, 1.0, 5.0}));
}

TEST_CASE("bounded integration stays in the box") {
  const Decay2 sys;
  IntegratorOptions o;
  o.controller.tol = 1e-3;
  o.h0 = 0.1;
  o.bounds = {{0, 2, 0.0}};
  Observer obs = [](const StepInfo& s) {
    CHECK(s.state[0] >= 0.0);
    CHECK(s.state[1] >= 0.0);
    return ObserverAction::Continue;
  };
  const auto r = integrate(sys, {1.0, 1.0}, 0.0, 5.0, o, {&obs, 1});
  CHECK(r.t == 5.0);
}

TEST_CASE("observer stop and trace bookkeeping") {
  const Linear sys(-1.0);
  IntegratorOptions o;
  int calls = 0;
  Observer obs = [&](const StepInfo& s) {
    ++calls;
    return s.t > 0.5 ? ObserverAction::Stop : ObserverAction::Continue;
  };
  const auto r = integrate(sys, {1.0}, 0.0, 10.0, o, {&obs, 1});
  CHECK(r.stopped_early);
  CHECK(r.t > 0.5);
  CHECK(r.t < 10.0);
  CHECK(static_cast<std::size_t>(calls) == r.trace.accepted_count() + 1);
  CHECK(r.h_next > 0.0);
  std::ostringstream os;
  r.trace.write_csv(os);
  CHECK(os.str().rfind("t,h,accepted,err_est,lin_iters\n", 0) == 0);
}

TEST_CASE("aborts carry the partial result") {
  const Exploding sys;
  try {
    integrate(sys, {1.0}, 0.0, 1.0, {});
    FAIL("expected an abort");
  } catch (const AbortedIntegration& e) {
    CHECK(e.partial().t == 0.0);
    CHECK(e.partial().trace.rejected_count() == 21);
  }
  IntegratorOptions o;
  o.max_steps = 3;
  CHECK_THROWS_AS(integrate(Linear(-1.0), {1.0}, 0.0, 100.0, o), IntegrationAbort);
  CHECK_THROWS_AS(integrate(Linear(-1.0), {1.0}, 1.0, 0.0, {}), ParameterError);
  CHECK_THROWS_AS(integrate(Linear(-1.0), {1.0, 2.0}, 0.0, 1.0, {}), ParameterError);
}
