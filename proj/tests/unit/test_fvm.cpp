#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "biosim/errors.hpp"
#include "biosim/fvm.hpp"
#include "biosim/model.hpp"
#include "biosim/problems.hpp"

using namespace biosim;

namespace {

std::vector<double> random_state(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> y(n);
  for (double& v : y) v = d(rng);
  return y;
}

// Independent cell-by-cell evaluation on explicit (i, j) neighbours.
std::vector<double> biofilm_oracle(const Grid& g, const std::vector<double>& y, const BiofilmParams& p) {
  const int n = g.nx();
  const int m = g.ny();
  const double h = g.dx();
  auto U = [&](int i, int j) { return y[(i - 1) * m + (j - 1)]; };
  auto C = [&](int i, int j) { return y[n * m + (i - 1) * m + (j - 1)]; };
  auto D = [&](double u) { return diffusion_coefficient(u, p, {}); };
  std::vector<double> f(y.size());
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      double fu = 0.0;
      double fc = 0.0;
      const int di[] = {-1, 1, 0, 0};
      const int dj[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int a = i + di[k];
        const int b = j + dj[k];
        if (a >= 1 && a <= n && b >= 1 && b <= m) {
          fu += 0.5 * (D(U(i, j)) + D(U(a, b))) * (U(a, b) - U(i, j)) / (h * h);
          fc += p.d_c * (C(a, b) - C(i, j)) / (h * h);
        } else if (b > m) {
          // top: U = 0 at the face, C through the boundary layer
          fu += D(0.0) * (0.0 - U(i, j)) / (0.5 * h * h);
          fc += 2.0 * p.d_c * (1.0 - C(i, j)) / ((h + 2.0 * p.lambda) * h);
        }
      }
      const double u = U(i, j);
      const double c = C(i, j);
      f[(i - 1) * m + (j - 1)] = fu + (c / (p.K_U + c) - p.k) * u;
      f[n * m + (i - 1) * m + (j - 1)] = fc - p.nu_U * c * u / (p.K_U + c);
    }
  }
  return f;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("face fluxes by hand") {
  CHECK(face_flux(1.0, 3.0, 2.0, 4.0, 0.5) == doctest::Approx(3.0 * 2.0 / 0.5));
  CHECK(dirichlet_boundary_flux(0.25, 1.0, 2.0, 0.5) == doctest::Approx(2.0 * 0.75 / 0.25));
  // lambda = 0 reduces to the Dirichlet flux.
  CHECK(robin_boundary_flux(0.25, 1.0, 0.0, 2.0, 0.5) == doctest::Approx(dirichlet_boundary_flux(0.25, 1.0, 2.0, 0.5)));
  CHECK(robin_boundary_flux(0.25, 1.0, 0.1, 2.0, 0.5) == doctest::Approx(2.0 * 2.0 * 0.75 / 0.7));
}

TEST_CASE("3x3 biofilm right-hand side against a brute-force oracle") {
  for (double lambda : {0.0, 0.05}) {
    BiofilmParams p;
    p.delta = 0.3;  // make biomass diffusion visible next to the reactions
    p.lambda = lambda;
    const Grid g = Grid::square(3);
    const Colony none{0.5, 0.0, 0.1, 0.0};
    const Problem prob = build_biofilm(g, p, {}, {&none, 1});
    const auto y = random_state(prob.system.size(), 0.1, 0.8, 3);
    CHECK(max_rel_diff(prob.system.rhs(0.0, y), biofilm_oracle(g, y, p)) < 1e-13);
  }
}

TEST_CASE("all-Neumann diffusion conserves mass and mirrors") {
  const Grid g(6, 4, 1.5, 1.0);
  PmeParams p;
  p.k_growth = 0.0;
  const Problem prob = build_pme(g, p, Regularization(1e-3));
  auto y = random_state(prob.system.size(), 0.0, 1.0, 5);
  const auto f = prob.system.rhs(0.0, y);
  double sum = 0.0;
  double scale = 0.0;
  for (double v : f) {
    sum += v;
    scale += std::abs(v);
  }
  CHECK(std::abs(sum) <= 1e-13 * scale);

  std::vector<double> mirrored(y.size());
  for (int i = 1; i <= g.nx(); ++i)
    for (int j = 1; j <= g.ny(); ++j) mirrored[g.offset(g.nx() + 1 - i, j)] = y[g.offset(i, j)];
  const auto fm = prob.system.rhs(0.0, mirrored);
  for (int i = 1; i <= g.nx(); ++i)
    for (int j = 1; j <= g.ny(); ++j) CHECK(fm[g.offset(g.nx() + 1 - i, j)] == f[g.offset(i, j)]);
  CHECK(prob.system.boundary().mirror_symmetric());
}

TEST_CASE("jacobian matches central differences") {
  const Grid g = Grid::square(4);
  QsParams q;
  q.base.lambda = 0.02;
  const Problem prob = build_qs(g, q, Regularization(1e-3), central_colony(1.0), 1.0);
  auto y = random_state(prob.system.size(), 0.1, 0.8, 11);
  const auto j = prob.system.jacobian(0.0, y).to_dense();
  const std::size_t n = y.size();
  double jmax = 0.0;
  for (double v : j) jmax = std::max(jmax, std::abs(v));
  for (std::size_t c = 0; c < n; ++c) {
    const double h = 1e-6;
    auto yp = y;
    auto ym = y;
    yp[c] += h;
    ym[c] -= h;
    const auto fp = prob.system.rhs(0.0, yp);
    const auto fm = prob.system.rhs(0.0, ym);
    for (std::size_t r = 0; r < n; ++r) {
      const double fd = (fp[r] - fm[r]) / (2 * h);
      CHECK(std::abs(fd - j[r * n + c]) <= 1e-5 * std::max(std::abs(fd), 1e-3 * jmax));
    }
  }
}

TEST_CASE("picard split reproduces the diffusion part") {
  const Grid g = Grid::square(5);
  BiofilmParams p;
  p.delta = 0.2;
  p.k = 0.0;
  p.nu_U = 0.0;
  p.lambda = 0.1;
  const Colony none{0.5, 0.0, 0.1, 0.0};
  const Problem prob = build_biofilm(g, p, Regularization(1e-2), {&none, 1});
  auto y = random_state(prob.system.size(), 0.1, 0.8, 2);
  // nu_U = 0 leaves the C block free of reactions.
  const auto split = prob.system.diffusion_operator(y);
  const auto f = prob.system.rhs(0.0, y);
  auto ay = split.matrix.matvec(y);
  const std::size_t n = g.cell_count();
  for (std::size_t i = n; i < 2 * n; ++i) CHECK(ay[i] + split.source[i] == doctest::Approx(f[i]).epsilon(1e-12));
}

TEST_CASE("construction and evaluation errors") {
  const Grid g = Grid::square(3);
  CHECK_THROWS_AS(SemiDiscreteSystem(g, {"A"}, {}, BoundarySpec::all_neumann(1)), ParameterError);
  BoundarySpec robin = BoundarySpec::all_neumann(1);
  robin.species[0][Edge::North] = EdgeCondition::robin(1.0, 0.1);
  auto law = DiffusionLaw::nonlinear([](double u) { return u; }, [](double) { return 1.0; });
  CHECK_THROWS_AS(SemiDiscreteSystem(g, {"A"}, {law}, robin), ParameterError);
  const SemiDiscreteSystem sys(g, {"A"}, {DiffusionLaw::constant(1.0)}, BoundarySpec::all_neumann(1));
  std::vector<double> y(9, 0.5);
  y[4] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(sys.rhs(0.0, y), EvaluationError);
  CHECK_THROWS_AS(sys.rhs(0.0, std::vector<double>(8, 0.0)), ParameterError);
}
