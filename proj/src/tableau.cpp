#include <algorithm>
#include <cmath>
#include <string>

#include "biosim/errors.hpp"
#include "biosim/integrator.hpp"

namespace biosim {

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix lower_triangular_inverse(const Matrix& lower) {
  const std::size_t n = lower.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = col; row < n; ++row) {
      double s = row == col ? 1.0 : 0.0;
      for (std::size_t k = col; k < row; ++k) s -= lower[row][k] * inv[k][col];
      inv[row][col] = s / lower[row][row];
    }
  }
  return inv;
}

std::vector<double> row_times(const std::vector<double>& v, const Matrix& m) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t j = 0; j < m.size(); ++j) {
    for (std::size_t i = 0; i < v.size(); ++i) out[j] += v[i] * m[i][j];
  }
  return out;
}

// 4 stages, order 3, embedded order 2, L-stable (Rang 2013, ROS3PRL2).
RowTableau make_ros3prl2() {
  const double g = 4.3586652150845900e-01;
  return RowTableau::make(
      "ros3prl2", 3, 2,
      {{0, 0, 0, 0}, {1.3075995645253771e+00, 0, 0, 0}, {0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}},
      {{g, 0, 0, 0},
       {-1.3075995645253771e+00, g, 0, 0},
       {-7.0988575860972170e-01, -5.5996735960277766e-01, g, 0},
       {-1.5550856807552085e-01, -9.5388516575112225e-01, 6.7352721231818413e-01, g}},
      {3.4449143192447917e-01, -4.5388516575112231e-01, 6.7352721231818413e-01, g},
      {5.0000000000000000e-01, -2.5738812086522078e-01, 4.3542008724775044e-01, 3.2196803361747034e-01});
}

// 4 stages, order 3, embedded order 2, L-stable, stiffly accurate (Rang & Angermann 2005).
RowTableau make_ros34pw2() {
  const double g = 4.3586652150845900e-01;
  return RowTableau::make(
      "ros34pw2", 3, 2,
      {{0, 0, 0, 0},
       {8.7173304301691801e-01, 0, 0, 0},
       {8.4457060015369423e-01, -1.1299064236484185e-01, 0, 0},
       {0, 0, 1.0, 0}},
      {{g, 0, 0, 0},
       {-8.7173304301691801e-01, g, 0, 0},
       {-9.0338057013044082e-01, 5.4180672388095326e-02, g, 0},
       {2.4212380706095346e-01, -1.2232505839045147e+00, 5.4526025533510214e-01, g}},
      {2.4212380706095346e-01, -1.2232505839045147e+00, 1.5452602553351020e+00, g},
      {3.7810903145819369e-01, -9.6042292212423178e-02, 5.0000000000000000e-01, 2.1793326075422950e-01});
}

// 2 stages, order 2 with a first-order companion; gamma = 1 + 1/sqrt(2).
RowTableau make_ros2() {
  const double g = 1.0 + 1.0 / std::sqrt(2.0);
  return RowTableau::make("ros2", 2, 1, {{0, 0}, {1.0, 0}}, {{g, 0}, {-2.0 * g, g}}, {0.5, 0.5},
                          {1.0, 0.0});
}

}  // namespace

RowTableau RowTableau::make(std::string name, int order, int embedded_order, Matrix alpha, Matrix gamma_ij,
                            std::vector<double> b, std::vector<double> b_hat) {
  const std::size_t s = b.size();
  if (s == 0 || alpha.size() != s || gamma_ij.size() != s || b_hat.size() != s) {
    throw ParameterError("inconsistent tableau dimensions for " + name);
  }
  RowTableau t;
  t.name = std::move(name);
  t.stages = static_cast<int>(s);
  t.order = order;
  t.embedded_order = embedded_order;
  t.gamma = gamma_ij[0][0];
  for (std::size_t i = 0; i < s; ++i) {
    if (gamma_ij[i][i] != t.gamma) throw ParameterError("tableau needs a constant gamma diagonal");
  }
  t.alpha = std::move(alpha);
  t.gamma_ij = std::move(gamma_ij);
  t.b = std::move(b);
  t.b_hat = std::move(b_hat);

  t.c.assign(s, 0.0);
  t.gamma_sum.assign(s, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < i; ++j) t.c[i] += t.alpha[i][j];
    for (std::size_t j = 0; j <= i; ++j) t.gamma_sum[i] += t.gamma_ij[i][j];
  }

  const Matrix inv = lower_triangular_inverse(t.gamma_ij);
  t.a_transformed.assign(s, std::vector<double>(s, 0.0));
  t.c_transformed.assign(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t k = j; k < i; ++k) t.a_transformed[i][j] += t.alpha[i][k] * inv[k][j];
      t.c_transformed[i][j] = -inv[i][j];
    }
  }
  t.m = row_times(t.b, inv);
  t.m_hat = row_times(t.b_hat, inv);
  return t;
}

const RowTableau& row_tableau(std::string_view name) {
  static const RowTableau ros3prl2 = make_ros3prl2();
  static const RowTableau ros34pw2 = make_ros34pw2();
  static const RowTableau ros2 = make_ros2();
  if (name == "ros3prl2" || name == "ros3pl") return ros3prl2;
  if (name == "ros34pw2") return ros34pw2;
  if (name == "ros2") return ros2;
  throw ParameterError("unknown Rosenbrock tableau '" + std::string(name) + "'");
}

std::vector<std::string> row_tableau_names() { return {"ros3prl2", "ros3pl", "ros34pw2", "ros2"}; }

}  // namespace biosim
