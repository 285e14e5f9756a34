#include "biosim/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "biosim/simd/kernels.hpp"

namespace biosim {

namespace {

// Row range [lo, hi) whose column r + offset is inside the matrix.
std::pair<std::size_t, std::size_t> band(std::size_t n, StencilMatrix::Offset offset) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn, sn - offset);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

StencilMatrix StencilMatrix::identity(std::size_t n) {
  StencilMatrix m(n);
  m.diagonal(0).assign(n, 1.0);
  return m;
}

std::vector<double>& StencilMatrix::diagonal(Offset offset) {
  auto it = diagonals_.find(offset);
  if (it == diagonals_.end()) it = diagonals_.emplace(offset, std::vector<double>(n_, 0.0)).first;
  return it->second;
}

void StencilMatrix::add(std::size_t row, std::size_t col, double value) {
  if (row >= n_ || col >= n_) {
    throw std::out_of_range("matrix entry (" + std::to_string(row) + "," + std::to_string(col) +
                            ") outside dimension " + std::to_string(n_));
  }
  diagonal(static_cast<Offset>(col) - static_cast<Offset>(row))[row] += value;
}

double StencilMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= n_ || col >= n_) throw std::out_of_range("matrix entry outside dimension");
  const auto it = diagonals_.find(static_cast<Offset>(col) - static_cast<Offset>(row));
  return it == diagonals_.end() ? 0.0 : it->second[row];
}

void StencilMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) {
    throw std::invalid_argument("matvec dimension mismatch: matrix " + std::to_string(n_) +
                                ", x " + std::to_string(x.size()) + ", y " + std::to_string(y.size()));
  }
  std::fill(y.begin(), y.end(), 0.0);
  const auto& k = simd::kernels();
  for (const auto& [offset, d] : diagonals_) {
    const auto [lo, hi] = band(n_, offset);
    if (hi == lo) continue;
    k.multiply_add(d.data() + lo, x.data() + static_cast<std::ptrdiff_t>(lo) + offset, y.data() + lo,
                   hi - lo);
  }
}

std::vector<double> StencilMatrix::matvec(std::span<const double> x) const {
  std::vector<double> y(n_);
  matvec(x, y);
  return y;
}

std::vector<double> StencilMatrix::to_dense() const {
  std::vector<double> dense(n_ * n_, 0.0);
  for (const auto& [offset, d] : diagonals_) {
    const auto [lo, hi] = band(n_, offset);
    for (std::size_t r = lo; r < hi; ++r) {
      dense[r * n_ + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(r) + offset)] = d[r];
    }
  }
  return dense;
}

StencilMatrix shift_scale(const StencilMatrix& a, double gamma_h) {
  StencilMatrix out(a.size());
  for (const auto& [offset, d] : a.diagonals()) {
    auto& o = out.diagonal(offset);
    for (std::size_t r = 0; r < d.size(); ++r) o[r] = -gamma_h * d[r];
  }
  auto& main = out.diagonal(0);
  for (double& v : main) v += 1.0;
  return out;
}

SolveReport bicgstab(const StencilMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolveOptions& options) {
  const std::size_t n = a.size();
  if (b.size() != n || x.size() != n) throw std::invalid_argument("bicgstab dimension mismatch");

  SolveReport report;
  const double bnorm = simd::norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }

  std::vector<double> inv_diag;
  if (options.preconditioner == Preconditioner::Jacobi) {
    inv_diag.assign(n, 1.0);
    const auto it = a.diagonals().find(0);
    if (it != a.diagonals().end()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (it->second[i] != 0.0) inv_diag[i] = 1.0 / it->second[i];
      }
    }
  }
  const auto precondition = [&](std::span<const double> in, std::span<double> out) {
    if (inv_diag.empty()) {
      std::copy(in.begin(), in.end(), out.begin());
    } else {
      simd::multiply(inv_diag, in, out);
    }
  };

  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  const auto true_residual = [&]() {
    a.matvec(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return simd::norm2(r) / bnorm;
  };

  const double target = options.rel_tol;
  report.relative_residual = true_residual();
  if (report.relative_residual <= target) {
    report.converged = true;
    return report;
  }
  std::copy(r.begin(), r.end(), rhat.begin());
  const double rhat_norm = simd::norm2(rhat);

  double rho_prev = 1.0;
  double alpha = 1.0;
  double omega = 1.0;
  bool fresh = true;
  constexpr double kBreakdown = 1e-30;

  while (report.iterations < options.max_iter) {
    ++report.iterations;
    const double rho = simd::dot(rhat, r);
    if (!std::isfinite(rho) || std::abs(rho) <= kBreakdown * rhat_norm * simd::norm2(r)) {
      report.breakdown = true;
      break;
    }
    if (fresh) {
      std::copy(r.begin(), r.end(), p.begin());
      fresh = false;
    } else {
      const double beta = (rho / rho_prev) * (alpha / omega);
      simd::axpy(-omega, v, p);  // p - omega v
      simd::xpby(r, beta, p);    // r + beta (p - omega v)
    }
    precondition(p, phat);
    a.matvec(phat, v);
    const double denom = simd::dot(rhat, v);
    if (!std::isfinite(denom) || denom == 0.0) {
      report.breakdown = true;
      break;
    }
    alpha = rho / denom;
    std::copy(r.begin(), r.end(), s.begin());
    simd::axpy(-alpha, v, s);
    if (simd::norm2(s) / bnorm <= target) {
      simd::axpy(alpha, phat, x);
      report.relative_residual = true_residual();
      if (report.relative_residual <= target) {
        report.converged = true;
        return report;
      }
      fresh = true;
      rho_prev = 1.0;
      continue;
    }
    precondition(s, shat);
    a.matvec(shat, t);
    const double tt = simd::dot(t, t);
    omega = tt > 0.0 ? simd::dot(t, s) / tt : 0.0;
    simd::axpy(alpha, phat, x);
    simd::axpy(omega, shat, x);
    std::copy(s.begin(), s.end(), r.begin());
    simd::axpy(-omega, t, r);
    const double rel = simd::norm2(r) / bnorm;
    if (!std::isfinite(rel)) {
      report.breakdown = true;
      break;
    }
    if (rel <= target) {
      report.relative_residual = true_residual();
      if (report.relative_residual <= target) {
        report.converged = true;
        return report;
      }
      // recursive residual drifted from the true one; continue from the true residual
      fresh = true;
      rho_prev = 1.0;
      continue;
    }
    if (omega == 0.0) {
      report.breakdown = true;
      break;
    }
    rho_prev = rho;
  }
  report.relative_residual = true_residual();
  report.converged = report.relative_residual <= target;
  return report;
}

}  // namespace biosim
