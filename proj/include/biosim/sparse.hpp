#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace biosim {

/// Square sparse matrix in diagonal (DIA) storage.
///
/// Entry (r, r + offset) lives at diagonals().at(offset)[r]. Positions whose
/// column falls outside [0, n) are kept at zero. Stencil operators on an
/// N x M grid use offsets {0, +-1, +-M} inside each species block and
/// multiples of N*M for the diagonal coupling blocks between species.
class StencilMatrix {
 public:
  using Offset = std::ptrdiff_t;

  explicit StencilMatrix(std::size_t n = 0) : n_(n) {}
  static StencilMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// Diagonal with the given offset, created zero-filled if missing.
  std::vector<double>& diagonal(Offset offset);
  const std::map<Offset, std::vector<double>>& diagonals() const noexcept { return diagonals_; }

  /// A(row, col) += value. Throws std::out_of_range outside the matrix.
  void add(std::size_t row, std::size_t col, double value);
  double at(std::size_t row, std::size_t col) const;

  /// y = A x. Throws std::invalid_argument on dimension mismatch.
  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> matvec(std::span<const double> x) const;

  /// Row-major dense copy; for tests and small systems only.
  std::vector<double> to_dense() const;

 private:
  std::size_t n_;
  std::map<Offset, std::vector<double>> diagonals_;
};

/// Returns I - gamma_h * A, leaving A untouched.
StencilMatrix shift_scale(const StencilMatrix& a, double gamma_h);

enum class Preconditioner { None, Jacobi };

struct SolveOptions {
  double rel_tol = 1e-10;
  int max_iter = 1000;
  Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;  ///< ||b - A x|| / ||b||, true residual
  bool converged = false;          ///< implies relative_residual <= rel_tol
  bool breakdown = false;          ///< rho or omega vanished
};

/// Stabilised bi-conjugate gradients. `x` carries the initial guess in and
/// the approximate solution out. Deterministic for fixed inputs and kernel
/// backend.
SolveReport bicgstab(const StencilMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolveOptions& options = {});

}  // namespace biosim
