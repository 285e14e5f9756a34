#pragma once

// Vector kernels behind the sparse solver. Every kernel has a scalar
// reference implementation; AVX2 (x86-64) and NEON (aarch64) variants are
// compiled in separate translation units and picked at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace biosim::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  /// sum a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = x + b*y
  void (*xpby)(const double* x, double b, double* y, std::size_t n);
  /// y += d*x elementwise
  void (*multiply_add)(const double* d, const double* x, double* y, std::size_t n);
  /// out = a*b elementwise
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled for this target.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

/// Compiled in and supported by the running CPU.
bool backend_available(Backend b) noexcept;
Backend best_available_backend() noexcept;
std::string_view backend_name(Backend b) noexcept;

/// Kernels used by the solver. Starts at best_available_backend().
const KernelTable& kernels() noexcept;
Backend active_backend() noexcept;
/// Returns false (and changes nothing) when the backend is unavailable.
bool set_backend(Backend b) noexcept;

/// Restores the previous backend on scope exit.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) noexcept : previous_(active_backend()) { set_backend(b); }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline double norm2(std::span<const double> a) noexcept;
inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  kernels().axpy(a, x.data(), y.data(), y.size());
}
inline void xpby(std::span<const double> x, double b, std::span<double> y) noexcept {
  kernels().xpby(x.data(), b, y.data(), y.size());
}
inline void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) noexcept {
  kernels().multiply(a.data(), b.data(), out.data(), out.size());
}

}  // namespace biosim::simd

#include <cmath>

inline double biosim::simd::norm2(std::span<const double> a) noexcept {
  return std::sqrt(dot(a, a));
}
