#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

#include "biosim/sparse.hpp"

namespace biosim {

/// y' = f(t, y) with an analytic Jacobian in stencil storage.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual std::size_t size() const = 0;
  virtual void rhs(double t, std::span<const double> y, std::span<double> f) const = 0;
  virtual StencilMatrix jacobian(double t, std::span<const double> y) const = 0;

  virtual bool autonomous() const { return true; }
  /// df/dt; only consulted when autonomous() is false.
  virtual void time_derivative(double /*t*/, std::span<const double> /*y*/, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
  }
};

}  // namespace biosim
