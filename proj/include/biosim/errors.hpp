#pragma once

#include <stdexcept>
#include <string>

namespace biosim {

/// Invalid model, grid or run parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cell or flat index outside the grid.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Right-hand side or Jacobian evaluated on a state with non-finite entries.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration gave up (repeated rejection at the minimum step).
class IntegrationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace biosim
