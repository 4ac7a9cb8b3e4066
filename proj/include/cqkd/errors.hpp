#pragma once

#include <stdexcept>
#include <string>

namespace cqkd {

/// An occupation number went past the configured photon-number cap.
struct cap_exceeded : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct unnormalized_state : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct dimension_mismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised by the isometry validator; carries the worst Gram-matrix deviation.
struct not_isometric : std::invalid_argument {
  not_isometric(const std::string& what, double deviation)
      : std::invalid_argument(what), max_deviation(deviation) {}
  double max_deviation;
};

struct infeasible_completion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cqkd
