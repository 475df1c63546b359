#pragma once

#include <functional>
#include <optional>

namespace causalforge {

/// One progress record emitted by an iterative learner.
struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  std::optional<double> h;   ///< acyclicity value, when the method tracks one
  std::optional<double> rho; ///< penalty parameter, when the method has one

  friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

using TraceSink = std::function<void(const TraceEntry &)>;

} // namespace causalforge
