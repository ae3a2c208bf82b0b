#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace sodeint {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Structure of the driving noise.  Everything except General can be
/// integrated with Milstein-type schemes from the Wiener increments alone;
/// General noise would require a Levy-area approximation and is rejected.
enum class NoiseStructure { Additive, Scalar, Diagonal, Commutative, General };

std::string to_string(NoiseStructure s);
NoiseStructure noise_structure_from_string(const std::string& name);

/// An implicit step failed to reach its residual tolerance.  Carries the
/// last Newton iterate and its residual for diagnosis.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Vector last_iterate, double residual)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual) {}

  const Vector& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Vector last_iterate_;
  double residual_;
};

/// A step produced a non-finite state.  Explicit schemes may diverge on
/// super-linear coefficients; the step index is filled in by integrate().
class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(const std::string& what, std::int64_t step = -1)
      : std::runtime_error(what), step_index(step) {}

  std::int64_t step_index;
};

}  // namespace sodeint
