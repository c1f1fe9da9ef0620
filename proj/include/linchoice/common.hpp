#ifndef LINCHOICE_COMMON_HPP
#define LINCHOICE_COMMON_HPP

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace linchoice {

/// Row-major so that `row(i)` of a candidate or voter matrix is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Input data violates a model invariant (normalization, ranking shape, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The reported rankings admit no consistent voter vectors.
class RealizabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline thread_local std::optional<std::chrono::steady_clock::time_point> tls_deadline;

}  // namespace detail

/// Installs a cooperative deadline for the current thread. Long-running loops
/// call `poll_deadline()`, which throws TimeoutError once the deadline passes.
class ScopedDeadline {
 public:
  explicit ScopedDeadline(std::chrono::milliseconds budget)
      : previous_(detail::tls_deadline) {
    detail::tls_deadline = std::chrono::steady_clock::now() + budget;
  }
  ~ScopedDeadline() { detail::tls_deadline = previous_; }
  ScopedDeadline(const ScopedDeadline&) = delete;
  ScopedDeadline& operator=(const ScopedDeadline&) = delete;

 private:
  std::optional<std::chrono::steady_clock::time_point> previous_;
};

inline void poll_deadline() {
  if (detail::tls_deadline && std::chrono::steady_clock::now() > *detail::tls_deadline) {
    throw TimeoutError("deadline exceeded");
  }
}

}  // namespace linchoice

#endif  // LINCHOICE_COMMON_HPP
