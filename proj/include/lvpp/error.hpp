#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lvpp {

/// Raised by the sparse direct solver when factorization hits a zero pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by Newton when the residual becomes non-finite or the iteration
/// cannot make progress.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Mesh or operator assembly failure, e.g. a degenerate element.
class AssemblyError : public std::runtime_error {
 public:
  explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lvpp
