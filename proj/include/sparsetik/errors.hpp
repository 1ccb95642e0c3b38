#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsetik {

class DimensionError : public std::invalid_argument {
public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : std::invalid_argument(what + ": expected dimension " + std::to_string(expected) +
                              ", got " + std::to_string(actual)),
        expected_(expected), actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

private:
  std::size_t expected_;
  std::size_t actual_;
};

// Thrown by cg_solve when p'Ap <= 0 is encountered.
class NonPositiveCurvature : public std::runtime_error {
public:
  explicit NonPositiveCurvature(std::size_t iteration)
      : std::runtime_error("conjugate gradient: non-positive curvature at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

class DivergenceError : public std::runtime_error {
public:
  DivergenceError() : std::runtime_error("divergence; reduce omega") {}
};

inline void check_dimension(const char* what, std::size_t expected, std::size_t actual) {
  if (expected != actual) throw DimensionError(what, expected, actual);
}

}  // namespace sparsetik
