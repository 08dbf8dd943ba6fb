#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>

namespace nlshape {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Bary = std::array<double, 3>;

// Thrown for malformed input (files, configs, invariant violations on load).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numerical contract cannot be met (inverted element, singular solve, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlshape
