#pragma once

#include <functional>
#include <vector>

namespace lvpp {

using Vector = std::vector<double>;

/// Spatial point. One-dimensional problems leave y at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Scalar coefficient field evaluated at a spatial point.
using ScalarField = std::function<double(const Point&)>;

inline ScalarField constant_field(double value) {
  return [value](const Point&) { return value; };
}

}  // namespace lvpp
