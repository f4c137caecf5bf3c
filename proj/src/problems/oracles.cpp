#include <algorithm>
#include <stdexcept>

#include "lvpp/problems.hpp"

namespace lvpp {

double distance_to_boundary(const Box& box, const Point& p) {
  if (p.x < box.x_min || p.x > box.x_max || p.y < box.y_min || p.y > box.y_max) {
    throw std::invalid_argument("distance_to_boundary: point lies outside the box");
  }
  return std::min({p.x - box.x_min, box.x_max - p.x, p.y - box.y_min, box.y_max - p.y});
}

double distance_to_boundary(double a, double b, double x) {
  if (x < a || x > b) throw std::invalid_argument("distance_to_boundary: point lies outside the interval");
  return std::min(x - a, b - x);
}

}  // namespace lvpp
