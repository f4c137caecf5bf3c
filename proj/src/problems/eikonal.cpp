#include <limits>

#include "gradient_family.hpp"

namespace lvpp {

// Maximizing the integral of u under |grad u| <= 1 is the gradient-constrained
// problem without the Dirichlet energy and with unit load.
SaddleProblem build_eikonal(int n, bool interval) {
  return detail::build_gradient_family(detail::unit_space(n, interval), constant_field(1.0), constant_field(1.0),
                                       0.0, "eikonal");
}

AlphaSchedule eikonal_schedule() { return AlphaSchedule::capped_geometric(20.0, 2.0, 50.0); }

}  // namespace lvpp
