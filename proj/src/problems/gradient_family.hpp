#pragma once

#include "lvpp/problems.hpp"

namespace lvpp::detail {

// alpha * stiffness_weight * (grad u, grad v) + (psi - psi_prev, grad v) = alpha (f, v)
// grad u = phi psi / sqrt(1 + |psi|^2) on each cell
SaddleProblem build_gradient_family(std::shared_ptr<const P1Space> space, const ScalarField& force,
                                    const ScalarField& radius, double stiffness_weight, std::string name);

std::shared_ptr<const P1Space> unit_space(int n, bool interval);

// Newton step limit for cellwise Hellinger latents stored at offset, dim
// components per cell: where the linearized gradient leaves the ball the
// latent correction is amplified by the saturation of the map, so its
// growth per step is capped relative to 1 + |psi| on the cell.
std::function<double(std::span<const double>, std::span<const double>)> hellinger_step_limit(std::size_t offset,
                                                                                           std::size_t cells,
                                                                                           int dim);

}  // namespace lvpp::detail
