#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lvpp/assembly.hpp"
#include "lvpp/entropy.hpp"
#include "lvpp/lvpp.hpp"
#include "lvpp/mesh.hpp"

namespace lvpp {

// ---------------------------------------------------------------------------
// Obstacle problems: min 1/2|grad u|^2 - (f, u) over lower <= u (<= upper).

enum class Backend { FiniteDifference, P1 };

/// Where the latent iteration starts. Zero is psi^0 = 0; Consistent picks
/// psi^0 = grad R(u^0) for the zero initial guess (requires lower < 0 < upper
/// at every constrained node).
enum class LatentStart { Zero, Consistent };

struct ObstacleData {
  Box box = Box::square(-1.0, 1.0);
  ScalarField lower;
  ScalarField upper;  ///< empty for the unilateral problem
  ScalarField force = constant_field(0.0);
  ScalarField boundary = constant_field(0.0);  ///< Dirichlet data g
  Backend backend = Backend::FiniteDifference;
  /// FD: interior points per axis. P1: cells per axis (or cells on the interval).
  int n = 15;
  /// P1 only: solve on the interval [box.x_min, box.x_max] instead of the box.
  bool interval = false;
  LatentStart latent_start = LatentStart::Zero;
};

/// Benchmark obstacle: sqrt(1/4 - r^2) for r <= b, d + b^2/d - b r/d beyond,
/// with b = 9/20 and d = sqrt(1/4 - b^2).
double benchmark_obstacle(const Point& p);

/// Benchmark data on (-1, 1)^2 with f = 0 and zero boundary values.
ObstacleData obstacle_benchmark(Backend backend, int n);

/// Interior grid points per axis on (-1, 1) for FD mesh size h.
int fd_points_for_mesh_size(double h);

/// Layout: "u" and "psi" over the constrained nodes (FD interior grid nodes,
/// or free P1 vertices).
SaddleProblem build_obstacle(const ObstacleData& data);

// ---------------------------------------------------------------------------
// Gradient-norm constraints |grad u| <= phi, and the eikonal limit.

struct GradientData {
  Box box = Box::unit();
  ScalarField force;
  ScalarField radius;  ///< phi, must be positive
  int n = 64;          ///< cells per axis
  bool interval = false;
};

/// f = 15 sin^2(pi x), phi = 0.1 + 0.2 x + 0.4 y on the unit square.
GradientData gradient_preset(int n);

/// Layout: "u" on free vertices, "psi" cellwise (dim components, cell-major).
/// Latent recovery is the constrained cell gradient.
SaddleProblem build_gradient_constraint(const GradientData& data);

/// Eikonal equation |grad u| = 1, u = 0 on the boundary, as the maximizer of
/// the integral of u under |grad u| <= 1. Unit square (n cells per axis) or
/// unit interval.
SaddleProblem build_eikonal(int n, bool interval = false);

/// alpha_k = 10 min(2^k, 5).
AlphaSchedule eikonal_schedule();

// ---------------------------------------------------------------------------
// Obstacle and slope constraints together on (0, 1).

struct IntersectionData {
  int n = 200;              ///< cells on [0, 1]
  double slope_cap = 2.0;   ///< phi_c on [0, 0.2] and [0.8, 1]
  double interior_slope = 100.0;
};

/// Bump obstacle supported on (0.2, 0.8), scaled so its value at 0.5 is 1.
double bump_obstacle(double x);

/// Layout: "u" and "psi0" on free vertices, "psi" per cell. Latent recovery
/// returns the obstacle-side field phi0 + exp(psi0) on all vertices; the extra
/// "slopes" gives the constrained cell slopes phi psi / sqrt(1 + psi^2).
SaddleProblem build_intersection(const IntersectionData& data);

/// alpha_1 = 1, doubling, capped at 1e6.
AlphaSchedule intersection_schedule();

// ---------------------------------------------------------------------------
// Multiphase Cahn-Hilliard-type flow on the Gibbs simplex.

struct MultiphaseData {
  int phases = 4;
  double epsilon = 0.02;
  double tau = 1e-5;
  int n = 64;  ///< cells per axis on the unit square
  int steps = 10;
  /// Zero restarts every step from psi^0 = 0. Consistent starts each step
  /// from the previous step's latent state (log of the initial fractions on
  /// the first step).
  LatentStart latent_start = LatentStart::Consistent;
  /// Initial phase fractions at a point; must lie in the simplex.
  std::function<Vector(const Point&)> initial;
};

/// Four phases in a 2 x 2 block arrangement with smoothed interfaces.
MultiphaseData multiphase_preset(int n, int steps);

/// One backward Euler step from u_prev (phase-major, phases x vertices).
/// Layout: "u", "z", "psi", each phase-major. Natural boundary conditions.
/// warm_start, if given, is the converged state of the previous step; its z
/// and psi become the starting iterate and psi^0. Otherwise psi^0 is 0 or,
/// for a consistent start, log u_prev.
SaddleProblem build_multiphase_step(const MultiphaseData& data, std::shared_ptr<const P1Space> space,
                                    std::span<const double> u_prev, std::span<const double> warm_start = {});

struct MultiphaseRun {
  std::vector<LvppTrace> steps;
  Vector u;       ///< primal phases after the last step
  Vector latent;  ///< softmax recovery after the last step
  /// Mass-weighted total of each phase before the first step and after each step.
  std::vector<std::vector<double>> phase_mass;
  /// Worst |sum_i u~_i - 1| and smallest u~_i seen over all steps.
  double max_sum_defect = 0.0;
  double min_fraction = 1.0;
  std::shared_ptr<const P1Space> space;
};

MultiphaseRun run_multiphase(const MultiphaseData& data, const NewtonConfig& newton, double tolerance,
                             int max_outer = 50);

// ---------------------------------------------------------------------------
// Thermoforming quasi-variational inequality.

/// Piecewise-linear function with constant extension beyond its breakpoints.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);
  double operator()(double s) const;
  /// Slope, taken from the left at the knots.
  double derivative(double s) const;
  bool nonincreasing() const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

struct QviData {
  Box box = Box::unit();
  double beta = 1.0;
  ScalarField smoothing;     ///< xi
  ScalarField initial_mold;  ///< Phi_0
  ScalarField force;
  PiecewiseLinear heat_transfer{{0.0, 1e-2}, {1.0, 0.0}};  ///< g
  int n = 50;                ///< cells per axis
  double stabilization = 1e-10;
};

/// Omega = (0, 1)^2, beta = 1, xi = sin(pi x) sin(pi y), f = 25,
/// Phi_0 = 1 - 2 max(|x - 1/2|, |y - 1/2|), g(s) = 1, 1 - 100 s, 0.
QviData qvi_preset(int n);

/// alpha_1 = 2^-6, alpha_{k+1} = 4 alpha_k, uncapped.
AlphaSchedule qvi_schedule();

/// Layout: "u" on free vertices, "psi" on free vertices, "T" on all vertices.
/// Starts from (u, psi, T) = (0, 0, 1). Latent recovery is the membrane
/// Phi_0 + xi T - exp(-psi) on free vertices (zero on the boundary). Extras:
/// "mold" (Phi_0 + xi T) and "temperature", both on all vertices.
SaddleProblem build_qvi_thermoforming(const QviData& data);

struct QviResidual {
  double heat = 0.0;             ///< l2 norm of the weak heat-equation residual
  double complementarity = 0.0;  ///< l2 norm of min(-(K u - F), M (Phi - u))
};

/// Residuals of the original (non-proximal) QVI at a state of the problem
/// built from data.
QviResidual qvi_residual(const QviData& data, const SaddleProblem& problem, std::span<const double> state);

/// Temperature solving the heat equation with a fixed membrane u, by Newton.
Vector qvi_temperature_for_membrane(const QviData& data, std::span<const double> u_full);

// ---------------------------------------------------------------------------
// Oracles.

/// Euclidean distance from a point of the closed box to its boundary.
double distance_to_boundary(const Box& box, const Point& p);
double distance_to_boundary(double a, double b, double x);

}  // namespace lvpp
