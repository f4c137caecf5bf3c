#pragma once

#include <span>
#include <string_view>

#include "lvpp/types.hpp"

namespace lvpp {

enum class EntropyKind { ShannonLower, ShannonUpper, FermiDirac, Hellinger, SimplexEntropy };

std::string_view to_string(EntropyKind kind);

/// Largest magnitude passed to exp(). Arguments are clamped to
/// [-kExpClamp, kExpClamp] so no evaluation overflows.
inline constexpr double kExpClamp = 700.0;

double saturated_exp(double arg);

/// A Legendre function R together with its inverse gradient, the map from
/// the unconstrained latent space onto the interior of the pointwise
/// feasible image C.
///
///   ShannonLower    C = [lo, inf)         grad R*(psi) = lo + exp(psi)
///   ShannonUpper    C = (-inf, hi]        grad R*(psi) = hi - exp(-psi)
///   FermiDirac      C = [lo, hi]          grad R*(psi) = (lo + hi e^psi) / (1 + e^psi)
///   Hellinger       C = ball(0, radius)   grad R*(psi) = radius psi / sqrt(1 + |psi|^2)
///   SimplexEntropy  C = Gibbs simplex     grad R*(psi) = softmax(psi)
///
/// Bounds are fields of the spatial point; every query takes the point at
/// which they are evaluated. Instances are immutable and all queries are
/// pure, so a map may be shared across threads.
class LegendreMap {
 public:
  static LegendreMap shannon_lower(ScalarField lower);
  static LegendreMap shannon_upper(ScalarField upper);
  static LegendreMap fermi_dirac(ScalarField lower, ScalarField upper);
  static LegendreMap hellinger(ScalarField radius, int dim);
  static LegendreMap simplex(int dim);

  EntropyKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }

  /// R(a); +infinity outside dom R, with 0 ln 0 = 0 on its boundary.
  double value(const Point& x, std::span<const double> a) const;

  /// grad R(a). Throws std::domain_error unless a lies in int(dom R).
  Vector gradient(const Point& x, std::span<const double> a) const;

  /// grad R*(psi). Any finite psi is admissible; the result is strictly
  /// inside C.
  Vector inverse_gradient(const Point& x, std::span<const double> psi) const;
  void inverse_gradient(const Point& x, std::span<const double> psi, std::span<double> out) const;

  /// Jacobian of grad R* at psi, row-major dim x dim.
  Vector inverse_gradient_jacobian(const Point& x, std::span<const double> psi) const;
  void inverse_gradient_jacobian(const Point& x, std::span<const double> psi,
                                 std::span<double> out) const;

  /// Bregman divergence D_R(a, b) = R(a) - R(b) - grad R(b).(a - b).
  /// +infinity when a leaves dom R; std::domain_error when b is not interior.
  double bregman(const Point& x, std::span<const double> a, std::span<const double> b) const;

  /// Distance-like slack of grad R*(psi) to the boundary of C, evaluated
  /// without cancellation so that it stays positive wherever the exact
  /// value is representable.
  double feasibility_margin(const Point& x, std::span<const double> psi) const;

 private:
  LegendreMap(EntropyKind kind, int dim, ScalarField lower, ScalarField upper);

  void check_dim(std::size_t n) const;
  void check_bounds(double lo, double hi) const;

  EntropyKind kind_;
  int dim_;
  ScalarField lower_;  // lower bound, or unused
  ScalarField upper_;  // upper bound / ball radius, or unused
};

/// Scalar conveniences for the one-component kinds.
double inverse_gradient(const LegendreMap& map, const Point& x, double psi);
double inverse_gradient_derivative(const LegendreMap& map, const Point& x, double psi);

}  // namespace lvpp
