#pragma once

#include <string_view>

namespace lvpp {

enum class AlphaRule { Constant, CappedGeometric, DoubleExponential, NewtonAdaptive };

std::string_view to_string(AlphaRule rule);
AlphaRule parse_alpha_rule(std::string_view name);

/// Proximal parameter sequence alpha_k.
///
///   Constant           alpha_k = alpha0
///   CappedGeometric    alpha_1 = alpha0, alpha_k = min(c alpha_{k-1}, C)
///   DoubleExponential  alpha_k = min(max(r^(q^k) - alpha_{k-1}, 1), C), seeded with alpha0
///   NewtonAdaptive     doubles after a subproblem needing <= 4 Newton steps,
///                      halves after >= 10, otherwise holds
///
/// A schedule is single-owner state: next() must be called with k = 1, 2, ...
class AlphaSchedule {
 public:
  static AlphaSchedule constant(double alpha);
  static AlphaSchedule capped_geometric(double alpha1, double growth, double cap);
  static AlphaSchedule double_exponential(double r = 1.5, double q = 1.5, double cap = 100.0,
                                          double alpha0 = 1.0);
  static AlphaSchedule newton_adaptive(double alpha1);

  /// Emits alpha_k. prev_newton_iters is the Newton count of subproblem
  /// k - 1 and only matters for NewtonAdaptive.
  double next(int k, int prev_newton_iters = 0);

  /// Rewinds to the state before alpha_1.
  void reset();

  AlphaRule rule() const noexcept { return rule_; }
  double alpha0() const noexcept { return alpha0_; }
  double growth() const noexcept { return growth_; }
  double cap() const noexcept { return cap_; }
  double r() const noexcept { return r_; }
  double q() const noexcept { return q_; }
  double previous() const noexcept { return prev_alpha_; }

  static constexpr double kAdaptiveFloor = 1e-8;

 private:
  AlphaSchedule(AlphaRule rule, double alpha0);

  AlphaRule rule_;
  double alpha0_;
  double growth_ = 1.0;
  double cap_ = 0.0;
  double r_ = 1.5;
  double q_ = 1.5;
  double prev_alpha_;
  int last_k_ = 0;
};

}  // namespace lvpp
