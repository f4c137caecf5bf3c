#include "lvpp/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lvpp {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string("alpha schedule: ") + what + " must be positive");
}

}  // namespace

std::string_view to_string(AlphaRule rule) {
  switch (rule) {
    case AlphaRule::Constant: return "constant";
    case AlphaRule::CappedGeometric: return "geometric";
    case AlphaRule::DoubleExponential: return "double-exp";
    case AlphaRule::NewtonAdaptive: return "adaptive";
  }
  return "unknown";
}

AlphaRule parse_alpha_rule(std::string_view name) {
  if (name == "constant") return AlphaRule::Constant;
  if (name == "geometric") return AlphaRule::CappedGeometric;
  if (name == "double-exp") return AlphaRule::DoubleExponential;
  if (name == "adaptive") return AlphaRule::NewtonAdaptive;
  throw std::invalid_argument("unknown alpha rule '" + std::string(name) + "'");
}

AlphaSchedule::AlphaSchedule(AlphaRule rule, double alpha0)
    : rule_(rule), alpha0_(alpha0), prev_alpha_(alpha0) {
  require_positive(alpha0, "initial alpha");
}

AlphaSchedule AlphaSchedule::constant(double alpha) { return AlphaSchedule(AlphaRule::Constant, alpha); }

AlphaSchedule AlphaSchedule::capped_geometric(double alpha1, double growth, double cap) {
  AlphaSchedule s(AlphaRule::CappedGeometric, alpha1);
  if (!(growth > 1.0)) throw std::invalid_argument("alpha schedule: growth factor must exceed 1");
  require_positive(cap, "cap");
  s.growth_ = growth;
  s.cap_ = cap;
  return s;
}

AlphaSchedule AlphaSchedule::double_exponential(double r, double q, double cap, double alpha0) {
  AlphaSchedule s(AlphaRule::DoubleExponential, alpha0);
  if (!(r > 1.0) || !(q > 1.0)) throw std::invalid_argument("alpha schedule: r and q must exceed 1");
  require_positive(cap, "cap");
  s.r_ = r;
  s.q_ = q;
  s.cap_ = cap;
  return s;
}

AlphaSchedule AlphaSchedule::newton_adaptive(double alpha1) {
  return AlphaSchedule(AlphaRule::NewtonAdaptive, alpha1);
}

void AlphaSchedule::reset() {
  prev_alpha_ = alpha0_;
  last_k_ = 0;
}

double AlphaSchedule::next(int k, int prev_newton_iters) {
  if (k < 1) throw std::invalid_argument("alpha schedule: k must be >= 1");
  if (k != last_k_ + 1) {
    throw std::invalid_argument("alpha schedule: expected k = " + std::to_string(last_k_ + 1) +
                                ", got " + std::to_string(k));
  }
  if (prev_newton_iters < 0) throw std::invalid_argument("alpha schedule: negative Newton count");

  double alpha = alpha0_;
  switch (rule_) {
    case AlphaRule::Constant:
      break;
    case AlphaRule::CappedGeometric:
      alpha = k == 1 ? std::min(alpha0_, cap_) : std::min(growth_ * prev_alpha_, cap_);
      break;
    case AlphaRule::DoubleExponential: {
      // pow overflows to +inf for large k, which the cap absorbs.
      const double grown = std::pow(r_, std::pow(q_, static_cast<double>(k)));
      alpha = std::min(std::max(grown - prev_alpha_, 1.0), cap_);
      break;
    }
    case AlphaRule::NewtonAdaptive:
      if (k == 1) {
        alpha = alpha0_;
      } else if (prev_newton_iters <= 4) {
        alpha = 2.0 * prev_alpha_;
      } else if (prev_newton_iters >= 10) {
        alpha = std::max(prev_alpha_ / 2.0, kAdaptiveFloor);
      } else {
        alpha = prev_alpha_;
      }
      break;
  }
  prev_alpha_ = alpha;
  last_k_ = k;
  return alpha;
}

}  // namespace lvpp
