#include "lvpp/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lvpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerance on sum(a) = 1 when deciding simplex membership.
constexpr double kSimplexSumTol = 1e-12;

double xlogx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

// Logistic function, evaluated on the side that does not overflow.
double logistic(double psi) {
  if (psi >= 0.0) {
    return 1.0 / (1.0 + saturated_exp(-psi));
  }
  const double e = saturated_exp(psi);
  return e / (1.0 + e);
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double t : v) s += t * t;
  return s;
}

}  // namespace

std::string_view to_string(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::ShannonLower: return "shannon-lower";
    case EntropyKind::ShannonUpper: return "shannon-upper";
    case EntropyKind::FermiDirac: return "fermi-dirac";
    case EntropyKind::Hellinger: return "hellinger";
    case EntropyKind::SimplexEntropy: return "simplex";
  }
  return "unknown";
}

double saturated_exp(double arg) { return std::exp(std::clamp(arg, -kExpClamp, kExpClamp)); }

LegendreMap::LegendreMap(EntropyKind kind, int dim, ScalarField lower, ScalarField upper)
    : kind_(kind), dim_(dim), lower_(std::move(lower)), upper_(std::move(upper)) {}

LegendreMap LegendreMap::shannon_lower(ScalarField lower) {
  if (!lower) throw std::invalid_argument("shannon_lower: missing lower bound");
  return LegendreMap(EntropyKind::ShannonLower, 1, std::move(lower), nullptr);
}

LegendreMap LegendreMap::shannon_upper(ScalarField upper) {
  if (!upper) throw std::invalid_argument("shannon_upper: missing upper bound");
  return LegendreMap(EntropyKind::ShannonUpper, 1, nullptr, std::move(upper));
}

LegendreMap LegendreMap::fermi_dirac(ScalarField lower, ScalarField upper) {
  if (!lower || !upper) throw std::invalid_argument("fermi_dirac: missing bound");
  return LegendreMap(EntropyKind::FermiDirac, 1, std::move(lower), std::move(upper));
}

LegendreMap LegendreMap::hellinger(ScalarField radius, int dim) {
  if (!radius) throw std::invalid_argument("hellinger: missing radius");
  if (dim < 1) throw std::invalid_argument("hellinger: dimension must be positive");
  return LegendreMap(EntropyKind::Hellinger, dim, nullptr, std::move(radius));
}

LegendreMap LegendreMap::simplex(int dim) {
  if (dim < 2) throw std::invalid_argument("simplex: need at least two components");
  return LegendreMap(EntropyKind::SimplexEntropy, dim, nullptr, nullptr);
}

void LegendreMap::check_dim(std::size_t n) const {
  if (n != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument(std::string(to_string(kind_)) + ": expected vector of length " +
                                std::to_string(dim_) + ", got " + std::to_string(n));
  }
}

void LegendreMap::check_bounds(double lo, double hi) const {
  if (!(lo < hi)) {
    throw std::domain_error("fermi-dirac: lower bound must be strictly below upper bound");
  }
}

double LegendreMap::value(const Point& x, std::span<const double> a) const {
  check_dim(a.size());
  switch (kind_) {
    case EntropyKind::ShannonLower: {
      const double s = a[0] - lower_(x);
      return s < 0.0 ? kInf : xlogx(s) - s;
    }
    case EntropyKind::ShannonUpper: {
      const double s = upper_(x) - a[0];
      return s < 0.0 ? kInf : xlogx(s) - s;
    }
    case EntropyKind::FermiDirac: {
      const double lo = lower_(x), hi = upper_(x);
      check_bounds(lo, hi);
      if (a[0] < lo || a[0] > hi) return kInf;
      return xlogx(a[0] - lo) + xlogx(hi - a[0]);
    }
    case EntropyKind::Hellinger: {
      const double r = upper_(x);
      const double gap = r * r - squared_norm(a);
      return gap < 0.0 ? kInf : -std::sqrt(gap);
    }
    case EntropyKind::SimplexEntropy: {
      double sum = 0.0, v = 0.0;
      for (double t : a) {
        if (t < 0.0) return kInf;
        sum += t;
        v += xlogx(t);
      }
      return std::abs(sum - 1.0) > kSimplexSumTol ? kInf : v;
    }
  }
  return kInf;
}

Vector LegendreMap::gradient(const Point& x, std::span<const double> a) const {
  check_dim(a.size());
  const auto outside = [this]() {
    return std::domain_error(std::string(to_string(kind_)) +
                             ": gradient requested outside the interior of dom R");
  };
  switch (kind_) {
    case EntropyKind::ShannonLower: {
      const double s = a[0] - lower_(x);
      if (!(s > 0.0)) throw outside();
      return {std::log(s)};
    }
    case EntropyKind::ShannonUpper: {
      const double s = upper_(x) - a[0];
      if (!(s > 0.0)) throw outside();
      return {-std::log(s)};
    }
    case EntropyKind::FermiDirac: {
      const double lo = lower_(x), hi = upper_(x);
      check_bounds(lo, hi);
      if (!(a[0] > lo && a[0] < hi)) throw outside();
      return {std::log(a[0] - lo) - std::log(hi - a[0])};
    }
    case EntropyKind::Hellinger: {
      const double r = upper_(x);
      const double gap = r * r - squared_norm(a);
      if (!(gap > 0.0)) throw outside();
      const double root = std::sqrt(gap);
      Vector g(a.begin(), a.end());
      for (double& t : g) t /= root;
      return g;
    }
    case EntropyKind::SimplexEntropy: {
      double sum = 0.0;
      for (double t : a) {
        if (!(t > 0.0)) throw outside();
        sum += t;
      }
      if (std::abs(sum - 1.0) > kSimplexSumTol) throw outside();
      Vector g(a.size());
      std::transform(a.begin(), a.end(), g.begin(), [](double t) { return std::log(t) + 1.0; });
      return g;
    }
  }
  throw outside();
}

Vector LegendreMap::inverse_gradient(const Point& x, std::span<const double> psi) const {
  Vector out(static_cast<std::size_t>(dim_));
  inverse_gradient(x, psi, out);
  return out;
}

void LegendreMap::inverse_gradient(const Point& x, std::span<const double> psi,
                                   std::span<double> out) const {
  check_dim(psi.size());
  check_dim(out.size());
  switch (kind_) {
    case EntropyKind::ShannonLower:
      out[0] = lower_(x) + saturated_exp(psi[0]);
      return;
    case EntropyKind::ShannonUpper:
      out[0] = upper_(x) - saturated_exp(-psi[0]);
      return;
    case EntropyKind::FermiDirac: {
      const double lo = lower_(x), hi = upper_(x);
      check_bounds(lo, hi);
      out[0] = lo + (hi - lo) * logistic(psi[0]);
      return;
    }
    case EntropyKind::Hellinger: {
      const double r = upper_(x);
      if (!(r > 0.0)) throw std::domain_error("hellinger: radius must be positive");
      const double scale = r / std::sqrt(1.0 + squared_norm(psi));
      for (std::size_t i = 0; i < psi.size(); ++i) out[i] = scale * psi[i];
      return;
    }
    case EntropyKind::SimplexEntropy: {
      const double shift = *std::max_element(psi.begin(), psi.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) {
        out[i] = saturated_exp(psi[i] - shift);
        sum += out[i];
      }
      for (double& t : out) t /= sum;
      return;
    }
  }
}

Vector LegendreMap::inverse_gradient_jacobian(const Point& x, std::span<const double> psi) const {
  Vector out(static_cast<std::size_t>(dim_ * dim_));
  inverse_gradient_jacobian(x, psi, out);
  return out;
}

void LegendreMap::inverse_gradient_jacobian(const Point& x, std::span<const double> psi,
                                            std::span<double> out) const {
  check_dim(psi.size());
  if (out.size() != static_cast<std::size_t>(dim_ * dim_)) {
    throw std::invalid_argument("inverse_gradient_jacobian: output has wrong size");
  }
  switch (kind_) {
    case EntropyKind::ShannonLower:
      out[0] = saturated_exp(psi[0]);
      return;
    case EntropyKind::ShannonUpper:
      out[0] = saturated_exp(-psi[0]);
      return;
    case EntropyKind::FermiDirac: {
      const double lo = lower_(x), hi = upper_(x);
      check_bounds(lo, hi);
      out[0] = (hi - lo) * logistic(psi[0]) * logistic(-psi[0]);
      return;
    }
    case EntropyKind::Hellinger: {
      const double r = upper_(x);
      if (!(r > 0.0)) throw std::domain_error("hellinger: radius must be positive");
      // I - psi psi^T / s = P + e e^T / s, with e = psi / |psi| and P the
      // projector orthogonal to e. P is formed without cancellation in one and
      // two dimensions so the radial eigenvalue 1/s survives for large |psi|.
      const double q = squared_norm(psi);
      const double s = 1.0 + q;
      const double scale = r / std::sqrt(s);
      const auto n = psi.size();
      if (q == 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) out[i * n + j] = i == j ? scale : 0.0;
        }
        return;
      }
      const double norm = std::sqrt(q);
      Vector e(n);
      for (std::size_t i = 0; i < n; ++i) e[i] = psi[i] / norm;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double proj;
          if (n == 1) {
            proj = 0.0;
          } else if (n == 2) {
            proj = i == j ? e[1 - i] * e[1 - i] : -e[0] * e[1];
          } else {
            proj = (i == j ? 1.0 : 0.0) - e[i] * e[j];
          }
          out[i * n + j] = scale * (proj + e[i] * e[j] / s);
        }
      }
      return;
    }
    case EntropyKind::SimplexEntropy: {
      const auto n = psi.size();
      Vector p(n);
      inverse_gradient(x, psi, p);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          out[i * n + j] = (i == j ? p[i] : 0.0) - p[i] * p[j];
        }
      }
      return;
    }
  }
}

double LegendreMap::bregman(const Point& x, std::span<const double> a,
                            std::span<const double> b) const {
  check_dim(a.size());
  const Vector grad_b = gradient(x, b);  // throws unless b is interior
  const double ra = value(x, a);
  if (!std::isfinite(ra)) return kInf;
  double lin = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) lin += grad_b[i] * (a[i] - b[i]);
  // Round-off can push an exact zero slightly negative.
  return std::max(0.0, ra - value(x, b) - lin);
}

double LegendreMap::feasibility_margin(const Point& x, std::span<const double> psi) const {
  check_dim(psi.size());
  switch (kind_) {
    case EntropyKind::ShannonLower:
      return saturated_exp(psi[0]);
    case EntropyKind::ShannonUpper:
      return saturated_exp(-psi[0]);
    case EntropyKind::FermiDirac: {
      const double lo = lower_(x), hi = upper_(x);
      check_bounds(lo, hi);
      return (hi - lo) * std::min(logistic(psi[0]), logistic(-psi[0]));
    }
    case EntropyKind::Hellinger: {
      // r - r|psi|/sqrt(1+|psi|^2) = r / (sqrt(1+|psi|^2) (sqrt(1+|psi|^2) + |psi|))
      const double r = upper_(x);
      const double q = squared_norm(psi);
      const double root = std::sqrt(1.0 + q);
      return r / (root * (root + std::sqrt(q)));
    }
    case EntropyKind::SimplexEntropy: {
      Vector p(psi.size());
      inverse_gradient(x, psi, p);
      return *std::min_element(p.begin(), p.end());
    }
  }
  return 0.0;
}

double inverse_gradient(const LegendreMap& map, const Point& x, double psi) {
  double out = 0.0;
  map.inverse_gradient(x, std::span<const double>(&psi, 1), std::span<double>(&out, 1));
  return out;
}

double inverse_gradient_derivative(const LegendreMap& map, const Point& x, double psi) {
  double out = 0.0;
  map.inverse_gradient_jacobian(x, std::span<const double>(&psi, 1), std::span<double>(&out, 1));
  return out;
}

}  // namespace lvpp
