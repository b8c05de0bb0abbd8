#pragma once

#include <algorithm>
#include <cmath>

// Scalar special functions shared by the geometry kernels and the autodiff
// engine. Every function is total on the reals: out-of-domain arguments are
// clamped, and removable singularities are bridged with Taylor series so that
// values *and* derivatives stay accurate near the singular points.

namespace hgad {

// Margin used when re-projecting points that drifted off their manifold.
inline constexpr double kProjEps = 1e-5;
// Smallest norm we are willing to divide by.
inline constexpr double kNormGuard = 1e-15;
// Below this distance from a singular point the series branches take over.
inline constexpr double kSeriesCut = 1e-4;

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// acosh clamped to its domain; acosh_c(u) = 0 for u <= 1.
inline double acosh_c(double u) { return u <= 1.0 ? 0.0 : std::acosh(u); }

// atanh with |x| clamped strictly inside (-1, 1).
inline double atanh_c(double x) {
  return std::atanh(std::clamp(x, -(1.0 - 1e-12), 1.0 - 1e-12));
}

// acosh(u)^2; series 2e - e^2/3 + 4e^3/45 (e = u-1) below the cut.
inline double acosh_sq(double u) {
  const double e = u - 1.0;
  if (e <= 0.0) return 0.0;
  if (e < kSeriesCut) return e * (2.0 + e * (-1.0 / 3.0 + e * (4.0 / 45.0)));
  const double a = std::acosh(u);
  return a * a;
}

// d/du acosh(u)^2 = 2 acosh(u)/sqrt(u^2-1); limit 2 at u = 1.
inline double acosh_sq_grad(double u) {
  const double e = u - 1.0;
  if (e <= 0.0) return 2.0;
  if (e < kSeriesCut) return 2.0 + e * (-2.0 / 3.0 + e * (4.0 / 15.0));
  return 2.0 * std::acosh(u) / std::sqrt(e * (u + 1.0));
}

// acosh(u)/sqrt(u^2-1); limit 1 at u = 1. (Scale factor of hyperboloid log maps.)
inline double acoshc(double u) {
  const double e = u - 1.0;
  if (e <= 0.0) return 1.0;
  if (e < kSeriesCut) return 1.0 + e * (-1.0 / 3.0 + e * (2.0 / 15.0));
  return std::acosh(u) / std::sqrt(e * (u + 1.0));
}

// d/du of acoshc; limit -1/3 at u = 1.
inline double acoshc_grad(double u) {
  const double e = u - 1.0;
  if (e <= 0.0) return -1.0 / 3.0;
  if (e < kSeriesCut) return -1.0 / 3.0 + e * (4.0 / 15.0);
  const double s = e * (u + 1.0);  // u^2 - 1 without cancellation
  return 1.0 / s - u * std::acosh(u) / (s * std::sqrt(s));
}

// cosh(sqrt(u)) for u >= 0 (analytic in u).
inline double cosh_sqrt(double u) { return std::cosh(std::sqrt(std::max(u, 0.0))); }

// d/du cosh(sqrt(u)) = sinhc_sqrt(u)/2.
inline double cosh_sqrt_grad(double u);

// sinh(sqrt(u))/sqrt(u) for u >= 0; limit 1 at u = 0.
inline double sinhc_sqrt(double u) {
  u = std::max(u, 0.0);
  if (u < 1e-8) return 1.0 + u * (1.0 / 6.0 + u * (1.0 / 120.0));
  const double s = std::sqrt(u);
  return std::sinh(s) / s;
}

inline double cosh_sqrt_grad(double u) { return 0.5 * sinhc_sqrt(u); }

// d/du sinh(sqrt(u))/sqrt(u); limit 1/6 at u = 0.
inline double sinhc_sqrt_grad(double u) {
  u = std::max(u, 0.0);
  if (u < 1e-6) return 1.0 / 6.0 + u * (1.0 / 60.0 + u * (1.0 / 1680.0));
  return (cosh_sqrt(u) - sinhc_sqrt(u)) / (2.0 * u);
}

// d/du acosh(u), guarded at u = 1 (true derivative is unbounded there; the
// guard keeps products with exactly-zero chain factors finite).
inline double acosh_grad_guarded(double u) {
  const double e = u - 1.0;
  if (e <= 0.0) return 0.0;  // clamped region of acosh_c
  return 1.0 / std::sqrt(std::max(e * (u + 1.0), 1e-30));
}

// tanh(sqrt(u))/sqrt(u) for u >= 0; limit 1 at u = 0. Writing the poincare
// exp map as tanhc_sqrt(|v|^2) * v keeps it analytic at v = 0.
inline double tanhc_sqrt(double u) {
  u = std::max(u, 0.0);
  if (u < kSeriesCut) return 1.0 + u * (-1.0 / 3.0 + u * (2.0 / 15.0));
  const double s = std::sqrt(u);
  return std::tanh(s) / s;
}

// d/du tanh(sqrt(u))/sqrt(u); limit -1/3 at u = 0.
inline double tanhc_sqrt_grad(double u) {
  u = std::max(u, 0.0);
  if (u < kSeriesCut) return -1.0 / 3.0 + u * (4.0 / 15.0);
  const double t = std::tanh(std::sqrt(u));
  return ((1.0 - t * t) - tanhc_sqrt(u)) / (2.0 * u);
}

// atanh(sqrt(u))/sqrt(u) for 0 <= u < 1; limit 1 at u = 0. The argument is
// clamped away from 1 like atanh_c.
inline double atanhc_sqrt(double u) {
  u = std::clamp(u, 0.0, 1.0 - 1e-12);
  if (u < kSeriesCut) return 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0));
  const double s = std::sqrt(u);
  return std::atanh(s) / s;
}

// d/du atanh(sqrt(u))/sqrt(u); limit 1/3 at u = 0.
inline double atanhc_sqrt_grad(double u) {
  u = std::clamp(u, 0.0, 1.0 - 1e-12);
  if (u < kSeriesCut) return 1.0 / 3.0 + u * (2.0 / 5.0);
  return (1.0 / (1.0 - u) - atanhc_sqrt(u)) / (2.0 * u);
}

}  // namespace hgad
