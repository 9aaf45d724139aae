#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace phicredit {

/// Standard normal density.
inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

/// Standard normal distribution function.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2)); }

/// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
/// Returns -inf / +inf at p = 0 / 1 and NaN outside [0, 1].
double norm_inv(double p);

/// Bisection on a bracket [lo, hi] where f changes sign.
/// Stops once the bracket is narrower than `x_tol`. Throws NumericError if
/// the end points do not bracket a root.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              int max_iter = 400);

/// Composite Gauss-Legendre (10-point) quadrature of f over [a, b] split into `panels`.
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 16);

}  // namespace phicredit
