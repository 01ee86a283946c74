#pragma once

#include <span>
#include <vector>

namespace swm {

/// Least-squares fit of y(x) = sum_j c_j * x^powers[j] via Householder QR on
/// the x/max|x|-scaled design matrix. Returns the coefficients in the
/// original scale, ordered as `powers`.
std::vector<double> polyfit_powers(std::span<const double> x, std::span<const double> y,
                                   std::span<const int> powers);

/// Evaluate sum_j c_j x^powers[j].
double polyval_powers(std::span<const double> coeffs, std::span<const int> powers, double x);

/// Smaller root of a*D^2 + b*D + c = 0 in the numerically stable form
/// 2c / (-b + sqrt(b^2 - 4ac)); handles a -> 0 smoothly (expects b < 0).
/// Returns both roots (small, large); large is +inf when a == 0.
struct QuadraticRoots {
    double small;
    double large;
    bool real;
};
QuadraticRoots solve_quadratic(double a, double b, double c, double disc_clamp_rel = 1e-9);

} // namespace swm
