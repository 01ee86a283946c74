#include "swm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swm/errors.hpp"

namespace swm {

std::vector<double> polyfit_powers(std::span<const double> x, std::span<const double> y,
                                   std::span<const int> powers)
{
    const std::size_t m = x.size();
    const std::size_t n = powers.size();
    if (y.size() != m || m < n || n == 0) {
        throw ValidationError("polyfit_powers: bad dimensions");
    }

    double xmax = 0.0;
    for (double v : x) {
        xmax = std::max(xmax, std::abs(v));
    }
    if (xmax <= 0.0) {
        throw ValidationError("polyfit_powers: degenerate abscissae");
    }

    // Design matrix on scaled abscissae, column-major.
    std::vector<double> a(m * n);
    for (std::size_t i = 0; i < m; i++) {
        double u = x[i] / xmax;
        for (std::size_t j = 0; j < n; j++) {
            a[j * m + i] = std::pow(u, powers[j]);
        }
    }
    std::vector<double> b(y.begin(), y.end());

    // Householder QR, applying reflectors to b as we go.
    for (std::size_t j = 0; j < n; j++) {
        double norm = 0.0;
        for (std::size_t i = j; i < m; i++) {
            norm += a[j * m + i] * a[j * m + i];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-300) {
            throw ValidationError("polyfit_powers: rank-deficient design matrix");
        }
        double alpha = a[j * m + j] > 0.0 ? -norm : norm;
        std::vector<double> v(m - j);
        v[0] = a[j * m + j] - alpha;
        for (std::size_t i = j + 1; i < m; i++) {
            v[i - j] = a[j * m + i];
        }
        double vnorm_sq = 0.0;
        for (double t : v) {
            vnorm_sq += t * t;
        }
        if (vnorm_sq < 1e-300) {
            continue;
        }
        for (std::size_t k = j; k < n; k++) {
            double dot = 0.0;
            for (std::size_t i = j; i < m; i++) {
                dot += v[i - j] * a[k * m + i];
            }
            double f = 2.0 * dot / vnorm_sq;
            for (std::size_t i = j; i < m; i++) {
                a[k * m + i] -= f * v[i - j];
            }
        }
        double dot = 0.0;
        for (std::size_t i = j; i < m; i++) {
            dot += v[i - j] * b[i];
        }
        double f = 2.0 * dot / vnorm_sq;
        for (std::size_t i = j; i < m; i++) {
            b[i] -= f * v[i - j];
        }
    }

    // Back substitution on the upper-triangular factor.
    std::vector<double> c(n);
    for (std::size_t jj = n; jj-- > 0;) {
        double s = b[jj];
        for (std::size_t k = jj + 1; k < n; k++) {
            s -= a[k * m + jj] * c[k];
        }
        c[jj] = s / a[jj * m + jj];
    }

    // Undo abscissa scaling.
    for (std::size_t j = 0; j < n; j++) {
        c[j] /= std::pow(xmax, powers[j]);
    }
    return c;
}

double polyval_powers(std::span<const double> coeffs, std::span<const int> powers, double x)
{
    double s = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); j++) {
        s += coeffs[j] * std::pow(x, powers[j]);
    }
    return s;
}

QuadraticRoots solve_quadratic(double a, double b, double c, double disc_clamp_rel)
{
    QuadraticRoots r{0.0, std::numeric_limits<double>::infinity(), true};
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        if (disc > -disc_clamp_rel * std::max(b * b, 1e-30)) {
            disc = 0.0;
        } else {
            r.real = false;
            return r;
        }
    }
    double sq = std::sqrt(disc);
    double denom = -b + sq;
    if (std::abs(denom) < 1e-300) {
        r.real = false;
        return r;
    }
    r.small = 2.0 * c / denom;
    if (std::abs(a) > 1e-300) {
        r.large = denom / (2.0 * a);
    }
    return r;
}

} // namespace swm
