#pragma once

#include <cmath>
#include <limits>

#include "textshape/error.hpp"

namespace textshape {

/// log I_nu(x) for nu >= 0, x >= 0. Scaled power series everywhere except
/// the strongly asymptotic regime (x large and well past nu), where the
/// Hankel expansion is used.
inline double log_bessel_i(double nu, double x) {
    if (x < 0.0 || nu < 0.0) {
        throw Error(errc::config_error, "log_bessel_i requires nu >= 0 and x >= 0");
    }
    if (x == 0.0) {
        return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (x > 1e4 && x > 100.0 * std::max(1.0, nu)) {
        // Hankel asymptotic: I_nu(x) ~ e^x / sqrt(2 pi x) * (1 - mu1/(8x) + ...)
        const double mu = 4.0 * nu * nu;
        const double ix = 1.0 / (8.0 * x);
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k <= 6; ++k) {
            const double f = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
            term *= -f * ix / k;
            sum += term;
        }
        return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(sum);
    }
    // Series I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_m t_m with
    // t_0 = 1, t_{m+1} = t_m * (x/2)^2 / ((m+1)(nu+m+1)); all terms positive.
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int m = 0; m < 100000; ++m) {
        term *= q / ((m + 1.0) * (nu + m + 1.0));
        sum += term;
        if (sum > 1e280) {  // rescale to avoid overflow of the partial sum
            log_scale += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
        if (term < 1e-18 * sum) break;
    }
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_scale + std::log(sum);
}

/// log surface area of the unit sphere S^{d-1} in R^d.
inline double log_sphere_surface(int d) {
    return std::log(2.0) + 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d);
}

}  // namespace textshape
