#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lzs/types.hpp"

namespace lzs {

inline constexpr double default_quadrature_tolerance = 1e-10;

/// Adaptive Gauss-Kronrod (31-point) integral of f over [a, b]. Throws
/// numerical_error if the estimated absolute error exceeds abs_tol.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = default_quadrature_tolerance) {
    if (a == b) return 0.0;
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, /*max_depth=*/15, /*tolerance=*/1e-13, &error);
    if (!std::isfinite(value) || !(error <= abs_tol))
        throw numerical_error("quadrature did not reach tolerance (error estimate " +
                              std::to_string(error) + ")");
    return value;
}

}  // namespace lzs
