#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qrelgauge/error.hpp"

namespace qrelgauge {

inline constexpr int kBetaMaxIterations = 500;
inline constexpr double kBetaTolerance = 1e-12;

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    // relative step size; keeps the result well inside kBetaTolerance
    constexpr double eps = 1e-15;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kBetaMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < eps)
            return h;
    }
    throw Error(Errc::NumericalError, "incomplete beta continued fraction did not converge (a=" +
                                          std::to_string(a) + ", b=" + std::to_string(b) +
                                          ", x=" + std::to_string(x) + ")");
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw Error(Errc::RangeError, "incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(Errc::RangeError, "incomplete beta requires x in [0, 1]");
    if (x == 0.0)
        return 0.0;
    if (x == 1.0)
        return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0))
        throw Error(Errc::RangeError, "degrees of freedom must be positive");
    if (std::isnan(t))
        throw Error(Errc::NumericalError, "t statistic is NaN");
    if (std::isinf(t))
        return 0.0;
    const double p = incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return std::clamp(p, 0.0, 1.0);
}

} // namespace qrelgauge
