#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace fraclap {

namespace detail {

// Lanczos approximation, g = 7, 9 coefficients. Relative error below 1e-13
// on the positive axis, which the reflection formula preserves away from
// the poles.
inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_coeff[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline double lanczos_sum(double z) {
    double acc = lanczos_coeff[0];
    for (int i = 1; i < 9; ++i) acc += lanczos_coeff[i] / (z + double(i) - 1.0);
    return acc;
}

}

// Natural log of Gamma for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw config_error("exponent-out-of-range", "log_gamma requires x > 0");
    if (x < 0.5) {
        // reflection in log form; sin(pi x) > 0 on (0, 1/2)
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    const double z = x;
    const double t = z + detail::lanczos_g - 0.5;
    return 0.5 * std::log(2.0 * M_PI) + (z - 0.5) * std::log(t) - t +
           std::log(detail::lanczos_sum(z));
}

// Gamma on the real line minus the poles {0, -1, -2, ...}.
inline double gamma_fn(double x) {
    if (x > 0.0) {
        if (x > 171.6) return std::numeric_limits<double>::infinity();
        return std::exp(log_gamma(x));
    }
    if (x == std::floor(x))
        throw config_error("exponent-out-of-range", "Gamma pole at nonpositive integer");
    // Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    return M_PI / (std::sin(M_PI * x) * std::exp(log_gamma(1.0 - x)));
}

inline double abs_gamma(double x) { return std::abs(gamma_fn(x)); }

// Normalizer 1/|Gamma(-q)| of the subordination representation; defined for
// q > 0 away from integers, where t^{-1-q} subordination makes sense.
inline double subordination_constant(double q) {
    if (!(q > 0.0))
        throw config_error("exponent-out-of-range", "subordination exponent must be positive");
    if (q == std::floor(q))
        throw config_error("exponent-out-of-range",
                           "subordination exponent hits a Gamma pole at integer order");
    return 1.0 / abs_gamma(-q);
}

// Lower incomplete gamma, series branch for x < a+1, continued fraction
// otherwise (Lentz).
inline double lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw config_error("exponent-out-of-range", "lower_incomplete_gamma domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) break;
        }
        return sum * std::exp(-x + a * std::log(x));
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    const double upper = std::exp(-x + a * std::log(x)) * h;
    return std::exp(log_gamma(a)) - upper;
}

// Integral of e^{-a/t} t^{-1-q} over (tmax, infinity); a >= 0.
inline double power_tail_integral(double q, double a, double tmax) {
    if (!(q > 0.0) || !(tmax > 0.0))
        throw config_error("exponent-out-of-range", "power_tail_integral domain");
    if (a <= 0.0) return std::pow(tmax, -q) / q;
    return std::pow(a, -q) * lower_incomplete_gamma(q, a / tmax);
}

// Legendre polynomial P_l(x) by the three-term recurrence.
inline double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    if (l == 1) return x;
    double pm2 = 1.0, pm1 = x;
    for (int k = 2; k <= l; ++k) {
        const double p = ((2.0 * k - 1.0) * x * pm1 - (k - 1.0) * pm2) / double(k);
        pm2 = pm1;
        pm1 = p;
    }
    return pm1;
}

struct gl_rule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
inline gl_rule gauss_legendre(int n) {
    if (n < 1) throw config_error("order-too-small", "Gauss-Legendre order must be >= 1");
    gl_rule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - double(j) * p3) / double(j + 1);
            }
            pp = double(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

inline gl_rule gauss_legendre_mapped(int n, double lo, double hi) {
    gl_rule base = gauss_legendre(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
        base.x[i] = mid + half * base.x[i];
        base.w[i] *= half;
    }
    return base;
}

}
