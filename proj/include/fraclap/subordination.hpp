#pragma once

#include <cmath>
#include <functional>

#include "special.hpp"
#include "util.hpp"
#include "errors.hpp"

namespace fraclap {

// Time quadrature for integrals against t^{-1-q} dt: Gauss-Legendre in
// log t on [t_min, t_split] and [t_split, t_max], plus analytic corrections
// for both discarded tails.
struct SubordinationQuad {
    double t_split = 1.0;
    double t_min = 1e-6;
    double t_max = 60.0;
    int n_small = 64;
    int n_large = 48;

    void validate() const {
        if (!(t_min > 0.0) || !(t_min < t_split) || !(t_split < t_max))
            throw config_error("exponent-out-of-range",
                               "subordination times must satisfy 0 < t_min < t_split < t_max");
        if (n_small < 8 || n_large < 8)
            throw config_error("order-too-small", "subordination node counts must be >= 8");
    }
};

class SubordEngine {
public:
    explicit SubordEngine(SubordinationQuad q = {}) : q_(q) {
        q_.validate();
        base_small_ = gauss_legendre(q_.n_small);
        base_large_ = gauss_legendre(q_.n_large);
    }

    const SubordinationQuad& quad() const { return q_; }

    // Sum of w * g(t) over both panels with dt measure; t_lo lets an
    // integrand with Gaussian small-time suppression shrink its own panel.
    double integrate(double t_lo, const std::function<double(double)>& g) const {
        const double lo = std::log(std::min(t_lo, q_.t_split * 0.5));
        kahan_sum acc;
        panel(base_small_, lo, std::log(q_.t_split), g, acc);
        panel(base_large_, std::log(q_.t_split), std::log(q_.t_max), g, acc);
        return acc.value();
    }

    double t_min() const { return q_.t_min; }
    double t_max() const { return q_.t_max; }

    // One extra log-GL panel over [tlo, thi], for slowly decaying integrands
    // that are still alive at t_max.
    double integrate_panel(double tlo, double thi, const std::function<double(double)>& g) const {
        kahan_sum acc;
        panel(base_large_, std::log(tlo), std::log(thi), g, acc);
        return acc.value();
    }

    // Effective lower panel edge for an integrand carrying e^{-a2/(4t)}:
    // below a2/330 the factor is under e^{-82}.
    double lower_edge(double a2) const {
        if (a2 <= 0.0) return q_.t_min;
        return std::min(q_.t_min, std::max(a2 / 330.0, 1e-300));
    }

private:
    static void panel(const gl_rule& base, double llo, double lhi,
                      const std::function<double(double)>& g, kahan_sum& acc) {
        const double mid = 0.5 * (llo + lhi);
        const double half = 0.5 * (lhi - llo);
        for (std::size_t i = 0; i < base.x.size(); ++i) {
            const double t = std::exp(mid + half * base.x[i]);
            acc.add(base.w[i] * half * t * g(t));
        }
    }

    SubordinationQuad q_;
    gl_rule base_small_;
    gl_rule base_large_;
};

// Quadrature value of c_q Int (1 - e^{-lambda t}) t^{-1-q} dt over (0, inf),
// with series small-tail and incomplete-gamma large-tail corrections. Equals
// lambda^q up to panel error.
inline double subordinated_lambda(const SubordEngine& e, double q, double lambda) {
    if (lambda == 0.0) return 0.0;
    if (!(lambda > 0.0))
        throw config_error("exponent-out-of-range", "eigenvalues must be nonnegative");
    const double cq = subordination_constant(q);
    const double tmin = e.t_min();
    const double tmax = e.t_max();
    if (lambda * tmin > 0.5)
        throw numeric_error("quadrature-not-converged",
                            "small-time series requires lambda * t_min <= 1/2");

    const double body = e.integrate(
        tmin, [&](double t) { return -std::expm1(-lambda * t) * std::pow(t, -1.0 - q); });

    // Int_0^{tmin} (1 - e^{-lambda t}) t^{-1-q} dt expanded termwise
    kahan_sum small;
    double term = 1.0;
    for (int j = 1; j <= 60; ++j) {
        term *= -lambda;
        const double contrib = -term * std::pow(tmin, double(j) - q) /
                               (std::tgamma(double(j) + 1.0) * (double(j) - q));
        small.add(contrib);
        if (std::abs(contrib) < 1e-20) break;
    }

    // Int_{tmax}^inf: t^{-q}/q minus the exponential remainder
    const double x = lambda * tmax;
    double large = std::pow(tmax, -q) / q;
    if (x < 500.0) {
        // Int_{tmax}^inf e^{-lambda t} t^{-1-q} dt = lambda^q Gamma(-q, x)
        // via Gamma(-q, x) = (x^{-q} e^{-x} - Gamma(1-q, x)) / q
        const double upper_1q = std::exp(log_gamma(1.0 - q)) - lower_incomplete_gamma(1.0 - q, x);
        const double upper_mq = (std::pow(x, -q) * std::exp(-x) - upper_1q) / q;
        large -= std::pow(lambda, q) * upper_mq;
    }
    return cq * (body + small.value() + large);
}

// Quadrature value of the full integral Int (4 pi t)^{-n/2} e^{-a/t}
// t^{-1-q} dt with its large-time correction (a = (r^2 + eps^2)/4 > 0).
inline double euclid_subordinated(const SubordEngine& e, int n, double q, double a) {
    if (!(a > 0.0)) throw config_error("coincident-points", "Euclidean kernel requires r or eps > 0");
    const double pref = std::pow(4.0 * M_PI, -0.5 * n);
    const double body = e.integrate(e.lower_edge(4.0 * a), [&](double t) {
        return std::pow(4.0 * M_PI * t, -0.5 * n) * std::exp(-a / t) * std::pow(t, -1.0 - q);
    });
    const double tail = pref * power_tail_integral(q + 0.5 * n, a, e.t_max());
    return body + tail;
}

// Extension multiplier: psi(lambda, y) = y^{2s}/(2^{2s} Gamma(s)) *
// Int e^{-lambda t} e^{-y^2/(4t)} t^{-1-s} dt; psi(0, y) = 1 exactly.
inline double extension_multiplier(const SubordEngine& e, double s, double lambda, double y) {
    if (!(y > 0.0)) throw config_error("exponent-out-of-range", "extension height must be > 0");
    const double a = 0.25 * y * y;
    const auto g = [&](double t) {
        return std::exp(-lambda * t - a / t) * std::pow(t, -1.0 - s);
    };
    double body = e.integrate(e.lower_edge(y * y), g);
    double tail = 0.0;
    if (lambda == 0.0) {
        tail = power_tail_integral(s, a, e.t_max());
    } else if (lambda * e.t_max() < 40.0) {
        // extend coverage until e^{-lambda t} has died out
        body += e.integrate_panel(e.t_max(), 40.0 / lambda, g);
    }
    const double pref = std::pow(y, 2.0 * s) / (std::pow(2.0, 2.0 * s) * gamma_fn(s));
    return pref * (body + tail);
}

}
