#pragma once

#include <cmath>
#include <vector>

#include "manifold.hpp"

namespace fraclap {
namespace heat {

// Image-sum kernel on a circle of circumference L, arc separation d.
// Converges for every t > 0; the term count adapts to sqrt(t).
inline double wrapped_gaussian_1d(double t, double d, double L) {
    const int reach = int(std::ceil((std::sqrt(4.0 * t * 42.0) + d) / L)) + 1;
    const double pref = 1.0 / std::sqrt(4.0 * M_PI * t);
    kahan_sum acc;
    for (int m = -reach; m <= reach; ++m) {
        const double r = d + m * L;
        acc.add(std::exp(-r * r / (4.0 * t)));
    }
    return pref * acc.value();
}

// Spectral form of the same kernel; preferable once e^{-t(2pi/L)^2} is small.
inline double spectral_1d(double t, double d, double L) {
    const double om = 2.0 * M_PI / L;
    const int kmax = int(std::ceil(std::sqrt(42.0 / t) / om)) + 1;
    kahan_sum acc;
    for (int k = kmax; k >= 1; --k)
        acc.add(std::exp(-t * om * om * k * k) * std::cos(om * k * d));
    return (1.0 + 2.0 * acc.value()) / L;
}

inline double kernel_1d(double t, double d, double L) {
    // crossover near t ~ L^2: image sum needs O(sqrt(t))/L terms, the
    // spectral sum O(L/sqrt(t)) terms
    if (t < L * L / 39.5) return wrapped_gaussian_1d(t, d, L);
    return spectral_1d(t, d, L);
}

// Flat torus kernel as the product of per-axis circle kernels; diff must be
// the per-axis reduced differences.
inline double torus_kernel(double t, const double* diff, const std::vector<double>& periods) {
    double prod = 1.0;
    for (std::size_t i = 0; i < periods.size(); ++i)
        prod *= kernel_1d(t, diff[i], periods[i]);
    return prod;
}

// Round-sphere kernel at central angle gamma via the Legendre series; exact
// up to the adaptive truncation. For very small t the series suffers
// cancellation, but only where the true value is negligibly small, so the
// absolute error stays at rounding level.
inline double sphere_kernel(double t, double gamma, double R) {
    const double tau = t / (R * R);
    int lmax = int(std::ceil(std::sqrt(44.0 / tau))) + 4;
    if (lmax > 40000)
        throw numeric_error("quadrature-not-converged",
                            "sphere heat kernel requested at unsupported small time");
    const double x = std::cos(gamma);
    double pm2 = 1.0, pm1 = x;
    kahan_sum acc;
    acc.add(1.0);                                  // l = 0 term: (2*0+1) P_0 = 1
    if (lmax >= 1) acc.add(3.0 * std::exp(-2.0 * tau) * x);
    for (int l = 2; l <= lmax; ++l) {
        const double p = ((2.0 * l - 1.0) * x * pm1 - (l - 1.0) * pm2) / double(l);
        pm2 = pm1;
        pm1 = p;
        acc.add((2.0 * l + 1.0) * std::exp(-double(l) * (l + 1) * tau) * p);
    }
    return acc.value() / (4.0 * M_PI * R * R);
}

// Exact (adaptively truncated) heat kernel on any supported manifold.
inline double exact_kernel(const SpectralManifold& m, double t, const Point& x, const Point& y) {
    if (!(t > 0.0)) throw config_error("exponent-out-of-range", "heat kernel requires t > 0");
    switch (m.kind()) {
        case manifold_kind::circle: {
            const double d = m.geodesic_distance(x, y);
            return kernel_1d(t, d, 2.0 * M_PI * m.radius());
        }
        case manifold_kind::flat_torus: {
            double diff[3] = {0, 0, 0};
            for (int i = 0; i < m.dim(); ++i)
                diff[i] = detail::reduce_periodic(x[i] - y[i], m.periods()[i]);
            return torus_kernel(t, diff, m.periods());
        }
        case manifold_kind::sphere2:
            return sphere_kernel(t, m.central_angle(x, y), m.radius());
    }
    return 0.0;
}

}

// Truncated spectral evaluator with a certified discarded-tail bound.
struct HeatKernelEvaluator {
    const SpectralManifold* m = nullptr;
    basis_ptr basis;
    double tail_tol = 1e-8;
};

inline HeatKernelEvaluator make_heat_evaluator(const SpectralManifold& m, int K,
                                               double tail_tol = 1e-8) {
    if (!(tail_tol > 0.0))
        throw config_error("exponent-out-of-range", "tail tolerance must be positive");
    HeatKernelEvaluator ev;
    ev.m = &m;
    ev.basis = m.basis(K);
    ev.tail_tol = tail_tol;
    return ev;
}

// Upper bound on the discarded spectral tail sup_{x,y} |sum_{k>K} ...|.
inline double heat_tail_bound(const HeatKernelEvaluator& ev, double t) {
    const SpectralManifold& m = *ev.m;
    switch (m.kind()) {
        case manifold_kind::circle: {
            const double R = m.radius();
            // first frequency with a discarded mode
            int kcut = ev.basis->freq.back();
            if (ev.basis->is_sin.back() || kcut == 0) kcut += 1;
            const double a = t / (R * R);
            const double integral = 0.5 * R * std::sqrt(M_PI / t) *
                                    std::erfc(double(kcut) * std::sqrt(t) / R);
            return (std::exp(-a * kcut * kcut) + integral) / (M_PI * R);
        }
        case manifold_kind::flat_torus: {
            const double lam = ev.basis->lambda_next;
            double prod = 1.0;
            for (double L : m.periods()) prod *= 1.0 + L / std::sqrt(2.0 * M_PI * t);
            return 2.0 / m.volume() * std::exp(-0.5 * t * lam) * prod;
        }
        case manifold_kind::sphere2: {
            const double R = m.radius();
            int l0 = ev.basis->lmax;
            const int used = int(std::count(ev.basis->sl.begin(), ev.basis->sl.end(), l0));
            if (used >= 2 * l0 + 1) l0 += 1;
            const double e = std::exp(-double(l0) * (l0 + 1) * t / (R * R));
            return e * (2.0 * l0 + 1.0 + R * R / t) / (4.0 * M_PI * R * R);
        }
    }
    return 0.0;
}

// Smallest truncation whose tail certificate meets tol at time t.
inline int recommended_truncation(const SpectralManifold& m, double t, double tol) {
    int K = 8;
    for (int it = 0; it < 40; ++it) {
        HeatKernelEvaluator ev = make_heat_evaluator(m, K, tol);
        if (heat_tail_bound(ev, t) <= tol) {
            // shrink back to the smallest adequate truncation
            int lo = 1, hi = K;
            while (lo < hi) {
                const int mid = (lo + hi) / 2;
                HeatKernelEvaluator e2 = make_heat_evaluator(m, mid, tol);
                if (heat_tail_bound(e2, t) <= tol)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            return lo;
        }
        K *= 2;
        if (K > (1 << 22))
            throw numeric_error("tail-bound-violation", "no adequate truncation below cap");
    }
    return K;
}

// Kernel value. Below t = 0.05 the circle/torus evaluator switches to the
// image-sum representation, whose error is far below the spectral tail.
inline double heat_kernel(const HeatKernelEvaluator& ev, double t, const Point& x,
                          const Point& y) {
    if (!(t > 0.0)) throw config_error("exponent-out-of-range", "heat kernel requires t > 0");
    const SpectralManifold& m = *ev.m;
    if (t < 0.05 && m.kind() != manifold_kind::sphere2) return heat::exact_kernel(m, t, x, y);
    if (heat_tail_bound(ev, t) > ev.tail_tol)
        throw numeric_error("tail-bound-violation",
                            "truncated spectral sum tail exceeds tolerance at this time");
    const int K = ev.basis->K;
    std::vector<double> px(K), py(K);
    m.eval_basis(*ev.basis, x, px);
    m.eval_basis(*ev.basis, y, py);
    kahan_sum acc;
    for (int k = K - 1; k >= 0; --k)
        acc.add(std::exp(-t * ev.basis->lambda[k]) * px[k] * py[k]);
    return acc.value();
}

// e^{t Laplacian} on a band-limited function: exact coefficient decay.
inline SpectralFunction heat_apply(const HeatKernelEvaluator& ev, double t,
                                   const SpectralFunction& u) {
    if (t < 0.0) throw config_error("exponent-out-of-range", "heat_apply requires t >= 0");
    SpectralFunction v = u;
    for (std::size_t k = 0; k < v.coeffs.size(); ++k)
        v.coeffs[k] *= std::exp(-t * u.basis->lambda[k]);
    return v;
}

// | integral of K(t, x, .) - 1 | under the rule.
inline double mass_defect(const HeatKernelEvaluator& ev, double t, const Point& x,
                          const QuadratureRule& rule) {
    kahan_sum acc;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc.add(rule.weights[i] * heat_kernel(ev, t, x, rule.nodes[i]));
    return std::abs(acc.value() - 1.0);
}

// K(t,x,y) against the Gaussian model t^{-n/2} e^{-d^2/(C t)}.
inline double gaussian_bound_ratio(const HeatKernelEvaluator& ev, double t, const Point& x,
                                   const Point& y, double C) {
    if (!(C > 0.0)) throw config_error("exponent-out-of-range", "Gaussian constant must be > 0");
    const SpectralManifold& m = *ev.m;
    const double d = m.geodesic_distance(x, y);
    const double model = std::pow(t, -0.5 * m.dim()) * std::exp(-d * d / (C * t));
    return heat_kernel(ev, t, x, y) / model;
}

}
