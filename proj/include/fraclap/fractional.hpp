#pragma once

// Fractional Laplacian routes on compact spectral manifolds: spectral
// multiplier, semigroup subordination, regularized singular integral, and
// the extension / Dirichlet-to-Neumann realization.  All four agree on
// band-limited inputs; the agreement defects are what the test suite pins.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "heat_kernel.hpp"
#include "subordination.hpp"

namespace fraclap {

// Order parameters for (-Delta)^s, 0 < s < 1.
//   subord_norm  : 1/|Gamma(-s)| = s/Gamma(1-s), the semigroup normalizer
//   ext_norm     : 2^(2s-1) Gamma(s)/Gamma(1-s), the flux normalizer for the
//                  degenerate extension; equals 1 at s = 1/2
struct FracParams {
    double s = 0.5;
    double subord_norm = 0.0;
    double ext_norm = 0.0;
};

inline FracParams make_frac_params(double s) {
    if (!(s > 0.0 && s < 1.0))
        throw config_error("exponent-out-of-range", "fractional order s must lie in (0,1)");
    FracParams f;
    f.s = s;
    f.subord_norm = subordination_constant(s);
    f.ext_norm = std::pow(2.0, 2.0 * s - 1.0) * gamma_fn(s) / gamma_fn(1.0 - s);
    return f;
}

// ---------------------------------------------------------------------------
// Route 1: spectral multiplier.  Exact on band-limited functions.

inline SpectralFunction frac_apply_spectral(const SpectralFunction& u, double s) {
    SpectralFunction v = u;
    for (std::size_t k = 0; k < v.coeffs.size(); ++k)
        v.coeffs[k] *= std::pow(u.basis->lambda[k], s);
    return v;
}

// |numeric t-integral of the scalar symbol - lambda^s|; the whole semigroup
// route rides on this being at machine precision.
inline double scalar_identity_defect(const SubordEngine& e, double s, double lambda) {
    return std::abs(subordinated_lambda(e, s, lambda) - std::pow(lambda, s));
}

// ---------------------------------------------------------------------------
// Route 2: semigroup.  Applies the subordination formula mode by mode, so the
// defect against route 1 is exactly the scalar identity defect at each
// eigenvalue.

inline SpectralFunction frac_apply_semigroup(const SubordEngine& e, const SpectralFunction& u,
                                             double s) {
    SpectralFunction v = u;
    std::map<double, double> symbol;  // eigenvalues repeat; quadrature is the cost
    for (std::size_t k = 0; k < v.coeffs.size(); ++k) {
        const double lam = u.basis->lambda[k];
        auto it = symbol.find(lam);
        if (it == symbol.end())
            it = symbol.emplace(lam, subordinated_lambda(e, s, lam)).first;
        v.coeffs[k] *= it->second;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Separation of two points, computed once and reused across kernel calls.
// On the torus the kernel depends on the per-axis reduced difference; on
// circle and sphere the geodesic distance alone determines it.

struct PairSep {
    double d = 0.0;                       // geodesic distance
    std::array<double, 3> diff{0, 0, 0};  // torus: reduced coordinate difference
};

inline PairSep separation(const SpectralManifold& m, const Point& x, const Point& y) {
    PairSep s;
    s.d = m.geodesic_distance(x, y);
    if (m.kind() == manifold_kind::flat_torus)
        for (int i = 0; i < m.dim(); ++i)
            s.diff[i] = detail::reduce_periodic(x[i] - y[i], m.periods()[i]);
    return s;
}

// Heat kernel at a precomputed separation.
inline double heat_at(const SpectralManifold& m, double t, const PairSep& sep) {
    switch (m.kind()) {
        case manifold_kind::circle:
            return heat::kernel_1d(t, sep.d, m.periods()[0]);
        case manifold_kind::flat_torus: {
            double prod = 1.0;
            for (int i = 0; i < m.dim(); ++i)
                prod *= heat::kernel_1d(t, std::abs(sep.diff[i]), m.periods()[i]);
            return prod;
        }
        case manifold_kind::sphere2:
            return heat::sphere_kernel(t, sep.d / m.radius(), m.radius());
    }
    throw numeric_error("internal-error", "unknown manifold kind");
}

// ---------------------------------------------------------------------------
// Subordinated kernels.  For exponent q in (0, 3/2) and regularization
// eps >= 0 this evaluates
//
//     c * [ integral_0^inf K_M(t,x,y) exp(-eps^2/4t) t^(-1-q) dt ]
//
// by splitting at the engine's t_max and adding the exact far tail, where the
// heat kernel has settled to 1/Vol:
//
//     (1/Vol) * integral_{t_max}^inf exp(-eps^2/4t) t^(-1-q) dt.
//
// Below the Gaussian-suppressed lower edge (see SubordEngine::lower_edge) the
// integrand is below 1e-140 and is dropped.

inline double subord_kernel(const SpectralManifold& m, const SubordEngine& e, double q,
                            double eps, const PairSep& sep, double norm) {
    const double a2 = sep.d * sep.d + eps * eps;
    if (a2 <= 0.0)
        throw numeric_error("coincident-points",
                            "singular kernel requested at zero separation with eps = 0");
    const double e4 = 0.25 * eps * eps;
    const auto g = [&](double t) {
        double v = heat_at(m, t, sep) * std::pow(t, -1.0 - q);
        if (e4 > 0.0) v *= std::exp(-e4 / t);
        return v;
    };
    const double body = e.integrate(e.lower_edge(a2), g);
    const double tail = power_tail_integral(q, e4, e.t_max()) / m.volume();
    return norm * (body + tail);
}

// Kernel of (-Delta)^s with regularization eps (eps = 0 gives the bare
// kernel, which requires x != y).
inline double frac_kernel_reg(const SpectralManifold& m, const SubordEngine& e,
                              const FracParams& f, double eps, const Point& x, const Point& y) {
    return subord_kernel(m, e, f.s, eps, separation(m, x, y), f.subord_norm);
}

inline double frac_kernel(const SpectralManifold& m, const SubordEngine& e, const FracParams& f,
                          const Point& x, const Point& y) {
    return frac_kernel_reg(m, e, f, 0.0, x, y);
}

// ---------------------------------------------------------------------------
// Euclidean reference: the R^n kernel of (-Delta)^s has the closed form
// alpha(n,s) / r^(n+2s), and with regularization alpha(n,s)/(r^2+eps^2)^((n+2s)/2).

inline double euclid_alpha(int n, double sigma) {
    return std::pow(2.0, 2.0 * sigma) * gamma_fn(0.5 * (n + 2.0 * sigma)) /
           (std::pow(M_PI, 0.5 * n) * abs_gamma(-sigma));
}

// Relative gap between the subordination quadrature and the closed form for
// the free kernel at separation r, regularization eps.
inline double euclid_kernel_defect(const SubordEngine& e, int n, double sigma, double r,
                                   double eps) {
    const double a = 0.25 * (r * r + eps * eps);
    if (a <= 0.0) throw numeric_error("coincident-points", "free kernel at zero separation");
    const double quad = subordination_constant(sigma) * euclid_subordinated(e, n, sigma, a);
    const double closed =
        euclid_alpha(n, sigma) * std::pow(r * r + eps * eps, -0.5 * (n + 2.0 * sigma));
    return std::abs(quad - closed) / closed;
}

// ---------------------------------------------------------------------------
// Fitted-order Richardson extrapolation on a halving schedule.  Models
// I_j = L + c * h_j^kappa with h_j = h_0 / 2^j, reads kappa off the last two
// successive differences, and eliminates the leading term.  Rejects schedules
// whose differences fail to contract.

struct ExtrapolationResult {
    double value = 0.0;         // extrapolated limit
    double fitted_order = 0.0;  // empirical kappa
    double step = 0.0;          // last correction applied, a crude error gauge
    std::vector<double> raw;    // the input sequence
};

inline ExtrapolationResult richardson_fit(const std::vector<double>& seq) {
    if (seq.size() < 3)
        throw config_error("invalid-config", "extrapolation needs at least three levels");
    const std::size_t J = seq.size() - 1;
    const double d1 = seq[J - 1] - seq[J - 2];
    const double d2 = seq[J] - seq[J - 1];
    const double scale = std::max(std::abs(seq[J]), 1e-30);
    ExtrapolationResult r;
    r.raw = seq;
    if (std::abs(d2) < 1e-14 * scale) {  // already converged; nothing to fit
        r.value = seq[J];
        r.fitted_order = 0.0;
        r.step = std::abs(d2);
        return r;
    }
    const double ratio = d1 / d2;
    if (!(ratio > 1.05))
        throw numeric_error("non-converging-schedule",
                            "successive refinement differences do not contract");
    const double kappa = std::log2(ratio);
    const double corr = d2 / (ratio - 1.0);
    r.value = seq[J] + corr;
    r.fitted_order = kappa;
    r.step = std::abs(corr);
    return r;
}

// ---------------------------------------------------------------------------
// Route 3: regularized singular integral.  For a quadrature rule with nodes
// xi_i evaluates
//
//     I(eps) = sum_i w_i (u(x) - u(xi_i)) K_eps(x, xi_i)
//
// on a halving eps-schedule and extrapolates to eps = 0.  The kernel is even
// in the separation, so the principal-value cancellation happens by symmetry
// of the rule; the extrapolation removes the residual O(eps^kappa) bias.

inline ExtrapolationResult frac_apply_singular(const SpectralManifold& m, const SubordEngine& e,
                                               const FracParams& f, const SpectralFunction& u,
                                               const Point& x, const QuadratureRule& rule,
                                               const std::vector<double>& eps_schedule) {
    if (eps_schedule.size() < 3)
        throw config_error("invalid-config", "eps schedule needs at least three levels");
    for (std::size_t j = 1; j < eps_schedule.size(); ++j) {
        if (!(eps_schedule[j] > 0.0) ||
            std::abs(eps_schedule[j] / eps_schedule[j - 1] - 0.5) > 1e-9)
            throw config_error("invalid-config", "eps schedule must halve at each level");
    }
    const double ux = evaluate(m, u, x);
    std::vector<double> uv = values_on(m, u, rule);
    std::vector<PairSep> seps(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) seps[i] = separation(m, x, rule.nodes[i]);

    std::vector<double> vals;
    vals.reserve(eps_schedule.size());
    for (double eps : eps_schedule) {
        // Kernel values repeat across nodes at equal separation; dedup by a
        // quantized key to keep the t-quadrature count down.
        std::map<std::int64_t, double> cache;
        const double qstep = m.diameter() / 1.099511627776e12;  // 2^40 bins
        kahan_sum acc;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double du = ux - uv[i];
            const std::int64_t key = static_cast<std::int64_t>(std::llround(seps[i].d / qstep));
            auto it = cache.find(key);
            if (it == cache.end()) {
                const double kv = subord_kernel(m, e, f.s, eps, seps[i], f.subord_norm);
                it = cache.emplace(key, kv).first;
            }
            acc.add(rule.weights[i] * du * it->second);
        }
        vals.push_back(acc.value());
    }
    return richardson_fit(vals);
}

// ---------------------------------------------------------------------------
// Route 4: extension.  U(x, y) extends u to the half-cylinder M x (0, inf);
// U(., y) -> u as y -> 0 and the weighted normal flux recovers (-Delta)^s u.

// Subordinated Poisson kernel P_y(x, xi): integrating it against u over M
// gives U(x, y).  Total mass over M is exactly 1 for every y.
inline double poisson_kernel(const SpectralManifold& m, const SubordEngine& e, double s, double y,
                             const PairSep& sep) {
    if (!(y > 0.0)) throw config_error("exponent-out-of-range", "extension height must be > 0");
    const double a = 0.25 * y * y;
    const auto g = [&](double t) {
        return heat_at(m, t, sep) * std::exp(-a / t) * std::pow(t, -1.0 - s);
    };
    const double body = e.integrate(e.lower_edge(sep.d * sep.d + y * y), g);
    const double tail = power_tail_integral(s, a, e.t_max()) / m.volume();
    const double pref = std::pow(y, 2.0 * s) / (std::pow(2.0, 2.0 * s) * gamma_fn(s));
    return pref * (body + tail);
}

// U(x, y) via the spectral profile psi_s(lambda, y) applied mode by mode.
inline double extension_value(const SpectralManifold& m, const SubordEngine& e,
                              const SpectralFunction& u, double s, const Point& x, double y) {
    if (!(y > 0.0)) throw config_error("exponent-out-of-range", "extension height must be > 0");
    std::map<double, double> prof;
    std::vector<double> phi(u.coeffs.size());
    m.eval_basis(*u.basis, x, phi);
    kahan_sum acc;
    for (std::size_t k = 0; k < u.coeffs.size(); ++k) {
        if (u.coeffs[k] == 0.0) continue;
        const double lam = u.basis->lambda[k];
        auto it = prof.find(lam);
        if (it == prof.end())
            it = prof.emplace(lam, extension_multiplier(e, s, lam, y)).first;
        acc.add(u.coeffs[k] * it->second * phi[k]);
    }
    return acc.value();
}

// Weighted normal derivative -ext_norm * y^(1-2s) dU/dy at height y, the
// d/dy taken by a 4th-order central stencil with h = y/8.  Heights must halve
// down the schedule; the fitted-order extrapolation removes the O(y^kappa)
// drift toward the y -> 0 limit, which is (-Delta)^s u (x).
inline ExtrapolationResult dtn_value(const SpectralManifold& m, const SubordEngine& e,
                                     const SpectralFunction& u, const FracParams& f,
                                     const Point& x, const std::vector<double>& y_schedule) {
    if (y_schedule.size() < 3)
        throw config_error("invalid-config", "height schedule needs at least three levels");
    for (std::size_t j = 1; j < y_schedule.size(); ++j) {
        if (!(y_schedule[j] > 0.0) ||
            std::abs(y_schedule[j] / y_schedule[j - 1] - 0.5) > 1e-9)
            throw config_error("invalid-config", "height schedule must halve at each level");
    }
    std::vector<double> vals;
    vals.reserve(y_schedule.size());
    for (double y : y_schedule) {
        const double h = y / 8.0;
        const auto U = [&](double yy) { return extension_value(m, e, u, f.s, x, yy); };
        const double dUdy =
            (-U(y + 2 * h) + 8.0 * U(y + h) - 8.0 * U(y - h) + U(y - 2 * h)) / (12.0 * h);
        vals.push_back(-f.ext_norm * std::pow(y, 1.0 - 2.0 * f.s) * dUdy);
    }
    return richardson_fit(vals);
}

// ---------------------------------------------------------------------------
// Order limits.  As s -> 1 the operator approaches -Delta; as s -> 0 it
// approaches the projection u - mean(u).  Both defects are sup-norm gaps on
// the nodes of the given rule.

inline double limit_defect_s_to_1(const SpectralManifold& m, const SpectralFunction& u, double s,
                                  const QuadratureRule& rule) {
    SpectralFunction gap = u;
    for (std::size_t k = 0; k < gap.coeffs.size(); ++k) {
        const double lam = u.basis->lambda[k];
        gap.coeffs[k] *= std::pow(lam, s) - lam;
    }
    std::vector<double> v = values_on(m, gap, rule);
    double sup = 0.0;
    for (double x : v) sup = std::max(sup, std::abs(x));
    return sup;
}

inline double limit_defect_s_to_0(const SpectralManifold& m, const SpectralFunction& u, double s,
                                  const QuadratureRule& rule) {
    SpectralFunction gap = u;
    for (std::size_t k = 0; k < gap.coeffs.size(); ++k) {
        const double lam = u.basis->lambda[k];
        gap.coeffs[k] *= (lam == 0.0) ? 0.0 : std::pow(lam, s) - 1.0;
    }
    std::vector<double> v = values_on(m, gap, rule);
    double sup = 0.0;
    for (double x : v) sup = std::max(sup, std::abs(x));
    return sup;
}

}  // namespace fraclap
