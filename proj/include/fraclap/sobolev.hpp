#pragma once

// Fractional Sobolev machinery: W^{s,p} kernels via heat subordination,
// double-integral seminorms on product quadrature grids with an analytic
// near-diagonal cell model, and the derived Poincare / embedding ratios.
//
// The pair sums exploit the translation structure of the grids: kernel values
// are tabulated per separation class (offset vector on circle/torus, ring
// pair plus azimuthal shift on the sphere), so an N^2 pair sum costs N^2
// cheap lookups after O(classes) quadratures.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fractional.hpp"

namespace fraclap {

// Parameters of the Gagliardo seminorm [u]_{s,p}.  The kernel exponent is
// q = sp/2: the subordinated kernel c * integral K_M(t,x,y) t^(-1-q) dt
// matches alpha(n, q) d^(-n-sp) locally.
struct WspParams {
    double s = 0.5;
    double p = 2.0;
    double q = 0.5;     // sp/2
    double norm = 0.0;  // 1/|Gamma(-sp/2)|
};

inline WspParams make_wsp_params(double s, double p) {
    if (!(s > 0.0 && s < 1.0))
        throw config_error("exponent-out-of-range", "smoothness s must lie in (0,1)");
    if (!(p >= 1.0) || !std::isfinite(p))
        throw config_error("exponent-out-of-range", "integrability p must be finite and >= 1");
    WspParams w;
    w.s = s;
    w.p = p;
    w.q = 0.5 * s * p;
    w.norm = subordination_constant(w.q);
    return w;
}

inline void check_subcritical(const SpectralManifold& m, const WspParams& w) {
    if (!(w.s * w.p < m.dim()))
        throw config_error("supercritical-parameters",
                           "sp must be < n for the critical exponent to exist");
}

inline double p_star(const SpectralManifold& m, const WspParams& w) {
    check_subcritical(m, w);
    const double n = m.dim();
    return n * w.p / (n - w.s * w.p);
}

// W^{s,p} kernel (optionally regularized) at two points.
inline double wsp_kernel_reg(const SpectralManifold& m, const SubordEngine& e,
                             const WspParams& w, double eps, const Point& x, const Point& y) {
    return subord_kernel(m, e, w.q, eps, separation(m, x, y), w.norm);
}

inline double wsp_kernel(const SpectralManifold& m, const SubordEngine& e, const WspParams& w,
                         const Point& x, const Point& y) {
    return wsp_kernel_reg(m, e, w, 0.0, x, y);
}

// ---------------------------------------------------------------------------
// Angular constants of the cell model.
//   dir_avg(n,p)  = integral over S^{n-1} of |omega . e|^p   (directional factor
//                   for gradient cells)
//   sphere_area(n) = |S^{n-1}|                                (moment cells)

inline double cell_dir_avg(int n, double p) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * std::sqrt(M_PI) * gamma_fn(0.5 * (p + 1.0)) / gamma_fn(0.5 * p + 1.0);
        case 3: return 4.0 * M_PI / (p + 1.0);
    }
    throw config_error("invalid-config", "dimension must be 1, 2, or 3");
}

inline double unit_sphere_area(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw config_error("invalid-config", "dimension must be 1, 2, or 3");
}

inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
    }
    throw config_error("invalid-config", "dimension must be 1, 2, or 3");
}

// ---------------------------------------------------------------------------
// Pair quadrature context: a product grid, the exclusion radius delta = 2h,
// per-node measure-matched cell radii, and one representative separation per
// pair class.
//
// The cell radius solves  vol_n(r_i) = sum of weights of nodes within delta
// of node i, so the analytic cell integral runs over exactly the measure the
// pair sum excluded.  This kills the O(h) boundary bias a naive radius-delta
// cell would commit.

struct PairContext {
    const SpectralManifold* m = nullptr;
    QuadratureRule rule;
    manifold_kind kind = manifold_kind::circle;
    int n = 1;
    int axis_nodes = 0;           // circle / torus
    int n_theta = 0, n_phi = 0;   // sphere
    double h = 0.0;
    double delta = 0.0;
    std::size_t classes = 0;
    std::vector<PairSep> reps;    // one per class
    std::vector<double> dist;     // distance per class
    std::vector<double> cell_radius;  // per node

    std::size_t size() const { return rule.size(); }

    // class index of the ordered node pair (a, b)
    std::size_t class_of(std::size_t a, std::size_t b) const {
        if (kind == manifold_kind::sphere2) {
            const std::size_t ia = a / n_phi, ja = a % n_phi;
            const std::size_t ib = b / n_phi, jb = b % n_phi;
            std::size_t dj = (ja >= jb) ? ja - jb : jb - ja;
            if (dj > static_cast<std::size_t>(n_phi) / 2) dj = n_phi - dj;
            return (ia * n_theta + ib) * (n_phi / 2 + 1) + dj;
        }
        // offset vector of b relative to a, axis by axis
        const std::size_t N = axis_nodes;
        std::size_t off = 0, ra = a, rb = b;
        std::size_t stride = 1;
        for (int k = 0; k < n - 1; ++k) stride *= N;
        for (int k = 0; k < n; ++k) {
            const std::size_t ak = ra / stride, bk = rb / stride;
            ra %= stride;
            rb %= stride;
            off = off * N + (bk + N - ak) % N;
            stride /= N;
        }
        return off;
    }
};

inline PairContext make_pair_context(const SpectralManifold& m, int order) {
    PairContext c;
    c.m = &m;
    c.kind = m.kind();
    c.n = m.dim();
    c.rule = m.quadrature(order);
    if (c.kind == manifold_kind::sphere2) {
        c.n_theta = order;
        c.n_phi = 2 * order;
        c.h = M_PI * m.radius() / order;
    } else {
        c.axis_nodes = order;
        double lmax = 0.0;
        for (int i = 0; i < c.n; ++i) lmax = std::max(lmax, m.periods()[i]);
        c.h = lmax / order;
    }
    c.delta = 2.0 * c.h;
    if (!(c.delta < 0.25 * m.diameter()))
        throw config_error("under-resolved-rule",
                           "pair rule too coarse: exclusion radius rivals the diameter");

    // separation classes
    if (c.kind == manifold_kind::sphere2) {
        c.classes = static_cast<std::size_t>(c.n_theta) * c.n_theta * (c.n_phi / 2 + 1);
        c.reps.resize(c.classes);
        c.dist.resize(c.classes);
        for (int ia = 0; ia < c.n_theta; ++ia)
            for (int ib = 0; ib < c.n_theta; ++ib)
                for (int dj = 0; dj <= c.n_phi / 2; ++dj) {
                    const std::size_t a = static_cast<std::size_t>(ia) * c.n_phi;
                    const std::size_t b = static_cast<std::size_t>(ib) * c.n_phi + dj;
                    const std::size_t cls =
                        (static_cast<std::size_t>(ia) * c.n_theta + ib) * (c.n_phi / 2 + 1) + dj;
                    c.reps[cls] = separation(m, c.rule.nodes[a], c.rule.nodes[b]);
                    c.dist[cls] = c.reps[cls].d;
                }
    } else {
        std::size_t total = 1;
        for (int k = 0; k < c.n; ++k) total *= c.axis_nodes;
        c.classes = total;
        c.reps.resize(total);
        c.dist.resize(total);
        for (std::size_t off = 0; off < total; ++off) {
            c.reps[off] = separation(m, c.rule.nodes[0], c.rule.nodes[off]);
            c.dist[off] = c.reps[off].d;
        }
    }

    // measure-matched cell radii
    c.cell_radius.resize(c.rule.size());
    const double coef = unit_ball_volume(c.n);
    if (c.kind == manifold_kind::sphere2) {
        for (int ia = 0; ia < c.n_theta; ++ia) {
            kahan_sum mass;
            for (int ib = 0; ib < c.n_theta; ++ib)
                for (int dj = 0; dj < c.n_phi; ++dj) {
                    std::size_t rdj = dj;
                    if (rdj > static_cast<std::size_t>(c.n_phi) / 2) rdj = c.n_phi - rdj;
                    const std::size_t cls =
                        (static_cast<std::size_t>(ia) * c.n_theta + ib) * (c.n_phi / 2 + 1) + rdj;
                    if (c.dist[cls] < c.delta)
                        mass.add(c.rule.weights[static_cast<std::size_t>(ib) * c.n_phi]);
                }
            const double r = std::pow(mass.value() / coef, 1.0 / c.n);
            for (int j = 0; j < c.n_phi; ++j)
                c.cell_radius[static_cast<std::size_t>(ia) * c.n_phi + j] = r;
        }
    } else {
        kahan_sum mass;
        for (std::size_t off = 0; off < c.classes; ++off)
            if (c.dist[off] < c.delta) mass.add(c.rule.weights[0]);
        const double r = std::pow(mass.value() / coef, 1.0 / c.n);
        std::fill(c.cell_radius.begin(), c.cell_radius.end(), r);
    }
    return c;
}

// Kernel values per class, zero on the excluded band d < delta (and on the
// diagonal class).  Building one costs classes-many t-quadratures.
struct PairTable {
    std::vector<double> K;
};

inline PairTable make_pair_table(const PairContext& c,
                                 const std::function<double(const PairSep&)>& kernel) {
    PairTable t;
    t.K.assign(c.classes, 0.0);
    for (std::size_t cls = 0; cls < c.classes; ++cls)
        if (c.dist[cls] >= c.delta) t.K[cls] = kernel(c.reps[cls]);
    return t;
}

// Subordinated W^{s,p} kernel table.
inline PairTable make_wsp_table(const PairContext& c, const SubordEngine& e,
                                const WspParams& w) {
    return make_pair_table(
        c, [&](const PairSep& s) { return subord_kernel(*c.m, e, w.q, 0.0, s, w.norm); });
}

// Geodesic comparison table d^-(n+sp).
inline PairTable make_geodesic_table(const PairContext& c, const WspParams& w) {
    const double expo = c.n + w.s * w.p;
    return make_pair_table(c, [&](const PairSep& s) { return std::pow(s.d, -expo); });
}

namespace detail {

inline double pow_abs(double x, double p) {
    if (p == 2.0) return x * x;
    return std::pow(std::abs(x), p);
}

// sum over ordered pairs (i, j), i != j, of w_i w_j wt_i |u_i - u_j|^p K_ij.
// wt may be null (weight 1).  Excluded band contributes zero via the table.
inline double pair_sum(const PairContext& c, const PairTable& t, const double* wt,
                       const std::vector<double>& u, double p) {
    kahan_sum acc;
    if (c.kind == manifold_kind::sphere2) {
        const std::size_t N = c.size();
        for (std::size_t a = 0; a < N; ++a) {
            const double wa = c.rule.weights[a];
            kahan_sum row;
            for (std::size_t b = 0; b < N; ++b) {
                if (a == b) continue;
                const double k = t.K[c.class_of(a, b)];
                if (k == 0.0) continue;
                row.add(c.rule.weights[b] * k * pow_abs(u[a] - u[b], p));
            }
            acc.add(wa * (wt ? wt[a] : 1.0) * row.value());
        }
        return acc.value();
    }
    const std::size_t N = c.axis_nodes;
    const double w2 = c.rule.weights[0] * c.rule.weights[0];
    if (c.n == 1) {
        for (std::size_t off = 1; off < N; ++off) {
            const double k = t.K[off];
            if (k == 0.0) continue;
            kahan_sum row;
            for (std::size_t i = 0; i < N; ++i) {
                const std::size_t j = (i + off) % N;
                double term = pow_abs(u[i] - u[j], p);
                if (wt) term *= wt[i];
                row.add(term);
            }
            acc.add(w2 * k * row.value());
        }
        return acc.value();
    }
    if (c.n == 2) {
        for (std::size_t off = 1; off < c.classes; ++off) {
            const double k = t.K[off];
            if (k == 0.0) continue;
            const std::size_t d1 = off / N, d2 = off % N;
            kahan_sum row;
            for (std::size_t i1 = 0; i1 < N; ++i1) {
                const std::size_t b1 = i1 * N, r1 = ((i1 + d1) % N) * N;
                for (std::size_t i2 = 0; i2 < N; ++i2) {
                    const std::size_t j = r1 + (i2 + d2) % N;
                    double term = pow_abs(u[b1 + i2] - u[j], p);
                    if (wt) term *= wt[b1 + i2];
                    row.add(term);
                }
            }
            acc.add(w2 * k * row.value());
        }
        return acc.value();
    }
    for (std::size_t off = 1; off < c.classes; ++off) {
        const double k = t.K[off];
        if (k == 0.0) continue;
        const std::size_t d1 = off / (N * N), d2 = (off / N) % N, d3 = off % N;
        kahan_sum row;
        for (std::size_t i1 = 0; i1 < N; ++i1) {
            const std::size_t b1 = i1 * N * N, r1 = ((i1 + d1) % N) * N * N;
            for (std::size_t i2 = 0; i2 < N; ++i2) {
                const std::size_t b2 = b1 + i2 * N, r2 = r1 + ((i2 + d2) % N) * N;
                for (std::size_t i3 = 0; i3 < N; ++i3) {
                    double term = pow_abs(u[b2 + i3] - u[r2 + (i3 + d3) % N], p);
                    if (wt) term *= wt[b2 + i3];
                    row.add(term);
                }
            }
        }
        acc.add(w2 * k * row.value());
    }
    return acc.value();
}

}  // namespace detail

inline double pair_energy(const PairContext& c, const PairTable& t,
                          const std::vector<double>& u, double p) {
    return detail::pair_sum(c, t, nullptr, u, p);
}

inline double pair_energy_weighted(const PairContext& c, const PairTable& t,
                                   const std::vector<double>& wt, const std::vector<double>& u,
                                   double p) {
    return detail::pair_sum(c, t, wt.data(), u, p);
}

// Analytic cell: integral over d < r_i of |grad u . omega|^p alpha d^(-n-sp),
// evaluated with the local model kernel alpha d^(-n-sp) and the frozen
// gradient.  gradsq holds |grad u|^2 per node.
inline double cell_energy(const PairContext& c, const WspParams& w, double alpha,
                          const std::vector<double>& gradsq) {
    const double expo = w.p * (1.0 - w.s);
    const double dir = cell_dir_avg(c.n, w.p);
    kahan_sum acc;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double g = std::pow(gradsq[i], 0.5 * w.p);
        acc.add(c.rule.weights[i] * g * dir * alpha * std::pow(c.cell_radius[i], expo) / expo);
    }
    return acc.value();
}

// sup over nodes of  sum_j w_j d_ij^p K_ij  + the analytic cell moment
// alpha |S^{n-1}| r_i^{p(1-s)} / (p(1-s)).  Feeds the Leibniz remainder
// constant.
inline double pair_moment_sup(const PairContext& c, const PairTable& t, const WspParams& w,
                              double alpha) {
    const double expo = w.p * (1.0 - w.s);
    const double area = unit_sphere_area(c.n);
    double sup = 0.0;
    if (c.kind == manifold_kind::sphere2) {
        for (int ia = 0; ia < c.n_theta; ++ia) {
            const std::size_t a = static_cast<std::size_t>(ia) * c.n_phi;
            kahan_sum acc;
            for (std::size_t b = 0; b < c.size(); ++b) {
                if (b == a) continue;
                const std::size_t cls = c.class_of(a, b);
                if (t.K[cls] == 0.0) continue;
                acc.add(c.rule.weights[b] * std::pow(c.dist[cls], w.p) * t.K[cls]);
            }
            const double cell = alpha * area * std::pow(c.cell_radius[a], expo) / expo;
            sup = std::max(sup, acc.value() + cell);
        }
        return sup;
    }
    kahan_sum acc;  // translation invariant: one node suffices
    for (std::size_t off = 1; off < c.classes; ++off)
        if (t.K[off] != 0.0)
            acc.add(c.rule.weights[0] * std::pow(c.dist[off], w.p) * t.K[off]);
    const double cell = alpha * area * std::pow(c.cell_radius[0], expo) / expo;
    return acc.value() + cell;
}

// ---------------------------------------------------------------------------
// Seminorms.  total_pow = [u]^p; pair and cell are its two contributions.

struct SeminormParts {
    double pair = 0.0;
    double cell = 0.0;
    double total_pow = 0.0;
    double seminorm = 0.0;
};

inline SeminormParts gagliardo_parts(const PairContext& c, const PairTable& t,
                                     const WspParams& w, double alpha,
                                     const std::vector<double>& u,
                                     const std::vector<double>& gradsq) {
    SeminormParts s;
    s.pair = pair_energy(c, t, u, w.p);
    s.cell = cell_energy(c, w, alpha, gradsq);
    s.total_pow = s.pair + s.cell;
    s.seminorm = std::pow(s.total_pow, 1.0 / w.p);
    return s;
}

// Subordinated-kernel seminorm of a band-limited function.
inline SeminormParts wsp_seminorm(const SpectralManifold& m, const WspParams& w,
                                  const PairContext& c, const PairTable& t,
                                  const SpectralFunction& u) {
    const std::vector<double> uv = values_on(m, u, c.rule);
    const std::vector<double> gs = grad_sq_on(m, u, c.rule);
    return gagliardo_parts(c, t, w, euclid_alpha(c.n, w.q), uv, gs);
}

// Geodesic-kernel seminorm (comparison kernel d^-(n+sp), coefficient 1).
inline SeminormParts geodesic_seminorm(const SpectralManifold& m, const WspParams& w,
                                       const PairContext& c, const PairTable& t,
                                       const SpectralFunction& u) {
    const std::vector<double> uv = values_on(m, u, c.rule);
    const std::vector<double> gs = grad_sq_on(m, u, c.rule);
    return gagliardo_parts(c, t, w, 1.0, uv, gs);
}

// ---------------------------------------------------------------------------
// Kernel comparability: K(x,y) * d^(n+sp) / alpha(n, sp/2) over sampled pairs
// with separation at least d_min.  The returned window certifies the
// two-sided geodesic bound.

// Uniform random point, for sampled-pair checks.
inline Point random_point(const SpectralManifold& m, rng& r) {
    switch (m.kind()) {
        case manifold_kind::circle:
            return Point(r.uniform(0.0, m.periods()[0]));
        case manifold_kind::flat_torus: {
            Point p(0.0, 0.0, 0.0);
            for (int i = 0; i < m.dim(); ++i) p[i] = r.uniform(0.0, m.periods()[i]);
            return p;
        }
        case manifold_kind::sphere2: {
            const double theta = std::acos(1.0 - 2.0 * r.uniform01());
            return Point(theta, r.uniform(0.0, 2.0 * M_PI));
        }
    }
    throw numeric_error("internal-error", "unknown manifold kind");
}

struct RatioWindow {
    double lo = 0.0;
    double hi = 0.0;
};

inline RatioWindow kernel_bound_window(const SpectralManifold& m, const SubordEngine& e,
                                       const WspParams& w, int nsamples, std::uint64_t seed,
                                       double d_min) {
    if (nsamples < 1) throw config_error("invalid-config", "need at least one sample pair");
    rng r(seed);
    const double alpha = euclid_alpha(m.dim(), w.q);
    RatioWindow win{1e300, -1e300};
    int got = 0;
    int attempts = 0;
    while (got < nsamples) {
        if (++attempts > 1000 * nsamples)
            throw numeric_error("quadrature-not-converged",
                                "could not sample enough pairs above the distance floor");
        const Point x = random_point(m, r);
        const Point y = random_point(m, r);
        const PairSep sep = separation(m, x, y);
        if (sep.d < d_min) continue;
        const double k = subord_kernel(m, e, w.q, 0.0, sep, w.norm);
        const double model = alpha * std::pow(sep.d, -(m.dim() + w.s * w.p));
        const double ratio = k / model;
        win.lo = std::min(win.lo, ratio);
        win.hi = std::max(win.hi, ratio);
        ++got;
    }
    return win;
}

// ---------------------------------------------------------------------------
// Ratios derived from the seminorm.

// ||u - mean u||_p / [u]  (finite and bounded uniformly over nonconstant u).
inline double poincare_ratio(const SpectralManifold& m, const WspParams& w,
                             const PairContext& c, const PairTable& t,
                             const SpectralFunction& u) {
    std::vector<double> uv = values_on(m, u, c.rule);
    const std::vector<double> gs = grad_sq_on(m, u, c.rule);
    const double mu = mean_values(c.rule, uv, m.volume());
    for (double& v : uv) v -= mu;
    const SeminormParts sp = gagliardo_parts(c, t, w, euclid_alpha(c.n, w.q), uv, gs);
    if (!(sp.seminorm > 0.0))
        throw numeric_error("coincident-points", "seminorm vanished on a nonconstant input");
    return lp_norm_values(c.rule, uv, w.p) / sp.seminorm;
}

// ||u||_{p*} / (||u||_p + [u])  (bounded by the critical embedding).
inline double embedding_ratio(const SpectralManifold& m, const WspParams& w,
                              const PairContext& c, const PairTable& t,
                              const SpectralFunction& u) {
    const double ps = p_star(m, w);
    const std::vector<double> uv = values_on(m, u, c.rule);
    const std::vector<double> gs = grad_sq_on(m, u, c.rule);
    const SeminormParts parts = gagliardo_parts(c, t, w, euclid_alpha(c.n, w.q), uv, gs);
    const double num = lp_norm_values(c.rule, uv, ps);
    const double den = lp_norm_values(c.rule, uv, w.p) + parts.seminorm;
    return num / den;
}

}  // namespace fraclap
