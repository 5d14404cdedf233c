#pragma once

// The Sobolev-inequality side: critical-norm deficits in linear and power
// form, the optimal zero-order coefficient at constants, convexity bounds for
// the norm splitting, the second-order expansion that breaks for p > 2, and
// the signed-partition machinery with its orthogonality and Leibniz bounds.

#include <functional>

#include "sobolev.hpp"

namespace fraclap {

// Zero-order coefficients that make the inequalities equalities at u == 1.
//   linear form  ||u||_{p*} <= A [u] + B ||u||_p      : B = Vol^(-s/n)
//   power form   ||u||_{p*}^p <= A [u]^p + B ||u||_p^p : B = Vol^(-sp/n)
inline double beta_linear(const SpectralManifold& m, double s) {
    return std::pow(m.volume(), -s / m.dim());
}

inline double beta_power(const SpectralManifold& m, const WspParams& w) {
    return std::pow(m.volume(), -w.s * w.p / m.dim());
}

// Norms and seminorm of one function, the inputs every deficit needs.
struct FunctionStats {
    double norm_p = 0.0;
    double norm_pstar = 0.0;
    double sem_pow = 0.0;  // [u]^p
};

inline FunctionStats compute_stats(const SpectralManifold& m, const WspParams& w,
                                   const PairContext& c, const PairTable& t,
                                   const SpectralFunction& u) {
    check_subcritical(m, w);
    const double ps = p_star(m, w);
    FunctionStats st;
    const std::vector<double> uv = values_on(m, u, c.rule);
    st.norm_p = lp_norm_values(c.rule, uv, w.p);
    st.norm_pstar = lp_norm_values(c.rule, uv, ps);
    st.sem_pow = wsp_seminorm(m, w, c, t, u).total_pow;
    return st;
}

// rhs - lhs; nonnegative when the inequality holds with coefficients (A, B).
inline double linear_deficit(const FunctionStats& st, double p, double A, double B) {
    const double sem = std::pow(st.sem_pow, 1.0 / p);
    return A * sem + B * st.norm_p - st.norm_pstar;
}

inline double power_deficit(const FunctionStats& st, double p, double A, double B) {
    const double lhs = std::pow(st.norm_pstar, p);
    const double rhs = A * st.sem_pow + B * std::pow(st.norm_p, p);
    return rhs - lhs;
}

// Smallest A making the power-form inequality hold for this function: the
// deficit is linear in A with slope [u]^p.
inline double minimal_A(const FunctionStats& st, double p, double B) {
    if (!(st.sem_pow > 0.0))
        throw numeric_error("coincident-points",
                            "seminorm vanished; minimal A undefined for constants");
    const double need = std::pow(st.norm_pstar, p) - B * std::pow(st.norm_p, p);
    return std::max(0.0, need / st.sem_pow);
}

// Half-power dyadic sweep 2^(k/2), k = -10..40.
inline std::vector<double> default_A_grid() {
    std::vector<double> g;
    g.reserve(51);
    for (int k = -10; k <= 40; ++k) g.push_back(std::pow(2.0, 0.5 * k));
    return g;
}

struct FamilyA {
    double exact = 0.0;      // max over members of minimal_A
    double grid = 0.0;       // smallest sweep value covering every member
    bool on_grid = false;    // exact lies within the sweep range
};

inline FamilyA family_minimal_A(const std::vector<FunctionStats>& members, double p, double B,
                                const std::vector<double>& grid) {
    if (members.empty()) throw config_error("invalid-config", "family is empty");
    FamilyA fa;
    for (const FunctionStats& st : members) fa.exact = std::max(fa.exact, minimal_A(st, p, B));
    for (double a : grid)
        if (a >= fa.exact) {
            fa.grid = a;
            fa.on_grid = true;
            break;
        }
    if (!fa.on_grid) fa.grid = grid.empty() ? 0.0 : grid.back();
    return fa;
}

// ---------------------------------------------------------------------------
// Convexity bounds used to split the critical norm into mean and oscillation.
// Both are pure Lebesgue-side statements, tested on raw node-value vectors.

// For r >= 2:  ||u||_r^2 <= V^(-2(r-1)/r) (int u)^2 + (r-1) ||u - mean||_r^2.
inline double bakry_deficit(const QuadratureRule& rule, const std::vector<double>& vals,
                            double r, double vol) {
    if (!(r >= 2.0))
        throw config_error("exponent-out-of-range", "two-point convexity bound needs r >= 2");
    const double ibar = integrate_values(rule, vals);
    std::vector<double> osc(vals);
    for (double& v : osc) v -= ibar / vol;
    const double lhs = std::pow(lp_norm_values(rule, vals, r), 2.0);
    const double rhs = std::pow(vol, -2.0 * (r - 1.0) / r) * ibar * ibar +
                       (r - 1.0) * std::pow(lp_norm_values(rule, osc, r), 2.0);
    return rhs - lhs;
}

// Constant of the subadditive splitting for r <= 2, exponent ratio p/r.
inline double split_constant(double p, double r) {
    return std::pow(1.0 + std::pow(r - 1.0, r - 1.0), p / r);
}

// For r <= 2:  (int |u|^r)^(p/r) <= V^(p/r - p) |int u|^p + C (int |u-mean|^r)^(p/r).
inline double subcritical_split_deficit(const QuadratureRule& rule,
                                        const std::vector<double>& vals, double p, double r,
                                        double vol) {
    if (!(r <= 2.0))
        throw config_error("exponent-out-of-range", "subcritical split needs r <= 2");
    const double ibar = integrate_values(rule, vals);
    std::vector<double> osc(vals);
    for (double& v : osc) v -= ibar / vol;
    const double lhs = std::pow(std::pow(lp_norm_values(rule, vals, r), r), p / r);
    const double rhs = std::pow(vol, p / r - p) * std::pow(std::abs(ibar), p) +
                       split_constant(p, r) * std::pow(std::pow(lp_norm_values(rule, osc, r), r), p / r);
    return rhs - lhs;
}

// | numeric sup_t ( r sigma^(1/r) t^((r-1)/r) - t ) - (r-1)^(r-1) sigma |,
// the envelope identity behind the splitting constant.  Golden-section search
// on a bracket around the known maximizer.
inline double sup_identity_gap(double r, double sigma) {
    if (!(r > 1.0) || !(sigma > 0.0))
        throw config_error("exponent-out-of-range", "need r > 1 and sigma > 0");
    const auto g = [&](double t) { return r * std::pow(sigma, 1.0 / r) * std::pow(t, (r - 1.0) / r) - t; };
    double lo = 0.0, hi = 4.0 * std::pow(r - 1.0, r) * sigma + 1.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double ga = g(a), gb = g(b);
    for (int it = 0; it < 200; ++it) {
        if (ga < gb) {
            lo = a;
            a = b;
            ga = gb;
            b = lo + gr * (hi - lo);
            gb = g(b);
        } else {
            hi = b;
            b = a;
            gb = ga;
            a = hi - gr * (hi - lo);
            ga = g(a);
        }
    }
    const double numeric = std::max(ga, gb);
    const double closed = std::pow(r - 1.0, r - 1.0) * sigma;
    return std::abs(numeric - closed);
}

// ---------------------------------------------------------------------------
// Second-order expansion of the power-form deficit at w = 1 + eps u for
// mean-zero u.  The gap coefficient  V^(p/p2 - 1) (p/2)(p2 - p) m2  is
// positive exactly when p2 > p, which is what dooms every finite A when
// p > 2 makes E(eps) = eps^p [u]^p vanish faster than eps^2.

struct TaylorGap {
    double lhs_c2 = 0.0;
    double rhs_c2 = 0.0;
    double gap_c2 = 0.0;
};

inline TaylorGap deficit_second_order(const SpectralManifold& m, const WspParams& w,
                                      const QuadratureRule& rule,
                                      const std::vector<double>& uvals) {
    const double p = w.p;
    const double p2 = p_star(m, w);
    const double V = m.volume();
    const double m1 = integrate_values(rule, uvals);
    if (std::abs(m1) > 1e-10 * V)
        throw config_error("invalid-config", "second-order expansion requires mean-zero u");
    std::vector<double> sq(uvals);
    for (double& v : sq) v *= v;
    const double m2 = integrate_values(rule, sq);
    TaylorGap tg;
    tg.lhs_c2 = std::pow(V, p / p2 - 1.0) * 0.5 * p * (p2 - 1.0) * m2;
    tg.rhs_c2 = std::pow(V, -w.s * p / m.dim()) * 0.5 * p * (p - 1.0) * m2;
    tg.gap_c2 = tg.lhs_c2 - tg.rhs_c2;
    return tg;
}

// D(eps) = ||1 + eps u||_{p*}^p - B ||1 + eps u||_p^p   with B = Vol^(-sp/n),
// E(eps) = eps^p [u]^p.  D decays like eps^2 while E decays like eps^p, so
// for p > 2 the required coefficient A >= D/E blows up as eps -> 0.

struct CurvePoint {
    double eps = 0.0;
    double D = 0.0;
    double E = 0.0;
    double A_required = 0.0;  // D / E
};

struct CounterexampleCurve {
    std::vector<CurvePoint> pts;
    double slope_D = 0.0;       // log-log slope of D, expect 2
    double slope_E = 0.0;       // log-log slope of E, expect p
    double c2_measured = 0.0;   // D/eps^2 at the smallest eps
    double c2_analytic = 0.0;   // gap coefficient from the expansion
};

inline CounterexampleCurve counterexample_curve(const SpectralManifold& m, const WspParams& w,
                                                const QuadratureRule& rule,
                                                const std::vector<double>& uvals,
                                                double sem_pow,
                                                const std::vector<double>& eps_list) {
    if (eps_list.size() < 2)
        throw config_error("invalid-config", "counterexample curve needs at least two eps");
    check_subcritical(m, w);
    const double p = w.p;
    const double p2 = p_star(m, w);
    const double B = beta_power(m, w);
    double umax = 0.0;
    for (double v : uvals) umax = std::max(umax, std::abs(v));
    CounterexampleCurve cc;
    std::vector<double> lx, lD, lE;
    for (double eps : eps_list) {
        if (!(eps > 0.0) || eps * umax >= 0.5)
            throw config_error("amplitude-too-large",
                               "perturbation must keep 1 + eps u well above zero");
        std::vector<double> wv(uvals.size());
        for (std::size_t i = 0; i < uvals.size(); ++i) wv[i] = 1.0 + eps * uvals[i];
        const double lp2 = std::pow(lp_norm_values(rule, wv, p2), p);
        const double lp = std::pow(lp_norm_values(rule, wv, p), p);
        CurvePoint pt;
        pt.eps = eps;
        pt.D = lp2 - B * lp;
        pt.E = std::pow(eps, p) * sem_pow;
        pt.A_required = pt.D / pt.E;
        cc.pts.push_back(pt);
        lx.push_back(std::log(eps));
        lD.push_back(std::log(std::max(pt.D, 1e-300)));
        lE.push_back(std::log(std::max(pt.E, 1e-300)));
    }
    cc.slope_D = fit_line(lx, lD).slope;
    cc.slope_E = fit_line(lx, lE).slope;
    const CurvePoint& last = cc.pts.back();
    cc.c2_measured = last.D / (last.eps * last.eps);
    cc.c2_analytic = deficit_second_order(m, w, rule, uvals).gap_c2;
    return cc;
}

// ---------------------------------------------------------------------------
// Signed partitions of unity: families f_i with sum |f_i|^p == 1, each
// attaining both signs, pairwise disjoint positive/negative lobes arranged so
// that symmetric test functions kill the mixed moments.

struct SignedPartition {
    double p = 2.0;
    std::vector<std::function<double(const Point&)>> parts;
    // frame-component gradients, matching SpectralManifold::eval_basis_grad
    std::vector<std::function<void(const Point&, double*)>> grads;
    double lipschitz = 0.0;  // max over members of |grad f|
};

// Two members on the circle built from cos and sin: f = sgn(c) |c|^(2/p).
inline SignedPartition circle_partition(const SpectralManifold& m, double p) {
    if (m.kind() != manifold_kind::circle)
        throw config_error("invalid-config", "this partition lives on the circle");
    if (!(p >= 1.0 && p <= 2.0))
        throw config_error("exponent-out-of-range",
                           "partition members are Lipschitz only for p in [1,2]");
    const double R = m.radius();
    const double e = 2.0 / p;
    SignedPartition sp;
    sp.p = p;
    const auto shape = [e](double c) { return std::copysign(std::pow(std::abs(c), e), c); };
    // d/dx sgn(c)|c|^e = e |c|^(e-1) c'(x); bounded since e >= 1
    const auto dshape = [e](double c, double dc) {
        if (c == 0.0) return e == 1.0 ? dc : 0.0;
        return e * std::pow(std::abs(c), e - 1.0) * dc;
    };
    sp.parts.push_back([R, shape](const Point& x) { return shape(std::cos(x[0] / R)); });
    sp.parts.push_back([R, shape](const Point& x) { return shape(std::sin(x[0] / R)); });
    sp.grads.push_back([R, dshape](const Point& x, double* g) {
        const double th = x[0] / R;
        g[0] = dshape(std::cos(th), -std::sin(th) / R);
    });
    sp.grads.push_back([R, dshape](const Point& x, double* g) {
        const double th = x[0] / R;
        g[0] = dshape(std::sin(th), std::cos(th) / R);
    });
    // max of e |c|^(e-1) sqrt(1 - c^2) / R over |c| <= 1
    double lip = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double c = -1.0 + 2.0 * i / 20000.0;
        const double v = e * std::pow(std::abs(c), e - 1.0) * std::sqrt(1.0 - c * c) / R;
        if (std::isfinite(v)) lip = std::max(lip, v);
    }
    sp.lipschitz = lip * 1.0000001;
    return sp;
}

// Four members on a 2-torus: products of the circle pair along each axis.
inline SignedPartition torus_partition(const SpectralManifold& m, double p) {
    if (m.kind() != manifold_kind::flat_torus || m.dim() != 2)
        throw config_error("invalid-config", "this partition lives on a 2-torus");
    if (!(p >= 1.0 && p <= 2.0))
        throw config_error("exponent-out-of-range",
                           "partition members are Lipschitz only for p in [1,2]");
    const double L1 = m.periods()[0], L2 = m.periods()[1];
    const double e = 2.0 / p;
    SignedPartition sp;
    sp.p = p;
    const auto shape = [e](double c) { return std::copysign(std::pow(std::abs(c), e), c); };
    const auto dshape = [e](double c, double dc) {
        if (c == 0.0) return e == 1.0 ? dc : 0.0;
        return e * std::pow(std::abs(c), e - 1.0) * dc;
    };
    const double w1 = 2.0 * M_PI / L1, w2 = 2.0 * M_PI / L2;
    using G = std::function<double(double)>;
    const G c1 = [w1](double x) { return std::cos(w1 * x); };
    const G s1 = [w1](double x) { return std::sin(w1 * x); };
    const G dc1 = [w1](double x) { return -w1 * std::sin(w1 * x); };
    const G ds1 = [w1](double x) { return w1 * std::cos(w1 * x); };
    const G c2 = [w2](double x) { return std::cos(w2 * x); };
    const G s2 = [w2](double x) { return std::sin(w2 * x); };
    const G dc2 = [w2](double x) { return -w2 * std::sin(w2 * x); };
    const G ds2 = [w2](double x) { return w2 * std::cos(w2 * x); };
    const std::array<std::pair<G, G>, 2> axis1{{{c1, dc1}, {s1, ds1}}};
    const std::array<std::pair<G, G>, 2> axis2{{{c2, dc2}, {s2, ds2}}};
    for (const auto& [g1, dg1] : axis1)
        for (const auto& [g2, dg2] : axis2) {
            sp.parts.push_back([shape, g1, g2](const Point& x) {
                return shape(g1(x[0])) * shape(g2(x[1]));
            });
            sp.grads.push_back([shape, dshape, g1, dg1, g2, dg2](const Point& x, double* g) {
                g[0] = dshape(g1(x[0]), dg1(x[0])) * shape(g2(x[1]));
                g[1] = shape(g1(x[0])) * dshape(g2(x[1]), dg2(x[1]));
            });
        }
    // numeric sup of |grad f| over a fine grid
    double lip = 0.0;
    for (std::size_t k = 0; k < sp.parts.size(); ++k)
        for (int i = 0; i < 400; ++i)
            for (int j = 0; j < 400; ++j) {
                Point x(L1 * (i + 0.5) / 400.0, L2 * (j + 0.5) / 400.0);
                double g[2];
                sp.grads[k](x, g);
                const double v = std::sqrt(g[0] * g[0] + g[1] * g[1]);
                if (std::isfinite(v)) lip = std::max(lip, v);
            }
    sp.lipschitz = lip * 1.000001;
    return sp;
}

inline double partition_unity_defect(const SignedPartition& sp,
                                     const std::vector<Point>& pts) {
    double worst = 0.0;
    for (const Point& x : pts) {
        kahan_sum acc;
        for (const auto& f : sp.parts) acc.add(std::pow(std::abs(f(x)), sp.p));
        worst = std::max(worst, std::abs(acc.value() - 1.0));
    }
    return worst;
}

// Mixed moments  int f_i |f_i|^(r-1) |u|^r dmu ; these vanish for u invariant
// under the reflections that flip each member's sign.
inline std::vector<double> orthogonality_residuals(const QuadratureRule& rule,
                                                   const SignedPartition& sp,
                                                   const std::vector<double>& uvals, double r) {
    std::vector<double> res;
    for (const auto& f : sp.parts) {
        kahan_sum acc;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double fv = f(rule.nodes[i]);
            acc.add(rule.weights[i] * std::copysign(std::pow(std::abs(fv), r), fv) *
                    std::pow(std::abs(uvals[i]), r));
        }
        res.push_back(acc.value());
    }
    return res;
}

// With balanced lobes A_i = B_i the two-bubble split is an identity:
// (A + B)^(p/p2) = 2^(-sp/n) (A^(p/p2) + B^(p/p2)).  Returns the max gap over
// members; refuses to certify when the mixed moments are not actually zero.
inline double split_identity_gap(const SpectralManifold& m, const QuadratureRule& rule,
                                 const SignedPartition& sp, const WspParams& w,
                                 const std::vector<double>& uvals, double orth_tol) {
    const double p2 = p_star(m, w);
    const std::vector<double> res = orthogonality_residuals(rule, sp, uvals, p2);
    for (double r : res)
        if (std::abs(r) > orth_tol)
            throw numeric_error("orthogonality-violated",
                                "mixed moments must vanish before splitting");
    const double scale = std::pow(2.0, -w.s * w.p / m.dim());
    double worst = 0.0;
    for (const auto& f : sp.parts) {
        kahan_sum pos, neg;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double fv = f(rule.nodes[i]);
            const double mag = std::pow(std::abs(fv), p2) * std::pow(std::abs(uvals[i]), p2);
            if (fv >= 0.0)
                pos.add(rule.weights[i] * mag);
            else
                neg.add(rule.weights[i] * mag);
        }
        const double A = pos.value(), B = neg.value();
        const double gap =
            std::abs(std::pow(A + B, w.p / p2) - scale * (std::pow(A, w.p / p2) + std::pow(B, w.p / p2)));
        worst = std::max(worst, gap);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Leibniz-type energy bound: for Lipschitz f and any u,
//
//   [f u]^p <= (1+d)^(p-1) * (pair + cell energy of u weighted by |f|^p)
//              + (1+1/d)^(p-1) L_f^p * (sup_y moment) * ||u||_p^p
//
// by Young's inequality pair by pair; the moment is sup_y int d(x,y)^p K dmu.

struct LeibnizReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double deficit = 0.0;  // rhs - lhs, must be >= -1e-8 * scale
};

inline LeibnizReport leibniz_bound(const SpectralManifold& m, const WspParams& w,
                                   const PairContext& c, const PairTable& t, double alpha,
                                   const SpectralFunction& u, const SignedPartition& sp,
                                   std::size_t member, double young_delta) {
    if (member >= sp.parts.size())
        throw config_error("invalid-config", "partition member index out of range");
    if (!(young_delta > 0.0))
        throw config_error("invalid-config", "Young split parameter must be positive");
    const int n = c.n;
    const std::size_t N = c.size();
    const std::vector<double> uv = values_on(m, u, c.rule);
    const std::vector<double> ug = grad_vec_on(m, u, c.rule);

    std::vector<double> fv(N), fu(N), fu_gradsq(N), u_gradsq(N), fpow(N);
    std::vector<double> fg(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        const Point& x = c.rule.nodes[i];
        fv[i] = sp.parts[member](x);
        sp.grads[member](x, fg.data());
        fu[i] = fv[i] * uv[i];
        double s2 = 0.0, su = 0.0;
        for (int k = 0; k < n; ++k) {
            const double gk = fv[i] * ug[i * std::size_t(n) + k] + uv[i] * fg[std::size_t(k)];
            s2 += gk * gk;
            const double uk = ug[i * std::size_t(n) + k];
            su += uk * uk;
        }
        fu_gradsq[i] = s2;
        u_gradsq[i] = su;
        fpow[i] = std::pow(std::abs(fv[i]), w.p);
    }

    const double dir = cell_dir_avg(n, w.p);
    const double expo = w.p * (1.0 - w.s);
    const auto cell_of = [&](const std::vector<double>& gradsq, const double* wt) {
        kahan_sum acc;
        for (std::size_t i = 0; i < N; ++i) {
            double v = c.rule.weights[i] * std::pow(gradsq[i], 0.5 * w.p) * dir * alpha *
                       std::pow(c.cell_radius[i], expo) / expo;
            if (wt) v *= wt[i];
            acc.add(v);
        }
        return acc.value();
    };

    LeibnizReport rep;
    rep.lhs = pair_energy(c, t, fu, w.p) + cell_of(fu_gradsq, nullptr);
    const double split1 = std::pow(1.0 + young_delta, w.p - 1.0);
    const double split2 = std::pow(1.0 + 1.0 / young_delta, w.p - 1.0);
    const double weighted =
        pair_energy_weighted(c, t, fpow, uv, w.p) + cell_of(u_gradsq, fpow.data());
    const double moment = pair_moment_sup(c, t, w, alpha);
    const double lippow = std::pow(sp.lipschitz, w.p);
    const double unorm = std::pow(lp_norm_values(c.rule, uv, w.p), w.p);
    rep.rhs = split1 * weighted + split2 * lippow * moment * unorm;
    rep.deficit = rep.rhs - rep.lhs;
    return rep;
}

// ---------------------------------------------------------------------------
// Random band-limited functions: iid U[-1,1] coefficients on the first K
// modes, deterministic in the seed.

inline SpectralFunction random_band_limited(const SpectralManifold& m, basis_ptr basis, rng& r) {
    SpectralFunction u;
    u.basis = std::move(basis);
    u.coeffs.resize(u.basis->K);
    for (double& co : u.coeffs) co = r.uniform(-1.0, 1.0);
    return u;
}

}  // namespace fraclap
