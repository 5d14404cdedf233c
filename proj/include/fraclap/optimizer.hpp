#pragma once

// Rayleigh-quotient descent in node space: minimize pair-energy / critical
// norm^p over mean-zero node vectors on a pair-quadrature grid.  Constants
// are null directions of the quotient, so the iteration lives on the
// weighted-mean-zero slice and renormalizes after every step.

#include "sobolev.hpp"

namespace fraclap {

struct MinimizeOptions {
    int max_steps = 2000;
    double init_step = 1.0;
    double backtrack = 0.5;
    double armijo = 1e-4;
    double stop_rel = 1e-7;      // relative decrease per window considered stalled
    int stop_window = 25;
    double grad_tol = 5e-6;      // projected-gradient norm target
    int max_backtracks = 45;
};

struct MinimizeResult {
    std::vector<double> u;       // minimizer, mean-zero, ||u||_{p*} = 1
    double quotient = 0.0;
    double grad_norm = 0.0;      // projected gradient at the minimizer
    int steps = 0;
    bool converged = false;
};

// E(u) / (sum w |u|^{p*})^{p/p*} with E the excluded-band pair energy.  The
// cell term needs a gradient, which raw node vectors do not carry, so the
// discrete objective is pair-only; comparisons against it use the same
// discretization.
inline double rayleigh_quotient(const PairContext& c, const PairTable& t, double p,
                                double pstar, const std::vector<double>& u) {
    kahan_sum norm;
    for (std::size_t i = 0; i < c.size(); ++i)
        norm.add(c.rule.weights[i] * std::pow(std::abs(u[i]), pstar));
    const double ns = norm.value();
    if (!(ns > 0.0)) throw config_error("invalid-config", "quotient undefined at u = 0");
    const double E = pair_energy(c, t, u, p);
    return E / std::pow(ns, p / pstar);
}

namespace detail {

// gradient of the pair energy: dE/du_i = 2p sum_j w_i w_j |u_i-u_j|^{p-1} sgn(u_i-u_j) K_ij
inline void pair_energy_grad(const PairContext& c, const PairTable& t, double p,
                             const std::vector<double>& u, std::vector<double>& g) {
    const std::size_t N = c.size();
    g.assign(N, 0.0);
    if (c.kind == manifold_kind::sphere2) {
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b) {
                const double k = t.K[c.class_of(a, b)];
                if (k == 0.0) continue;
                const double du = u[a] - u[b];
                const double f = 2.0 * p * c.rule.weights[a] * c.rule.weights[b] * k *
                                 std::pow(std::abs(du), p - 1.0) * (du >= 0.0 ? 1.0 : -1.0);
                g[a] += f;
                g[b] -= f;
            }
        return;
    }
    const std::size_t Na = c.axis_nodes;
    const double w2 = c.rule.weights[0] * c.rule.weights[0];
    const auto neighbor = [&](std::size_t i, std::size_t off) -> std::size_t {
        if (c.n == 1) return (i + off) % Na;
        if (c.n == 2) {
            const std::size_t i1 = i / Na, i2 = i % Na, d1 = off / Na, d2 = off % Na;
            return ((i1 + d1) % Na) * Na + (i2 + d2) % Na;
        }
        const std::size_t NN = Na * Na;
        const std::size_t i1 = i / NN, i2 = (i / Na) % Na, i3 = i % Na;
        const std::size_t d1 = off / NN, d2 = (off / Na) % Na, d3 = off % Na;
        return ((i1 + d1) % Na) * NN + ((i2 + d2) % Na) * Na + (i3 + d3) % Na;
    };
    for (std::size_t off = 1; off < c.classes; ++off) {
        const double k = t.K[off];
        if (k == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t j = neighbor(i, off);
            const double du = u[i] - u[j];
            // each unordered pair appears twice across offsets; this covers
            // the i-side contribution of the ordered pair (i, j)
            g[i] += 2.0 * p * w2 * k * std::pow(std::abs(du), p - 1.0) * (du >= 0.0 ? 1.0 : -1.0);
        }
    }
}

inline void project_mean_zero(const PairContext& c, std::vector<double>& u) {
    // remove the component along the constraint normal w
    kahan_sum uw, ww;
    for (std::size_t i = 0; i < c.size(); ++i) {
        uw.add(u[i] * c.rule.weights[i]);
        ww.add(c.rule.weights[i] * c.rule.weights[i]);
    }
    const double lam = uw.value() / ww.value();
    for (std::size_t i = 0; i < c.size(); ++i) u[i] -= lam * c.rule.weights[i];
}

inline void normalize_pstar(const PairContext& c, double pstar, std::vector<double>& u) {
    kahan_sum norm;
    for (std::size_t i = 0; i < c.size(); ++i)
        norm.add(c.rule.weights[i] * std::pow(std::abs(u[i]), pstar));
    const double ns = std::pow(norm.value(), 1.0 / pstar);
    if (!(ns > 0.0)) throw numeric_error("descent-diverged", "iterate collapsed to zero");
    for (double& v : u) v /= ns;
}

}  // namespace detail

inline MinimizeResult minimize_quotient(const PairContext& c, const PairTable& t,
                                        const WspParams& w, double pstar,
                                        std::vector<double> u0, const MinimizeOptions& opt = {}) {
    if (u0.size() != c.size())
        throw config_error("invalid-config", "initial vector size does not match the grid");
    detail::project_mean_zero(c, u0);
    detail::normalize_pstar(c, pstar, u0);

    MinimizeResult res;
    std::vector<double> u = std::move(u0), g, trial;
    double Q = rayleigh_quotient(c, t, w.p, pstar, u);
    double step = opt.init_step;
    std::vector<double> history{Q};

    for (int it = 0; it < opt.max_steps; ++it) {
        // gradient of Q = E / N^(p/p*)
        detail::pair_energy_grad(c, t, w.p, u, g);
        kahan_sum norm;
        for (std::size_t i = 0; i < c.size(); ++i)
            norm.add(c.rule.weights[i] * std::pow(std::abs(u[i]), pstar));
        const double ns = norm.value();
        const double npow = std::pow(ns, w.p / pstar);
        const double E = Q * npow;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double dn = (w.p / pstar) * std::pow(ns, w.p / pstar - 1.0) * pstar *
                              c.rule.weights[i] * std::pow(std::abs(u[i]), pstar - 1.0) *
                              (u[i] >= 0.0 ? 1.0 : -1.0);
            g[i] = (g[i] * npow - E * dn) / (npow * npow);
        }
        detail::project_mean_zero(c, g);
        double gn2 = 0.0;
        for (double v : g) gn2 += v * v;
        const double gn = std::sqrt(gn2);
        res.grad_norm = gn;
        if (gn < opt.grad_tol) {
            res.converged = true;
            break;
        }

        bool moved = false;
        double eta = step;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            trial = u;
            for (std::size_t i = 0; i < c.size(); ++i) trial[i] -= eta * g[i];
            detail::project_mean_zero(c, trial);
            detail::normalize_pstar(c, pstar, trial);
            double Qt;
            try {
                Qt = rayleigh_quotient(c, t, w.p, pstar, trial);
            } catch (const numeric_error&) {
                eta *= opt.backtrack;
                continue;
            }
            if (Qt <= Q - opt.armijo * eta * gn2) {
                u.swap(trial);
                Q = Qt;
                step = eta * 1.6;  // gentle growth after success
                moved = true;
                break;
            }
            eta *= opt.backtrack;
        }
        res.steps = it + 1;
        if (!moved) {
            // no descent direction at any tried step: treat as stationary
            res.converged = true;
            break;
        }
        if (!std::isfinite(Q)) throw numeric_error("descent-diverged", "quotient became non-finite");
        history.push_back(Q);
        if (int(history.size()) > opt.stop_window) {
            const double past = history[history.size() - 1 - opt.stop_window];
            if (past - Q < opt.stop_rel * std::abs(past)) {
                res.converged = true;
                break;
            }
        }
    }
    res.u = std::move(u);
    res.quotient = Q;
    return res;
}

// Best of several random restarts; spread = (worst - best)/best over the
// restarts diagnoses how flat or multimodal the landscape is.
struct MultiStartResult {
    MinimizeResult best;
    double spread = 0.0;
    std::vector<double> quotients;
};

inline MultiStartResult multi_start_minimize(const PairContext& c, const PairTable& t,
                                             const WspParams& w, double pstar, int starts,
                                             std::uint64_t seed, const MinimizeOptions& opt = {}) {
    if (starts < 1) throw config_error("invalid-config", "need at least one start");
    MultiStartResult ms;
    rng r(seed);
    for (int si = 0; si < starts; ++si) {
        std::vector<double> u0(c.size());
        for (double& v : u0) v = r.uniform(-1.0, 1.0);
        MinimizeResult mr = minimize_quotient(c, t, w, pstar, std::move(u0), opt);
        ms.quotients.push_back(mr.quotient);
        if (si == 0 || mr.quotient < ms.best.quotient) ms.best = std::move(mr);
    }
    const auto [lo, hi] = std::minmax_element(ms.quotients.begin(), ms.quotients.end());
    ms.spread = (*hi - *lo) / *lo;
    return ms;
}

}  // namespace fraclap
