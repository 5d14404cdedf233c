#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special.hpp"
#include "util.hpp"

namespace fraclap {

enum class manifold_kind { circle, flat_torus, sphere2 };

inline const char* kind_name(manifold_kind k) {
    switch (k) {
        case manifold_kind::circle: return "circle";
        case manifold_kind::flat_torus: return "flat_torus";
        case manifold_kind::sphere2: return "sphere2";
    }
    return "?";
}

// Chart coordinates. circle: {angle}; flat_torus: {x_1..x_n}; sphere2:
// {colatitude, longitude}.
struct Point {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    Point() = default;
    explicit Point(double a) : c{a, 0.0, 0.0} {}
    Point(double a, double b) : c{a, b, 0.0} {}
    Point(double a, double b, double d) : c{a, b, d} {}
    double operator[](std::size_t i) const { return c[i]; }
    double& operator[](std::size_t i) { return c[i]; }
};

struct ManifoldSpec {
    manifold_kind kind = manifold_kind::circle;
    double radius = 1.0;               // circle, sphere2
    std::vector<double> periods;       // flat_torus

    static ManifoldSpec circle(double R) {
        ManifoldSpec s;
        s.kind = manifold_kind::circle;
        s.radius = R;
        return s;
    }
    static ManifoldSpec flat_torus(std::vector<double> Ls) {
        ManifoldSpec s;
        s.kind = manifold_kind::flat_torus;
        s.periods = std::move(Ls);
        return s;
    }
    static ManifoldSpec sphere(double R) {
        ManifoldSpec s;
        s.kind = manifold_kind::sphere2;
        s.radius = R;
        return s;
    }
};

struct QuadratureRule {
    std::vector<Point> nodes;
    std::vector<double> weights;
    int order = 0;
    std::size_t size() const { return nodes.size(); }
};

// Ordered eigenpair metadata for the first K modes. Entries are sorted by
// eigenvalue; ties resolve by the manifold's deterministic enumeration.
struct SpectralBasis {
    manifold_kind kind;
    int dim = 1;
    double radius = 1.0;
    std::vector<double> periods;
    int K = 0;
    std::vector<double> lambda;
    double lambda_next = 0.0;          // first eigenvalue beyond the truncation

    // circle modes
    std::vector<int> freq;
    std::vector<char> is_sin;
    // torus modes, flattened K x dim lattice vectors
    std::vector<int> mvec;
    // sphere modes: degree, order, type 0 = zonal, 1 = cos, 2 = sin
    std::vector<int> sl, sm;
    std::vector<char> stype;
    int lmax = 0;
};

using basis_ptr = std::shared_ptr<const SpectralBasis>;

namespace detail {

inline double reduce_periodic(double d, double L) {
    d = std::fmod(d, L);
    if (d < 0.0) d += L;
    // nearest representative among {d, d - L, d + L}
    double best = std::abs(d);
    if (std::abs(d - L) < best) best = std::abs(d - L);
    if (std::abs(d + L) < best) best = std::abs(d + L);
    return best;
}

// Normalized associated Legendre table: values[l*(l+1)/2 + m] holds the
// 4pi-normalized function, so Y_{l0} = P(l,0) and Y_{lm} = sqrt(2) P(l,m)
// cos/sin(m phi) are orthonormal on the unit sphere.
struct legendre_table {
    int lmax;
    std::vector<double> val;
    std::vector<double> dval;  // d/dtheta

    static std::size_t idx(int l, int m) { return std::size_t(l) * (l + 1) / 2 + m; }

    legendre_table(int lmax_, double theta, bool with_deriv) : lmax(lmax_) {
        const std::size_t n = std::size_t(lmax + 1) * (lmax + 2) / 2;
        val.assign(n, 0.0);
        if (with_deriv) dval.assign(n, 0.0);
        const double ct = std::cos(theta);
        const double st = std::max(std::sin(theta), 1e-300);

        val[idx(0, 0)] = std::sqrt(1.0 / (4.0 * M_PI));
        for (int m = 1; m <= lmax; ++m)
            val[idx(m, m)] =
                -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * val[idx(m - 1, m - 1)];
        for (int m = 0; m < lmax; ++m)
            val[idx(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * ct * val[idx(m, m)];
        for (int m = 0; m <= lmax; ++m) {
            for (int l = m + 2; l <= lmax; ++l) {
                const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l - m) * (l + m)));
                const double b = std::sqrt((2.0 * l + 1.0) * (l + m - 1.0) * (l - m - 1.0) /
                                           (double(l - m) * (l + m) * (2.0 * l - 3.0)));
                val[idx(l, m)] = a * ct * val[idx(l - 1, m)] - b * val[idx(l - 2, m)];
            }
        }
        if (!with_deriv) return;
        for (int l = 0; l <= lmax; ++l) {
            for (int m = 0; m <= l; ++m) {
                double d = double(l) * ct * val[idx(l, m)];
                if (l - 1 >= m)
                    d -= std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * double(l - m) * (l + m)) *
                         val[idx(l - 1, m)];
                dval[idx(l, m)] = d / st;
            }
        }
    }
};

}

class SpectralManifold {
public:
    explicit SpectralManifold(ManifoldSpec spec) : spec_(std::move(spec)) {
        switch (spec_.kind) {
            case manifold_kind::circle:
                if (!(spec_.radius > 0.0))
                    throw config_error("nonpositive-length", "circle radius must be positive");
                dim_ = 1;
                vol_ = 2.0 * M_PI * spec_.radius;
                diam_ = M_PI * spec_.radius;
                spec_.periods = {vol_};  // so periodic-structure code treats it as a 1-torus
                break;
            case manifold_kind::flat_torus: {
                const std::size_t n = spec_.periods.size();
                if (n < 1 || n > 3)
                    throw config_error("nonpositive-length", "torus dimension must be 1..3");
                double v = 1.0, d2 = 0.0;
                for (double L : spec_.periods) {
                    if (!(L > 0.0))
                        throw config_error("nonpositive-length", "torus periods must be positive");
                    v *= L;
                    d2 += 0.25 * L * L;
                }
                dim_ = int(n);
                vol_ = v;
                diam_ = std::sqrt(d2);
                break;
            }
            case manifold_kind::sphere2:
                if (!(spec_.radius > 0.0))
                    throw config_error("nonpositive-length", "sphere radius must be positive");
                dim_ = 2;
                vol_ = 4.0 * M_PI * spec_.radius * spec_.radius;
                diam_ = M_PI * spec_.radius;
                break;
            default:
                throw config_error("unsupported-kind", "unknown manifold kind");
        }
    }

    const ManifoldSpec& spec() const { return spec_; }
    manifold_kind kind() const { return spec_.kind; }
    int dim() const { return dim_; }
    double volume() const { return vol_; }
    double diameter() const { return diam_; }
    double radius() const { return spec_.radius; }
    const std::vector<double>& periods() const { return spec_.periods; }

    void validate_point(const Point& p) const {
        const double slack = 1e-9;
        switch (spec_.kind) {
            case manifold_kind::circle:
                if (p[0] < -slack || p[0] > 2.0 * M_PI + slack)
                    throw config_error("point-out-of-chart", "circle angle outside [0, 2pi]");
                break;
            case manifold_kind::flat_torus:
                for (int i = 0; i < dim_; ++i)
                    if (p[i] < -slack || p[i] > spec_.periods[i] + slack)
                        throw config_error("point-out-of-chart", "torus coordinate outside period");
                break;
            case manifold_kind::sphere2:
                if (p[0] < -slack || p[0] > M_PI + slack || p[1] < -slack ||
                    p[1] > 2.0 * M_PI + slack)
                    throw config_error("point-out-of-chart", "sphere angles outside chart");
                break;
        }
    }

    double geodesic_distance(const Point& a, const Point& b) const {
        validate_point(a);
        validate_point(b);
        switch (spec_.kind) {
            case manifold_kind::circle:
                return spec_.radius * detail::reduce_periodic(a[0] - b[0], 2.0 * M_PI);
            case manifold_kind::flat_torus: {
                double s = 0.0;
                for (int i = 0; i < dim_; ++i) {
                    const double di = detail::reduce_periodic(a[i] - b[i], spec_.periods[i]);
                    s += di * di;
                }
                return std::sqrt(s);
            }
            case manifold_kind::sphere2:
                return spec_.radius * central_angle(a, b);
        }
        return 0.0;
    }

    // Central angle via haversine, accurate for nearby points.
    double central_angle(const Point& a, const Point& b) const {
        const double dt = 0.5 * (a[0] - b[0]);
        const double dp = 0.5 * (a[1] - b[1]);
        const double h = std::sin(dt) * std::sin(dt) +
                         std::sin(a[0]) * std::sin(b[0]) * std::sin(dp) * std::sin(dp);
        return 2.0 * std::asin(std::min(1.0, std::sqrt(std::max(0.0, h))));
    }

    QuadratureRule quadrature(int order) const {
        if (order < 1) throw config_error("order-too-small", "quadrature order must be >= 1");
        QuadratureRule rule;
        rule.order = order;
        switch (spec_.kind) {
            case manifold_kind::circle: {
                const double w = vol_ / order;
                rule.nodes.reserve(order);
                for (int i = 0; i < order; ++i) rule.nodes.emplace_back(2.0 * M_PI * i / order);
                rule.weights.assign(order, w);
                break;
            }
            case manifold_kind::flat_torus: {
                std::size_t total = 1;
                for (int i = 0; i < dim_; ++i) total *= std::size_t(order);
                const double w = vol_ / double(total);
                rule.nodes.reserve(total);
                std::array<int, 3> ix{0, 0, 0};
                for (std::size_t k = 0; k < total; ++k) {
                    Point p;
                    for (int i = 0; i < dim_; ++i) p[i] = spec_.periods[i] * ix[i] / order;
                    rule.nodes.push_back(p);
                    for (int i = dim_ - 1; i >= 0; --i) {
                        if (++ix[i] < order) break;
                        ix[i] = 0;
                    }
                }
                rule.weights.assign(total, w);
                break;
            }
            case manifold_kind::sphere2: {
                if (order < 2) throw config_error("order-too-small", "sphere order must be >= 2");
                const gl_rule gl = gauss_legendre(order);
                const int nphi = 2 * order;
                const double R2 = spec_.radius * spec_.radius;
                rule.nodes.reserve(std::size_t(order) * nphi);
                rule.weights.reserve(std::size_t(order) * nphi);
                for (int i = 0; i < order; ++i) {
                    const double theta = std::acos(std::clamp(gl.x[i], -1.0, 1.0));
                    const double w = gl.w[i] * (2.0 * M_PI / nphi) * R2;
                    for (int j = 0; j < nphi; ++j) {
                        rule.nodes.emplace_back(theta, 2.0 * M_PI * j / nphi);
                        rule.weights.push_back(w);
                    }
                }
                break;
            }
        }
        return rule;
    }

    // Rule order that integrates products of the first K modes exactly.
    int default_order(int K) const {
        switch (spec_.kind) {
            case manifold_kind::circle:
                return std::max(4 * K, 32);
            case manifold_kind::flat_torus: {
                auto b = basis(K);
                int mmax = 1;
                for (int v : b->mvec) mmax = std::max(mmax, std::abs(v));
                return std::max(4 * mmax + 4, 32);
            }
            case manifold_kind::sphere2: {
                const int lm = lmax_for(K);
                return std::max(2 * (lm + 1), 24);
            }
        }
        return 32;
    }

    static int lmax_for(int K) {
        int l = 0;
        while ((l + 1) * (l + 1) < K) ++l;
        return l;
    }

    basis_ptr basis(int K) const {
        if (K < 1) throw config_error("order-too-small", "basis size must be >= 1");
        auto b = std::make_shared<SpectralBasis>();
        b->kind = spec_.kind;
        b->dim = dim_;
        b->radius = spec_.radius;
        b->periods = spec_.periods;
        b->K = K;
        switch (spec_.kind) {
            case manifold_kind::circle: build_circle_basis(*b, K); break;
            case manifold_kind::flat_torus: build_torus_basis(*b, K); break;
            case manifold_kind::sphere2: build_sphere_basis(*b, K); break;
        }
        return b;
    }

    // Values of the first K modes at p.
    void eval_basis(const SpectralBasis& b, const Point& p, std::span<double> out) const {
        validate_point(p);
        switch (spec_.kind) {
            case manifold_kind::circle: {
                const double norm0 = 1.0 / std::sqrt(vol_);
                const double norm = 1.0 / std::sqrt(M_PI * spec_.radius);
                for (int k = 0; k < b.K; ++k) {
                    if (b.freq[k] == 0) {
                        out[k] = norm0;
                    } else {
                        const double a = b.freq[k] * p[0];
                        out[k] = norm * (b.is_sin[k] ? std::sin(a) : std::cos(a));
                    }
                }
                break;
            }
            case manifold_kind::flat_torus: {
                const double norm0 = 1.0 / std::sqrt(vol_);
                const double norm = std::sqrt(2.0 / vol_);
                for (int k = 0; k < b.K; ++k) {
                    const int* m = &b.mvec[std::size_t(k) * dim_];
                    bool zero = true;
                    double a = 0.0;
                    for (int i = 0; i < dim_; ++i) {
                        if (m[i] != 0) zero = false;
                        a += 2.0 * M_PI * m[i] / spec_.periods[i] * p[i];
                    }
                    if (zero)
                        out[k] = norm0;
                    else
                        out[k] = norm * (b.is_sin[k] ? std::sin(a) : std::cos(a));
                }
                break;
            }
            case manifold_kind::sphere2: {
                detail::legendre_table tab(b.lmax, p[0], false);
                const double invR = 1.0 / spec_.radius;
                for (int k = 0; k < b.K; ++k) {
                    const double pv = tab.val[detail::legendre_table::idx(b.sl[k], b.sm[k])];
                    double v;
                    if (b.stype[k] == 0)
                        v = pv;
                    else if (b.stype[k] == 1)
                        v = std::sqrt(2.0) * pv * std::cos(b.sm[k] * p[1]);
                    else
                        v = std::sqrt(2.0) * pv * std::sin(b.sm[k] * p[1]);
                    out[k] = v * invR;
                }
                break;
            }
        }
    }

    // Orthonormal-frame gradient components of the first K modes at p,
    // row-major K x dim. |grad u|^2 = sum_c (sum_k u_k out[k*dim+c])^2.
    void eval_basis_grad(const SpectralBasis& b, const Point& p, std::span<double> out) const {
        validate_point(p);
        switch (spec_.kind) {
            case manifold_kind::circle: {
                const double norm = 1.0 / std::sqrt(M_PI * spec_.radius);
                const double invR = 1.0 / spec_.radius;
                for (int k = 0; k < b.K; ++k) {
                    if (b.freq[k] == 0) {
                        out[k] = 0.0;
                    } else {
                        const double a = b.freq[k] * p[0];
                        const double d =
                            b.is_sin[k] ? b.freq[k] * std::cos(a) : -b.freq[k] * std::sin(a);
                        out[k] = norm * d * invR;
                    }
                }
                break;
            }
            case manifold_kind::flat_torus: {
                const double norm = std::sqrt(2.0 / vol_);
                for (int k = 0; k < b.K; ++k) {
                    const int* m = &b.mvec[std::size_t(k) * dim_];
                    bool zero = true;
                    double a = 0.0;
                    for (int i = 0; i < dim_; ++i) {
                        if (m[i] != 0) zero = false;
                        a += 2.0 * M_PI * m[i] / spec_.periods[i] * p[i];
                    }
                    for (int i = 0; i < dim_; ++i) {
                        if (zero) {
                            out[std::size_t(k) * dim_ + i] = 0.0;
                        } else {
                            const double om = 2.0 * M_PI * m[i] / spec_.periods[i];
                            const double d =
                                b.is_sin[k] ? om * std::cos(a) : -om * std::sin(a);
                            out[std::size_t(k) * dim_ + i] = norm * d;
                        }
                    }
                }
                break;
            }
            case manifold_kind::sphere2: {
                detail::legendre_table tab(b.lmax, p[0], true);
                const double invR = 1.0 / spec_.radius;
                const double st = std::max(std::sin(p[0]), 1e-300);
                for (int k = 0; k < b.K; ++k) {
                    const std::size_t id = detail::legendre_table::idx(b.sl[k], b.sm[k]);
                    const double pv = tab.val[id];
                    const double pd = tab.dval[id];
                    double dth, dph;
                    if (b.stype[k] == 0) {
                        dth = pd;
                        dph = 0.0;
                    } else if (b.stype[k] == 1) {
                        const double c = std::cos(b.sm[k] * p[1]);
                        const double s = std::sin(b.sm[k] * p[1]);
                        dth = std::sqrt(2.0) * pd * c;
                        dph = -std::sqrt(2.0) * pv * b.sm[k] * s;
                    } else {
                        const double c = std::cos(b.sm[k] * p[1]);
                        const double s = std::sin(b.sm[k] * p[1]);
                        dth = std::sqrt(2.0) * pd * s;
                        dph = std::sqrt(2.0) * pv * b.sm[k] * c;
                    }
                    out[std::size_t(k) * 2] = dth * invR * invR;
                    out[std::size_t(k) * 2 + 1] = dph / st * invR * invR;
                }
                break;
            }
        }
    }

private:
    void build_circle_basis(SpectralBasis& b, int K) const {
        const double R2 = spec_.radius * spec_.radius;
        b.lambda.reserve(K);
        b.freq.reserve(K);
        b.is_sin.reserve(K);
        int k = 0;
        while (int(b.lambda.size()) < K) {
            if (k == 0) {
                b.lambda.push_back(0.0);
                b.freq.push_back(0);
                b.is_sin.push_back(0);
            } else {
                for (int s = 0; s < 2 && int(b.lambda.size()) < K; ++s) {
                    b.lambda.push_back(double(k) * k / R2);
                    b.freq.push_back(k);
                    b.is_sin.push_back(char(s));
                }
            }
            ++k;
        }
        const int klast = b.freq.back();
        if (klast == 0)
            b.lambda_next = 1.0 / R2;
        else if (b.is_sin.back())
            b.lambda_next = double(klast + 1) * (klast + 1) / R2;  // level complete
        else
            b.lambda_next = b.lambda.back();  // partner sine mode discarded
    }

    struct torus_mode {
        double lambda;
        std::array<int, 3> m;
    };

    void build_torus_basis(SpectralBasis& b, int K) const {
        // Enumerate canonical half-lattice representatives (first nonzero
        // component positive) within growing boxes; a prefix is globally
        // correct once its eigenvalues stay below the cheapest excluded
        // frequency.
        double Lmax = 0.0;
        for (double L : spec_.periods) Lmax = std::max(Lmax, L);
        int box = 2;
        std::vector<torus_mode> modes;
        while (true) {
            modes.clear();
            std::array<int, 3> m{0, 0, 0};
            std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
            for (int i = 0; i < dim_; ++i) {
                lo[i] = -box;
                hi[i] = box;
            }
            for (int i = 0; i < dim_; ++i) m[i] = lo[i];
            while (true) {
                bool canonical = false, zero = true;
                for (int i = 0; i < dim_; ++i) {
                    if (m[i] != 0) {
                        zero = false;
                        canonical = m[i] > 0;
                        break;
                    }
                }
                if (zero || canonical) {
                    double lam = 0.0;
                    for (int i = 0; i < dim_; ++i) {
                        const double w = 2.0 * M_PI * m[i] / spec_.periods[i];
                        lam += w * w;
                    }
                    modes.push_back({lam, m});
                }
                int i = dim_ - 1;
                for (; i >= 0; --i) {
                    if (++m[i] <= hi[i]) break;
                    m[i] = lo[i];
                }
                if (i < 0) break;
            }
            std::stable_sort(modes.begin(), modes.end(), [](const torus_mode& a, const torus_mode& c) {
                if (a.lambda != c.lambda) return a.lambda < c.lambda;
                return a.m < c.m;
            });
            const double w_excl = 2.0 * M_PI * (box + 1) / Lmax;
            const double lam_safe = w_excl * w_excl;
            // entries: constant + cos/sin per nonzero representative
            std::size_t entries = 0, usable = 0;
            for (const auto& md : modes) {
                if (md.lambda >= lam_safe) break;
                entries += (md.lambda == 0.0) ? 1 : 2;
                ++usable;
                if (int(entries) >= K + 2) break;
            }
            if (int(entries) >= K + 2 || box > 4096) {
                modes.resize(usable);
                break;
            }
            box *= 2;
        }
        b.lambda.reserve(K);
        b.mvec.reserve(std::size_t(K) * dim_);
        b.is_sin.reserve(K);
        double next = 0.0;
        for (const auto& md : modes) {
            const int reps = (md.lambda == 0.0) ? 1 : 2;
            for (int s = 0; s < reps; ++s) {
                if (int(b.lambda.size()) < K) {
                    b.lambda.push_back(md.lambda);
                    for (int i = 0; i < dim_; ++i) b.mvec.push_back(md.m[i]);
                    b.is_sin.push_back(char(md.lambda == 0.0 ? 0 : s));
                } else if (next == 0.0 && md.lambda > 0.0) {
                    next = md.lambda;
                }
            }
            if (next > 0.0) break;
        }
        if (int(b.lambda.size()) < K)
            throw config_error("order-too-small", "torus basis enumeration exhausted");
        b.lambda_next = next > 0.0 ? next : b.lambda.back();
    }

    void build_sphere_basis(SpectralBasis& b, int K) const {
        const double R2 = spec_.radius * spec_.radius;
        int l = 0;
        while (int(b.lambda.size()) < K) {
            const double lam = double(l) * (l + 1) / R2;
            for (int m = 0; m <= l && int(b.lambda.size()) < K; ++m) {
                if (m == 0) {
                    b.lambda.push_back(lam);
                    b.sl.push_back(l);
                    b.sm.push_back(0);
                    b.stype.push_back(0);
                } else {
                    b.lambda.push_back(lam);
                    b.sl.push_back(l);
                    b.sm.push_back(m);
                    b.stype.push_back(1);
                    if (int(b.lambda.size()) < K) {
                        b.lambda.push_back(lam);
                        b.sl.push_back(l);
                        b.sm.push_back(m);
                        b.stype.push_back(2);
                    }
                }
            }
            ++l;
        }
        b.lmax = b.sl.back();
        const int ln = b.lmax + 1;
        // next eigenvalue: same level if the level was cut, else next level
        const int used_in_level =
            int(std::count(b.sl.begin(), b.sl.end(), b.lmax));
        b.lambda_next = (used_in_level < 2 * b.lmax + 1) ? b.lambda.back()
                                                         : double(ln) * (ln + 1) / R2;
    }

    ManifoldSpec spec_;
    int dim_ = 1;
    double vol_ = 0.0;
    double diam_ = 0.0;
};

inline SpectralManifold make_manifold(const ManifoldSpec& spec) { return SpectralManifold(spec); }

// Band-limited function: coefficients against a basis.
struct SpectralFunction {
    basis_ptr basis;
    std::vector<double> coeffs;
};

inline double evaluate(const SpectralManifold& m, const SpectralFunction& u, const Point& p) {
    std::vector<double> phi(u.basis->K);
    m.eval_basis(*u.basis, p, phi);
    kahan_sum acc;
    for (int k = 0; k < u.basis->K; ++k) acc.add(u.coeffs[k] * phi[k]);
    return acc.value();
}

// Values of u at every rule node.
inline std::vector<double> values_on(const SpectralManifold& m, const SpectralFunction& u,
                                     const QuadratureRule& rule) {
    std::vector<double> out(rule.size());
    std::vector<double> phi(u.basis->K);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        m.eval_basis(*u.basis, rule.nodes[i], phi);
        kahan_sum acc;
        for (int k = 0; k < u.basis->K; ++k) acc.add(u.coeffs[k] * phi[k]);
        out[i] = acc.value();
    }
    return out;
}

// Squared-gradient values of u at every rule node (spectral derivatives).
// Gradient frame components at every node, row-major N x dim.
inline std::vector<double> grad_vec_on(const SpectralManifold& m, const SpectralFunction& u,
                                       const QuadratureRule& rule) {
    const int K = u.basis->K;
    const int n = m.dim();
    std::vector<double> out(rule.size() * std::size_t(n));
    std::vector<double> g(std::size_t(K) * n);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        m.eval_basis_grad(*u.basis, rule.nodes[i], g);
        for (int c = 0; c < n; ++c) {
            kahan_sum acc;
            for (int k = 0; k < K; ++k) acc.add(u.coeffs[k] * g[std::size_t(k) * n + c]);
            out[i * std::size_t(n) + c] = acc.value();
        }
    }
    return out;
}

inline std::vector<double> grad_sq_on(const SpectralManifold& m, const SpectralFunction& u,
                                      const QuadratureRule& rule) {
    const int K = u.basis->K;
    const int n = m.dim();
    std::vector<double> out(rule.size());
    std::vector<double> g(std::size_t(K) * n);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        m.eval_basis_grad(*u.basis, rule.nodes[i], g);
        double s2 = 0.0;
        for (int c = 0; c < n; ++c) {
            kahan_sum acc;
            for (int k = 0; k < K; ++k) acc.add(u.coeffs[k] * g[std::size_t(k) * n + c]);
            const double gc = acc.value();
            s2 += gc * gc;
        }
        out[i] = s2;
    }
    return out;
}

template <typename F>
std::vector<double> sample_on(const QuadratureRule& rule, F&& f) {
    std::vector<double> out(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) out[i] = f(rule.nodes[i]);
    return out;
}

// L^p norm of tabulated node values.
inline double lp_norm_values(const QuadratureRule& rule, std::span<const double> vals, double p) {
    if (!(p >= 1.0)) throw config_error("exponent-out-of-range", "p must be >= 1");
    kahan_sum acc;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc.add(rule.weights[i] * std::pow(std::abs(vals[i]), p));
    return std::pow(acc.value(), 1.0 / p);
}

inline double mean_values(const QuadratureRule& rule, std::span<const double> vals, double vol) {
    kahan_sum acc;
    for (std::size_t i = 0; i < rule.size(); ++i) acc.add(rule.weights[i] * vals[i]);
    return acc.value() / vol;
}

inline double integrate_values(const QuadratureRule& rule, std::span<const double> vals) {
    kahan_sum acc;
    for (std::size_t i = 0; i < rule.size(); ++i) acc.add(rule.weights[i] * vals[i]);
    return acc.value();
}

inline double lp_norm(const SpectralManifold& m, const SpectralFunction& u, double p,
                      const QuadratureRule& rule) {
    const auto vals = values_on(m, u, rule);
    return lp_norm_values(rule, vals, p);
}

inline double mean(const SpectralManifold& m, const SpectralFunction& u,
                   const QuadratureRule& rule) {
    const auto vals = values_on(m, u, rule);
    return mean_values(rule, vals, m.volume());
}

// L^2 projection of f onto the first K modes. The rule must resolve the
// basis; per-mode norms are checked against the orthonormality tolerance.
template <typename F>
SpectralFunction project(const SpectralManifold& m, const basis_ptr& basis, F&& f,
                         const QuadratureRule& rule, bool validate = true) {
    const int K = basis->K;
    const std::size_t N = rule.size();
    std::vector<double> fv(N);
    for (std::size_t i = 0; i < N; ++i) fv[i] = f(rule.nodes[i]);

    std::vector<double> phi(K);
    std::vector<kahan_sum> coeff(K);
    std::vector<kahan_sum> norm(validate ? K : 0);
    for (std::size_t i = 0; i < N; ++i) {
        m.eval_basis(*basis, rule.nodes[i], phi);
        const double wf = rule.weights[i] * fv[i];
        for (int k = 0; k < K; ++k) {
            coeff[k].add(wf * phi[k]);
            if (validate) norm[k].add(rule.weights[i] * phi[k] * phi[k]);
        }
    }
    if (validate) {
        for (int k = 0; k < K; ++k) {
            if (std::abs(norm[k].value() - 1.0) > 1e-8)
                throw numeric_error("under-resolved-rule",
                                    "quadrature does not resolve mode " + std::to_string(k));
        }
    }
    SpectralFunction u;
    u.basis = basis;
    u.coeffs.resize(K);
    for (int k = 0; k < K; ++k) u.coeffs[k] = coeff[k].value();
    return u;
}

}
