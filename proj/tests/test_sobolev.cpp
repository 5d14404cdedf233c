#include <catch2/catch_amalgamated.hpp>

#include "fraclap/sobolev.hpp"

using namespace fraclap;

namespace {

// spectral reference for the quadratic seminorm: the double integral of
// |u(x) - u(y)|^2 against the order-2q kernel collapses to 2 sum lambda^{2q} u_k^2
double quadratic_seminorm_pow(const SpectralFunction& u, double s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < u.coeffs.size(); ++k)
        acc += 2.0 * std::pow(u.basis->lambda[k], s) * u.coeffs[k] * u.coeffs[k];
    return acc;
}

}  // namespace

TEST_CASE("parameter validation and critical exponent") {
    CHECK_THROWS_AS(make_wsp_params(0.0, 2.0), config_error);
    CHECK_THROWS_AS(make_wsp_params(0.5, 0.5), config_error);
    const WspParams w = make_wsp_params(0.3, 1.5);
    CHECK(w.q == Catch::Approx(0.225).epsilon(1e-15));

    const SpectralManifold c(ManifoldSpec::circle(1.0));
    CHECK(p_star(c, w) == Catch::Approx(30.0 / 11.0).epsilon(1e-14));  // np/(n-sp)
    CHECK_NOTHROW(check_subcritical(c, w));
    CHECK_THROWS_AS(check_subcritical(c, make_wsp_params(0.5, 2.0)), config_error);
    const SpectralManifold t(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    CHECK_NOTHROW(check_subcritical(t, make_wsp_params(0.5, 2.0)));
}

TEST_CASE("pair kernel matches direct subordination on the circle") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const WspParams w = make_wsp_params(0.3, 2.0);  // q = 0.3
    CHECK(wsp_kernel(m, eng, w, Point(0.0), Point(1.0)) ==
          Catch::Approx(0.2871487995363426712417).epsilon(1e-11));
    // symmetry and positivity
    for (double d : {0.2, 0.9, 2.0, 3.0}) {
        const double k1 = wsp_kernel(m, eng, w, Point(0.0), Point(d));
        const double k2 = wsp_kernel(m, eng, w, Point(d), Point(0.0));
        CHECK(k1 == Catch::Approx(k2).epsilon(1e-13));
        CHECK(k1 > 0.0);
    }
    // regularization dampens and converges monotonically as eps -> 0
    const double k0 = wsp_kernel(m, eng, w, Point(0.0), Point(1.0));
    double prev = 0.0;
    for (double eps : {0.8, 0.4, 0.2, 0.1}) {
        const double ke = wsp_kernel_reg(m, eng, w, eps, Point(0.0), Point(1.0));
        CHECK(ke < k0);
        CHECK(ke > prev);
        prev = ke;
    }
    CHECK_THROWS_AS(wsp_kernel(m, eng, w, Point(1.0), Point(1.0)), numeric_error);
}

TEST_CASE("angular cell constants") {
    CHECK(unit_sphere_area(1) == Catch::Approx(2.0));
    CHECK(unit_sphere_area(2) == Catch::Approx(2.0 * M_PI));
    CHECK(unit_sphere_area(3) == Catch::Approx(4.0 * M_PI));
    CHECK(unit_ball_volume(1) == Catch::Approx(2.0));
    CHECK(unit_ball_volume(2) == Catch::Approx(M_PI));
    CHECK(unit_ball_volume(3) == Catch::Approx(4.0 * M_PI / 3.0));
    CHECK(cell_dir_avg(1, 1.7) == Catch::Approx(2.0));
    // n = 2: 2 sqrt(pi) G((p+1)/2) / G(p/2+1) at p = 2 equals pi
    CHECK(cell_dir_avg(2, 2.0) == Catch::Approx(M_PI).epsilon(1e-13));
    // n = 3: 4 pi / (p+1)
    CHECK(cell_dir_avg(3, 3.0) == Catch::Approx(M_PI).epsilon(1e-13));
}

TEST_CASE("pair context geometry") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    const PairContext c = make_pair_context(m, 64);
    CHECK(c.size() == 64);
    CHECK(c.delta == Catch::Approx(2.0 * c.h));
    CHECK(c.h == Catch::Approx(2.0 * M_PI / 64.0).epsilon(1e-13));
    // one class per offset, distances symmetric under offset negation
    CHECK(c.classes == 64);
    CHECK(c.dist[0] == 0.0);
    for (std::size_t off = 1; off < c.classes; ++off)
        CHECK(c.dist[off] == Catch::Approx(c.dist[c.classes - off]).margin(1e-13));
    CHECK_THROWS_AS(make_pair_context(m, 4), config_error);  // exclusion swallows the space

    // the matched cell radius covers exactly the mass of whole excluded cells:
    // vol_1(r) = (number of nodes with d < delta) * w.  The offset-2 node sits
    // on the exclusion boundary up to roundoff, so bracket the count.
    const double ball1 = 2.0;  // |B^1|
    const double w0 = c.rule.weights[0];
    for (double r : c.cell_radius) {
        const double count = r * ball1 / w0;
        CHECK(count == Catch::Approx(std::round(count)).margin(1e-9));
        CHECK(count >= 3.0 - 1e-9);  // offsets {0, +-1} are always strictly inside
        CHECK(count <= 5.0 + 1e-9);  // offsets {+-2} at most graze the boundary
    }
}

TEST_CASE("pair table agrees with pointwise kernel calls") {
    const SpectralManifold m(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    SubordEngine eng;
    const WspParams w = make_wsp_params(0.4, 2.0);
    const PairContext c = make_pair_context(m, 12);
    const PairTable tab = make_wsp_table(c, eng, w);
    REQUIRE(tab.K.size() == c.reps.size());
    for (std::size_t cls = 0; cls < c.reps.size(); ++cls) {
        if (c.dist[cls] < c.delta) {
            CHECK(tab.K[cls] == 0.0);
        } else {
            const double direct = subord_kernel(m, eng, w.q, 0.0, c.reps[cls], w.norm);
            CHECK(tab.K[cls] == Catch::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("quadratic seminorm matches the spectral reference") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const auto b = m.basis(7);
    SpectralFunction u{b, {0.4, 1.0, -0.6, 0.3, 0.8, -0.2, 0.15}};
    const PairContext c = make_pair_context(m, 512);
    for (double s : {0.3, 0.45}) {
        const WspParams w = make_wsp_params(s, 2.0);
        const PairTable tab = make_wsp_table(c, eng, w);
        const SeminormParts parts = wsp_seminorm(m, w, c, tab, u);
        CHECK(parts.total_pow ==
              Catch::Approx(quadratic_seminorm_pow(u, s)).epsilon(2e-4));
        CHECK(parts.pair > 0.0);
        CHECK(parts.cell > 0.0);
        CHECK(parts.seminorm == Catch::Approx(std::sqrt(parts.total_pow)).epsilon(1e-13));
    }
}

TEST_CASE("first cosine mode has seminorm 2 pi at every order") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const auto b = m.basis(3);
    SpectralFunction cosf{b, {0.0, std::sqrt(M_PI), 0.0}};  // cos(theta), lambda = 1
    const PairContext c = make_pair_context(m, 512);
    for (double s : {0.2, 0.5, 0.8}) {
        const WspParams w = make_wsp_params(s, 2.0);
        const PairTable tab = make_wsp_table(c, eng, w);
        const SeminormParts parts = wsp_seminorm(m, w, c, tab, cosf);
        // cell-correction accuracy degrades as s -> 1 (rate h^{2-2s})
        CHECK(parts.total_pow == Catch::Approx(2.0 * M_PI).epsilon(1e-3));
    }
}

TEST_CASE("torus seminorm matches the spectral reference") {
    const SpectralManifold m(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    SubordEngine eng;
    const auto b = m.basis(9);
    SpectralFunction u{b, {0.2, 1.0, -0.3, 0.6, 0.4, -0.5, 0.25, 0.7, -0.15}};
    const PairContext c = make_pair_context(m, 48);
    const WspParams w = make_wsp_params(0.35, 2.0);
    const PairTable tab = make_wsp_table(c, eng, w);
    const SeminormParts parts = wsp_seminorm(m, w, c, tab, u);
    CHECK(parts.total_pow == Catch::Approx(quadratic_seminorm_pow(u, 0.35)).epsilon(2e-3));
}

TEST_CASE("sphere seminorm matches the spectral reference") {
    const SpectralManifold m(ManifoldSpec::sphere(1.0));
    SubordEngine eng;
    const auto b = m.basis(9);
    SpectralFunction u{b, {0.1, 0.9, -0.4, 0.3, 0.5, -0.2, 0.35, 0.6, -0.25}};
    const PairContext c = make_pair_context(m, 20);
    const WspParams w = make_wsp_params(0.4, 2.0);
    const PairTable tab = make_wsp_table(c, eng, w);
    const SeminormParts parts = wsp_seminorm(m, w, c, tab, u);
    CHECK(parts.total_pow == Catch::Approx(quadratic_seminorm_pow(u, 0.4)).epsilon(5e-3));
}

TEST_CASE("sampled kernel comparability window on the circle") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const WspParams w = make_wsp_params(0.3, 1.5);
    const RatioWindow win = kernel_bound_window(m, eng, w, 64, 7, 0.05);
    CHECK(win.lo > 0.9);
    CHECK(win.hi < 4.0);
    CHECK(win.lo <= win.hi);
}

TEST_CASE("random points are deterministic and on the manifold") {
    const SpectralManifold s(ManifoldSpec::sphere(1.0));
    rng r1(5), r2(5);
    for (int k = 0; k < 20; ++k) {
        const Point a = random_point(s, r1);
        const Point b = random_point(s, r2);
        CHECK(a[0] == b[0]);
        CHECK(a[1] == b[1]);
        CHECK(a[2] == b[2]);
    }
    const SpectralManifold c(ManifoldSpec::circle(1.0));
    rng r3(9);
    for (int k = 0; k < 50; ++k) {
        const double th = random_point(c, r3)[0];
        CHECK(th >= 0.0);
        CHECK(th < 2.0 * M_PI);
    }
}

TEST_CASE("oscillation and embedding ratios stay bounded") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const WspParams w = make_wsp_params(0.4, 2.0);
    const PairContext c = make_pair_context(m, 128);
    const PairTable tab = make_wsp_table(c, eng, w);
    const auto b = m.basis(9);
    rng rg(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> coeffs(9);
        for (double& v : coeffs) v = rg.uniform(-1.0, 1.0);
        SpectralFunction u{b, coeffs};
        CHECK(poincare_ratio(m, w, c, tab, u) < 10.0);
        CHECK(embedding_ratio(m, w, c, tab, u) < 10.0);
    }
    // the zero function has no oscillation ratio
    SpectralFunction z{b, std::vector<double>(9, 0.0)};
    CHECK_THROWS_AS(poincare_ratio(m, w, c, tab, z), numeric_error);
}

TEST_CASE("geodesic-kernel seminorm is finite and comparable") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const WspParams w = make_wsp_params(0.3, 1.5);
    const auto b = m.basis(5);
    SpectralFunction u{b, {0.0, 1.0, -0.4, 0.3, 0.2}};
    const PairContext c = make_pair_context(m, 256);
    const PairTable sub = make_wsp_table(c, eng, w);
    const PairTable geo = make_geodesic_table(c, w);
    const SeminormParts a = wsp_seminorm(m, w, c, sub, u);
    const SeminormParts g = geodesic_seminorm(m, w, c, geo, u);
    CHECK(std::isfinite(g.total_pow));
    CHECK(g.total_pow > 0.0);
    // same singularity exponent: the two energies agree within a modest factor
    CHECK(g.total_pow / a.total_pow > 0.2);
    CHECK(g.total_pow / a.total_pow < 5.0);
}
