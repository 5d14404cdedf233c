#include <catch2/catch_amalgamated.hpp>

#include "fraclap/heat_kernel.hpp"

using namespace fraclap;

namespace {

// independent reference: direct image sum on a circle of circumference L
double naive_circle_kernel(double t, double d, double L) {
    double acc = 0.0;
    for (int j = -60; j <= 60; ++j)
        acc += std::exp(-(d + j * L) * (d + j * L) / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
    return acc;
}

// independent reference: truncated Legendre series on the unit sphere
double naive_sphere_kernel(double t, double gamma) {
    double acc = 0.0;
    double pm2 = 1.0, pm1 = std::cos(gamma);
    for (int l = 0; l < 80; ++l) {
        double pl;
        if (l == 0) pl = 1.0;
        else if (l == 1) pl = pm1;
        else {
            pl = ((2.0 * l - 1.0) * std::cos(gamma) * pm1 - (l - 1.0) * pm2) / l;
            pm2 = pm1;
            pm1 = pl;
        }
        acc += (2.0 * l + 1.0) / (4.0 * M_PI) * std::exp(-l * (l + 1.0) * t) * pl;
    }
    return acc;
}

}  // namespace

TEST_CASE("circle kernel matches the image sum") {
    // frozen reference value for one argument
    CHECK(heat::wrapped_gaussian_1d(0.3, 1.0, 2.0 * M_PI) ==
          Catch::Approx(0.22383210162978921896).epsilon(1e-13));

    const SpectralManifold m(ManifoldSpec::circle(1.0));
    HeatKernelEvaluator ev = make_heat_evaluator(m, 64);
    for (double t : {0.05, 0.1, 0.5, 1.0, 2.0})
        for (double d : {0.0, 0.3, 1.0, M_PI}) {
            const double ref = naive_circle_kernel(t, d, 2.0 * M_PI);
            CHECK(heat_kernel(ev, t, Point(0.0), Point(d)) ==
                  Catch::Approx(ref).margin(1e-10));
        }
    // below the spectral crossover the evaluator switches to image sums
    CHECK(heat_kernel(ev, 0.01, Point(0.0), Point(0.5)) ==
          Catch::Approx(naive_circle_kernel(0.01, 0.5, 2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("torus kernel factorizes over axes") {
    CHECK(heat::kernel_1d(0.7, 1.0, 2.0 * M_PI) * heat::kernel_1d(0.7, 2.5, 2.0 * M_PI) ==
          Catch::Approx(0.0090144754626647920389).epsilon(1e-12));

    const SpectralManifold m(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    HeatKernelEvaluator ev = make_heat_evaluator(m, recommended_truncation(m, 0.1, 1e-12));
    for (double t : {0.1, 0.5, 1.5}) {
        const double ref = naive_circle_kernel(t, 1.0, 2.0 * M_PI) *
                           naive_circle_kernel(t, 2.5, 2.0 * M_PI);
        CHECK(heat_kernel(ev, t, Point(0.0, 0.0), Point(1.0, 2.5)) ==
              Catch::Approx(ref).margin(1e-10));
    }
}

TEST_CASE("sphere kernel matches the Legendre series") {
    CHECK(naive_sphere_kernel(0.5, 1.0) == Catch::Approx(0.12521314305667952588).epsilon(1e-12));
    const SpectralManifold m(ManifoldSpec::sphere(1.0));
    HeatKernelEvaluator ev = make_heat_evaluator(m, recommended_truncation(m, 0.1, 1e-12));
    const Point north(0.0, 0.0);
    for (double t : {0.1, 0.5, 2.0})
        for (double g : {0.0, 0.7, 1.0, M_PI - 0.1}) {
            const Point q(g, 0.0);  // colatitude g, seen from the pole
            CHECK(heat_kernel(ev, t, north, q) ==
                  Catch::Approx(naive_sphere_kernel(t, g)).margin(1e-10));
        }
}

TEST_CASE("kernel mass is one on every model space") {
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0),
                              ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}),
                              ManifoldSpec::sphere(1.0)}) {
        const SpectralManifold m(spec);
        const int K = recommended_truncation(m, 0.1, 1e-12);
        HeatKernelEvaluator ev = make_heat_evaluator(m, K);
        const QuadratureRule rule = m.quadrature(m.default_order(K));
        for (double t : {0.1, 1.0, 10.0})
            CHECK(mass_defect(ev, t, rule.nodes[1], rule) < 1e-10);
    }
}

TEST_CASE("semigroup composition property") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    HeatKernelEvaluator ev = make_heat_evaluator(m, 48);
    const QuadratureRule rule = m.quadrature(96);
    const Point x(0.3), y(2.1);
    const double t1 = 0.4, t2 = 0.7;
    kahan_sum acc;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc.add(rule.weights[i] * heat_kernel(ev, t1, x, rule.nodes[i]) *
                heat_kernel(ev, t2, rule.nodes[i], y));
    CHECK(acc.value() == Catch::Approx(heat_kernel(ev, t1 + t2, x, y)).epsilon(1e-11));
}

TEST_CASE("heat flow damps coefficients exponentially") {
    const SpectralManifold m(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    const auto b = m.basis(9);
    HeatKernelEvaluator ev = make_heat_evaluator(m, 9);
    SpectralFunction u{b, {0.5, -1.0, 0.25, 0.0, 1.5, 2.0, -0.5, 0.75, 0.1}};
    const double t = 0.8;
    const SpectralFunction v = heat_apply(ev, t, u);
    for (std::size_t k = 0; k < u.coeffs.size(); ++k)
        CHECK(v.coeffs[k] ==
              Catch::Approx(u.coeffs[k] * std::exp(-b->lambda[k] * t)).margin(1e-15));
}

TEST_CASE("truncation controls and tail bounds") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    const int k1 = recommended_truncation(m, 0.1, 1e-8);
    const int k2 = recommended_truncation(m, 0.1, 1e-12);
    const int k3 = recommended_truncation(m, 1.0, 1e-8);
    CHECK(k2 > k1);   // tighter tolerance needs more modes
    CHECK(k1 > k3);   // shorter time needs more modes
    HeatKernelEvaluator ev = make_heat_evaluator(m, k1);
    CHECK(heat_tail_bound(ev, 0.1) < 1e-8);
}

TEST_CASE("Gaussian envelope ratio is positive and bounded in the bulk") {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    HeatKernelEvaluator ev = make_heat_evaluator(m, 96);
    for (double t : {0.05, 0.2, 1.0})
        for (double d : {0.1, 0.5, 1.5}) {
            const double r = gaussian_bound_ratio(ev, t, Point(0.0), Point(d), 4.05);
            CHECK(r > 0.0);
            CHECK(r < 10.0);
        }
}
