#include <catch2/catch_amalgamated.hpp>

#include "fraclap/optimizer.hpp"

using namespace fraclap;

namespace {

struct Setup {
    SpectralManifold m{ManifoldSpec::circle(1.0)};
    SubordEngine eng;
    WspParams w = make_wsp_params(0.4, 2.0);
    double ps = p_star(m, w);
    PairContext c = make_pair_context(m, 96);
    PairTable tab = make_wsp_table(c, eng, w);
};

}  // namespace

TEST_CASE("quotient is scale invariant and rejects zero") {
    Setup st;
    rng rg(3);
    std::vector<double> u(st.c.size());
    for (double& v : u) v = rg.uniform(-1.0, 1.0);
    const double q1 = rayleigh_quotient(st.c, st.tab, 2.0, st.ps, u);
    std::vector<double> u2 = u;
    for (double& v : u2) v *= -17.3;
    const double q2 = rayleigh_quotient(st.c, st.tab, 2.0, st.ps, u2);
    CHECK(q1 == Catch::Approx(q2).epsilon(1e-12));
    CHECK_THROWS_AS(
        rayleigh_quotient(st.c, st.tab, 2.0, st.ps, std::vector<double>(st.c.size(), 0.0)),
        config_error);
}

TEST_CASE("mean-zero projection removes the constant direction") {
    Setup st;
    std::vector<double> u(st.c.size(), 3.0);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += 0.1 * double(i % 7);
    detail::project_mean_zero(st.c, u);
    kahan_sum acc;
    for (std::size_t i = 0; i < u.size(); ++i) acc.add(st.c.rule.weights[i] * u[i]);
    CHECK(std::abs(acc.value()) < 1e-12);
}

TEST_CASE("descent converges to a stationary normalized profile") {
    Setup st;
    rng rg(7);
    std::vector<double> u0(st.c.size());
    for (double& v : u0) v = rg.uniform(-1.0, 1.0);
    const double q0 = rayleigh_quotient(st.c, st.tab, 2.0, st.ps, u0);
    const MinimizeResult res = minimize_quotient(st.c, st.tab, st.w, st.ps, u0);
    CHECK(res.converged);
    CHECK(res.quotient < q0);
    CHECK(res.grad_norm < 5e-6);
    // iterate is p*-normalized
    kahan_sum norm;
    for (std::size_t i = 0; i < st.c.size(); ++i)
        norm.add(st.c.rule.weights[i] * std::pow(std::abs(res.u[i]), st.ps));
    CHECK(std::pow(norm.value(), 1.0 / st.ps) == Catch::Approx(1.0).epsilon(1e-10));
    // stationarity along finite-difference directions
    const double tau = 1e-5;
    rng rd(9);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> h(st.c.size());
        for (double& v : h) v = rd.uniform(-1.0, 1.0);
        detail::project_mean_zero(st.c, h);
        double hn = 0.0;
        for (double v : h) hn += v * v;
        hn = std::sqrt(hn);
        std::vector<double> up = res.u, um = res.u;
        for (std::size_t i = 0; i < h.size(); ++i) {
            up[i] += tau * h[i] / hn;
            um[i] -= tau * h[i] / hn;
        }
        const double qp = rayleigh_quotient(st.c, st.tab, 2.0, st.ps, up);
        const double qm = rayleigh_quotient(st.c, st.tab, 2.0, st.ps, um);
        CHECK(std::abs(qp - qm) / (2.0 * tau) < 1e-4);
    }
}

TEST_CASE("independent starts land on the same level") {
    Setup st;
    const MultiStartResult ms = multi_start_minimize(st.c, st.tab, st.w, st.ps, 3, 13);
    REQUIRE(ms.quotients.size() == 3);
    CHECK(ms.spread < 0.05);
    CHECK(ms.best.converged);
    for (double q : ms.quotients) CHECK(q >= ms.best.quotient - 1e-12);
    CHECK_THROWS_AS(multi_start_minimize(st.c, st.tab, st.w, st.ps, 0, 1), config_error);
}

TEST_CASE("size mismatch is rejected") {
    Setup st;
    CHECK_THROWS_AS(minimize_quotient(st.c, st.tab, st.w, st.ps, std::vector<double>(5, 1.0)),
                    config_error);
}
