// Acceptance gate: fourteen end-to-end criteria, one pass/fail line each.
// Exit status is zero only if every criterion passes.

#include <cstdio>
#include <string>
#include <vector>

#include "fraclap/experiments.hpp"

using namespace fraclap;

namespace {

int failures = 0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %02d %-24s %s  (%s)\n", idx, name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

ExperimentConfig base(const char* experiment, ManifoldSpec spec) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.manifold = std::move(spec);
    return cfg;
}

struct RunSummary {
    bool pass = true;
    std::size_t rows = 0;
    double worst = 0.0;  // largest |deficit| over non-skipped rows
};

RunSummary run_all(const ExperimentConfig& cfg) {
    const RunReport rep = run_experiment(cfg);
    RunSummary s;
    s.pass = rep.all_pass() && !rep.numeric_failure;
    s.rows = rep.rows.size();
    for (const ReportRow& r : rep.rows)
        if (r.extra.rfind("skipped", 0) != 0) s.worst = std::max(s.worst, std::abs(r.deficit));
    return s;
}

// 1: heat kernel mass on all three model spaces
void criterion_heat_mass() {
    bool pass = true;
    double worst = 0.0;
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0),
                              ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}),
                              ManifoldSpec::sphere(1.0)}) {
        ExperimentConfig cfg = base("heat-mass", spec);
        cfg.t_values = {0.05, 0.1, 1.0, 10.0};
        const RunReport rep = run_experiment(cfg);
        pass = pass && rep.all_pass();
        for (const ReportRow& r : rep.rows) worst = std::max(worst, r.deficit);
    }
    report(1, "heat-mass", pass, "worst |mass - 1| = " + fmt(worst) + ", tol 1e-8");
}

// 2: spectral evaluation against direct image sums on circle and torus
void criterion_image_sum() {
    double worst = 0.0;
    {
        const SpectralManifold m(ManifoldSpec::circle(1.0));
        HeatKernelEvaluator ev = make_heat_evaluator(m, recommended_truncation(m, 0.05, 1e-12));
        for (double t : {0.05, 0.1, 0.3, 0.7, 1.0, 2.0})
            for (double d : {0.0, 0.4, 1.3, M_PI})
                worst = std::max(worst, std::abs(heat_kernel(ev, t, Point(0.0), Point(d)) -
                                                 heat::exact_kernel(m, t, Point(0.0), Point(d))));
    }
    {
        const SpectralManifold m(ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
        HeatKernelEvaluator ev = make_heat_evaluator(m, recommended_truncation(m, 0.05, 1e-12));
        const std::vector<Point> ys{Point(0.0, 0.0), Point(1.0, 2.5), Point(M_PI, M_PI),
                                    Point(0.3, 0.0)};
        for (double t : {0.05, 0.1, 0.3, 0.7, 1.0, 2.0})
            for (const Point& y : ys)
                worst = std::max(worst, std::abs(heat_kernel(ev, t, Point(0.0, 0.0), y) -
                                                 heat::exact_kernel(m, t, Point(0.0, 0.0), y)));
    }
    report(2, "image-sum-agreement", worst < 1e-10,
           "worst |spectral - images| = " + fmt(worst) + ", tol 1e-10");
}

// 3: long-time decay rate matches the spectral gap on circle and sphere
void criterion_longtime() {
    bool pass = true;
    std::string detail;
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0), ManifoldSpec::sphere(1.0)}) {
        const RunReport rep = run_experiment(base("longtime", spec));
        pass = pass && rep.all_pass();
        detail += detail.empty() ? "" : ", ";
        detail += "rate " + fmt(rep.rows[0].lhs) + " vs " +
                  fmt(rep.rows[0].rhs);
    }
    report(3, "longtime-rate", pass, detail + ", tol 5%");
}

// 4: scalar subordination identity
void criterion_scalar_identity() {
    const RunSummary s = run_all(base("semigroup", ManifoldSpec::circle(1.0)));
    report(4, "scalar-identity", s.pass && s.rows == 9,
           "worst defect = " + fmt(s.worst) + " over 9 pairs, tol 1e-8");
}

// 5: free-space kernel closed form on the 27-point grid
void criterion_euclid() {
    const RunSummary s = run_all(base("euclid-kernel", ManifoldSpec::circle(1.0)));
    report(5, "euclid-closed-form", s.pass && s.rows == 28,
           "worst relative gap = " + fmt(s.worst) + ", tol 1e-7");
}

// 6: singular integral with extrapolation matches the spectral operator at 8 points
void criterion_singular() {
    const RunSummary s = run_all(base("frac-agreement", ManifoldSpec::circle(1.0)));
    report(6, "singular-agreement", s.pass && s.rows == 8,
           "worst relative gap = " + fmt(s.worst) + " over 8 points, tol 5e-3");
}

// 7: quadratic seminorm against its spectral form
void criterion_quadratic_seminorm() {
    const SpectralManifold m(ManifoldSpec::circle(1.0));
    SubordEngine eng;
    const auto b = m.basis(7);
    const PairContext c = make_pair_context(m, 512);
    SpectralFunction u{b, {0.4, 1.0, -0.6, 0.3, 0.8, -0.2, 0.15}};
    bool pass = true;
    double worst = 0.0;
    for (double s : {0.3, 0.6}) {
        const WspParams w = make_wsp_params(s, 2.0);
        const PairTable tab = make_wsp_table(c, eng, w);
        double ref = 0.0;
        for (std::size_t k = 0; k < u.coeffs.size(); ++k)
            ref += std::pow(b->lambda[k], s) * u.coeffs[k] * u.coeffs[k];
        const double half = 0.5 * wsp_seminorm(m, w, c, tab, u).total_pow;
        worst = std::max(worst, std::abs(half - ref) / ref);
    }
    pass = worst < 1e-3;
    // first cosine mode: the spectral form equals pi exactly, independent of s
    SpectralFunction cosf{b, std::vector<double>(7, 0.0)};
    cosf.coeffs[1] = std::sqrt(M_PI);
    for (double s : {0.25, 0.5, 0.9}) {
        const WspParams w = make_wsp_params(s, 2.0);
        const PairTable tab = make_wsp_table(c, eng, w);
        const double half = 0.5 * wsp_seminorm(m, w, c, tab, cosf).total_pow;
        const double rel = std::abs(half - M_PI) / M_PI;
        worst = std::max(worst, rel);
        pass = pass && rel < 1e-3;
    }
    report(7, "quadratic-seminorm", pass,
           "worst relative gap = " + fmt(worst) + ", tol 1e-3");
}

// 8: extension route: mass, flux constant, operator agreement
void criterion_extension() {
    const RunSummary s = run_all(base("dtn", ManifoldSpec::circle(1.0)));
    report(8, "extension-route", s.pass,
           "mass/flux/agreement rows all pass, worst gap = " + fmt(s.worst));
}

// 9: operator limits at the endpoints of the order range
void criterion_limits() {
    const RunSummary s = run_all(base("s-limits", ManifoldSpec::circle(1.0)));
    report(9, "order-limits", s.pass,
           "defect sequences decrease, mode defects matched to 1e-12");
}

// 10: equality at the constant function at the sharp zero-order constant
void criterion_sharp_constant() {
    bool pass = true;
    double worst = 0.0;
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0),
                              ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI})}) {
        ExperimentConfig cfg = base("beta-program", spec);
        cfg.s_values = {0.3};
        cfg.p_values = {2.0};
        const RunReport rep = run_experiment(cfg);
        pass = pass && rep.all_pass();
        for (const ReportRow& r : rep.rows)
            if (r.extra.rfind("form=", 0) == 0 && r.extra.find("reduced") == std::string::npos)
                worst = std::max(worst, std::abs(r.deficit));
    }
    report(10, "sharp-constant", pass,
           "equality defect at u = 1: " + fmt(worst) + ", tol 1e-12");
}

// 11: finite minimal leading coefficient over families; convexity and splitting
void criterion_families() {
    bool pass = true;
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0),
                              ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI})}) {
        ExperimentConfig cfg = base("beta-program", spec);
        cfg.s_values = {0.3, 0.5};
        cfg.p_values = {1.5, 2.0};
        cfg.trials = 200;
        const RunReport rep = run_experiment(cfg);
        pass = pass && rep.all_pass();
    }
    ExperimentConfig bk = base("bakry", ManifoldSpec::circle(1.0));
    bk.trials = 200;
    pass = pass && run_all(bk).pass;
    ExperimentConfig sp = base("subcritical-split", ManifoldSpec::circle(1.0));
    sp.trials = 200;
    pass = pass && run_all(sp).pass;
    report(11, "family-coefficients", pass,
           "finite minimal A on both spaces (one supercritical pair skipped); "
           "convexity and splitting deficits >= -1e-9 over 200 trials");
}

// 12: second-order deficit decay on the 3-torus defeats every fixed coefficient
void criterion_counterexample() {
    const ExperimentConfig cfg =
        base("counterexample", ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI, 2.0 * M_PI}));
    const RunReport rep = run_experiment(cfg);
    double slope_d = 0.0, c2gap = 0.0;
    for (const ReportRow& r : rep.rows) {
        if (r.extra == "slope-D") slope_d = r.lhs;
        if (r.extra == "second-order-coefficient") c2gap = r.deficit;
    }
    report(12, "deficit-curve", rep.all_pass(),
           "D slope " + fmt(slope_d) + " (2 +- 0.02), c2 gap " +
               fmt(c2gap) + " (tol 2%)");
}

// 13: partition orthogonality, splitting identity, product-rule bound
void criterion_orthogonality() {
    bool pass = true;
    for (ManifoldSpec spec : {ManifoldSpec::circle(1.0),
                              ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI})}) {
        ExperimentConfig cfg = base("orthogonality", spec);
        cfg.trials = 100;
        pass = pass && run_all(cfg).pass;
    }
    report(13, "orthogonality", pass,
           "residuals < 1e-10, split identity < 1e-8, product-rule deficit >= -1e-8 "
           "over 100 trials");
}

// 14: discrete quotient minimization on the 2-torus
void criterion_optimizer() {
    const ExperimentConfig cfg =
        base("minimize-quotient", ManifoldSpec::flat_torus({2.0 * M_PI, 2.0 * M_PI}));
    const RunReport rep = run_experiment(cfg);
    std::string detail;
    for (const ReportRow& r : rep.rows)
        if (r.extra.rfind("multi-start", 0) == 0)
            detail = "spread " + fmt(r.lhs) + " (tol 5%)";
    report(14, "quotient-minimizer", rep.all_pass(),
           "invariance 1e-10, stationarity 1e-4, " + detail);
}

}  // namespace

int main() {
    criterion_heat_mass();
    criterion_image_sum();
    criterion_longtime();
    criterion_scalar_identity();
    criterion_euclid();
    criterion_singular();
    criterion_quadratic_seminorm();
    criterion_extension();
    criterion_limits();
    criterion_sharp_constant();
    criterion_families();
    criterion_counterexample();
    criterion_orthogonality();
    criterion_optimizer();
    std::printf("%d/14 criteria pass\n", 14 - failures);
    return failures == 0 ? 0 : 1;
}
