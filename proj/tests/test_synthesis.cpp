#include "safehj/synthesis.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace safehj;
using namespace safehj::testing;

namespace {

SystemSpec contractive_spec(double T = 1.0) {
    return make_spec(1, {"-x1"}, {{"1"}}, box_disturbance({0}, {0.1}), "x1^2-1",
                     Box{{-1.5}, {1.5}}, Box{{-0.2}, {0.2}}, T);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("template enumeration") {
    auto t = Template::make(1, 2, 1);  // 1, x, x^2 crossed with 1, t
    CHECK(t.size() == 6);
    auto t2 = Template::make(2, 2, 0);  // 1, x1, x2, x1^2, x1 x2, x2^2 in some order
    CHECK(t2.size() == 6);
    // pick out 1 + x1^2 + x2^2 without assuming the basis order
    std::vector<double> coeffs(t2.size(), 0.0);
    for (size_t j = 0; j < t2.basis.size(); ++j) {
        const auto& m = t2.basis[j];
        bool constant = m.xexp[0] == 0 && m.xexp[1] == 0 && m.texp == 0;
        bool sq = (m.xexp[0] == 2 && m.xexp[1] == 0) || (m.xexp[0] == 0 && m.xexp[1] == 2);
        if (constant || (sq && m.texp == 0)) coeffs[j] = 1.0;
    }
    auto p = t2.instantiate(coeffs);
    double x[] = {0.5, -0.5};
    CHECK(p.eval(x) == doctest::Approx(1.5));
}

TEST_CASE("build_constraints rows match hand derivations") {
    auto spec = contractive_spec();
    double margin = 0.01;

    // constant template: init row is c0 <= -margin
    auto c0 = Template::make(1, 0, 0);
    SamplePoints pts;
    pts.init_pts = {{0.1}};
    auto lfp = build_constraints(spec, c0, CertMode::Eq5, 0.0, pts, margin);
    REQUIRE(lfp.rows.size() == 1);
    CHECK(lfp.rows[0][0] == doctest::Approx(1.0));
    CHECK(lfp.rhs[0] == doctest::Approx(-margin));

    // {1, t} template, Lie row: Lv - lambda v = c_t - lambda (c_1 + c_t t) <= -margin
    auto ct = Template::make(1, 0, 1);
    REQUIRE(ct.size() == 2);
    SamplePoints lie;
    lie.lie_pts = {{{0.5}, 0.25, {0.1}}};
    double lambda = 2.0;
    auto lfp2 = build_constraints(spec, ct, CertMode::Eq8, lambda, lie, margin);
    REQUIRE(lfp2.rows.size() == 1);
    // identify which column is the constant and which is t
    std::vector<double> c_const(2, 0.0), c_t(2, 0.0);
    for (size_t j = 0; j < 2; ++j) {
        auto probe = std::vector<double>(2, 0.0);
        probe[j] = 1.0;
        auto v = ct.instantiate(probe);
        if (v.depends_on_t())
            c_t[j] = 1.0;
        else
            c_const[j] = 1.0;
    }
    // row . c must equal (Lv - lambda v)(x=0.5, t=0.25) for any c
    std::vector<double> xp = {0.5};
    for (auto& probe : {std::vector<double>{1, 0}, std::vector<double>{0, 1},
                        std::vector<double>{0.3, -0.7}}) {
        auto v = ct.instantiate(probe);
        auto lv = lie_derivative(spec, v, std::vector<double>{0.1});
        double expect = lv.eval(xp, 0.25) - lambda * v.eval(xp, 0.25);
        CHECK(dot(lfp2.rows[0], probe) == doctest::Approx(expect));
    }
    CHECK(lfp2.rhs[0] == doctest::Approx(-margin));

    // boundary row (eq5): -v(x,t) <= 0
    SamplePoints bnd;
    bnd.boundary_pts = {{{1.0}, 0.5}};
    auto lfp3 = build_constraints(spec, ct, CertMode::Eq5, 0.0, bnd, margin);
    REQUIRE(lfp3.rows.size() == 1);
    std::vector<double> xb = {1.0};
    for (auto& probe : {std::vector<double>{1, 0}, std::vector<double>{0.2, 0.4}}) {
        auto v = ct.instantiate(probe);
        CHECK(dot(lfp3.rows[0], probe) == doctest::Approx(-v.eval(xb, 0.5)));
    }
    CHECK(lfp3.rhs[0] == doctest::Approx(0.0));
}

TEST_CASE("solve_feasibility picks slack-maximizing interior points") {
    // c <= -1 and -c <= 2, i.e. c in [-2,-1]: the max-slack point is the middle
    LinearFeasibilityProblem lfp;
    lfp.rows = {{1.0}, {-1.0}};
    lfp.rhs = {-1.0, 2.0};
    auto c = solve_feasibility(lfp);
    REQUIRE(c.has_value());
    CHECK((*c)[0] == doctest::Approx(-1.5));

    // contradictory: c <= -1 and -c <= 0
    LinearFeasibilityProblem bad;
    bad.rows = {{1.0}, {-1.0}};
    bad.rhs = {-1.0, 0.0};
    CHECK(!solve_feasibility(bad).has_value());

    // any returned point satisfies every row
    LinearFeasibilityProblem two;
    two.rows = {{1.0, 1.0}, {1.0, -1.0}, {-1.0, 0.0}};
    two.rhs = {1.0, 0.0, 3.0};
    auto z = solve_feasibility(two);
    REQUIRE(z.has_value());
    for (size_t r = 0; r < two.rows.size(); ++r)
        CHECK(dot(two.rows[r], *z) <= two.rhs[r] + 1e-9);
}

TEST_CASE("initial_samples populates every condition") {
    auto spec = contractive_spec();
    auto pts = initial_samples(spec, CertMode::Eq5, 40, 11);
    CHECK(pts.init_pts.size() >= 10);
    CHECK(pts.boundary_pts.size() >= 10);
    CHECK(pts.lie_pts.size() >= 10);
    for (auto& x : pts.init_pts) CHECK(spec.init.contains(x));
    for (auto& [x, t] : pts.boundary_pts) {
        CHECK(std::abs(spec.safe.h.eval(x)) <= 1e-6);
        CHECK(t >= 0.0);
        CHECK(t <= spec.T);
    }
    for (auto& [x, t, d] : pts.lie_pts) {
        CHECK(spec.safe.h.eval(x) <= 1e-9);
        CHECK(spec.D.contains(d));
    }
    // deterministic in the seed
    auto again = initial_samples(spec, CertMode::Eq5, 40, 11);
    CHECK(again.init_pts == pts.init_pts);
}

TEST_CASE("cegis finds the classic certificate for stationary dynamics") {
    auto spec = make_spec(1, {"0"}, {{"0"}}, no_disturbance(), "x1^2-1", Box{{-1.5}, {1.5}},
                          Box{{-0.5}, {0.5}}, 1.0);
    SynthesisInfo info;
    auto cert = cegis_synthesize(spec, Template::make(1, 2, 1), CertMode::Eq5, 0.0, 1e-3, 30,
                                 5, 1e-6, 1'000'000, &info);
    REQUIRE(cert.has_value());
    CHECK(check_certificate(spec, *cert).status == CheckStatus::Valid);
    CHECK(info.failure.empty());
    CHECK(info.iterations >= 1);
}

TEST_CASE("cegis handles the disturbed contractive system") {
    auto spec = contractive_spec();
    auto cert = cegis_synthesize(spec, Template::make(1, 2, 2), CertMode::Eq5, 0.0, 1e-3, 40,
                                 5);
    REQUIRE(cert.has_value());
    // independent re-check
    auto rep = check_certificate(spec, *cert);
    CHECK(rep.status == CheckStatus::Valid);
}

TEST_CASE("cegis gives up on an unsafe instance") {
    auto spec = make_spec(1, {"1"}, {{"0"}}, no_disturbance(), "x1^2-1", Box{{-1.5}, {1.5}},
                          Box{{0.3}, {0.5}}, 1.0);
    SynthesisInfo info;
    auto cert = cegis_synthesize(spec, Template::make(1, 2, 1), CertMode::Eq5, 0.0, 1e-3, 15,
                                 5, 1e-6, 200'000, &info);
    CHECK(!cert.has_value());
    CHECK(!info.failure.empty());
}

TEST_CASE("fit route recovers an exact polynomial value function") {
    auto spec = make_spec(1, {"0"}, {{"0"}}, no_disturbance(), "x1^2-1", Box{{-1.5}, {1.5}},
                          Box{{-0.5}, {0.5}}, 1.0);
    Grid g;
    g.bounds = spec.clamp_box;
    g.counts = {101};
    g.T = spec.T;
    auto vg = solve_value_function(spec, g);
    SynthesisInfo info;
    auto cert = fit_from_value_function(spec, vg, 2, 1, 1e-6, 1'000'000, &info);
    REQUIRE(cert.has_value());
    CHECK(cert->mode == CertMode::Eq7);
    CHECK(check_certificate(spec, *cert).status == CheckStatus::Valid);
    CHECK(info.route == "fit");
    // V = h exactly, so the fit residual is tiny
    CHECK(info.eps_hat < 0.05);
}

TEST_CASE("epsilon shift identities") {
    // w' = w - 2 e t + 2 (T+1) e: Lw' = Lw - 2 e and w'(x,0) = w(x,0) + 2 (T+1) e
    auto spec = contractive_spec(2.0);
    auto w = PolyExpr::parse("x1^2 - 1 + 0.3*t", 1);
    double e = 0.125;
    auto shift = PolyExpr::time_var(1).scaled(-2.0 * e) +
                 PolyExpr::constant(1, 2.0 * (spec.T + 1.0) * e);
    auto wp = w + shift;
    std::vector<double> d = {0.1};
    auto lw = lie_derivative(spec, w, d);
    auto lwp = lie_derivative(spec, wp, d);
    CHECK(lwp == lw + PolyExpr::constant(1, -2.0 * e));
    double x[] = {0.4};
    CHECK(wp.eval(x, 0.0) == doctest::Approx(w.eval(x, 0.0) + 2.0 * (spec.T + 1.0) * e));
}
