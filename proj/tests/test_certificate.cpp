#include "safehj/certificate.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "safehj/sim.hpp"

using namespace safehj;
using namespace safehj::testing;

namespace {

SystemSpec stationary_spec() {
    return make_spec(1, {"0"}, {{"0"}}, no_disturbance(), "x1^2-1", Box{{-1.5}, {1.5}},
                     Box{{-0.5}, {0.5}}, 1.0);
}

SystemSpec contractive_spec() {
    return make_spec(1, {"-x1"}, {{"1"}}, box_disturbance({0}, {0.1}), "x1^2-1",
                     Box{{-1.5}, {1.5}}, Box{{-0.2}, {0.2}}, 1.0);
}

}  // namespace

TEST_CASE("lie_derivative symbolic cases") {
    auto spec = contractive_spec();
    auto v = PolyExpr::parse("x1^2-1", 1);
    auto lie = lie_derivative(spec, v, std::vector<double>{0.1});
    // Lv = 2x(-x + 0.1) = -2x^2 + 0.2x
    double x[] = {0.7};
    CHECK(lie.eval(x) == doctest::Approx(-2 * 0.49 + 0.2 * 0.7));

    auto vt = PolyExpr::time_var(1);
    CHECK(lie_derivative(spec, vt, std::vector<double>{0.0}).eval(x) == doctest::Approx(1.0));

    auto still = stationary_spec();
    CHECK(lie_derivative(still, v, std::vector<double>{0.0}).is_zero());
}

TEST_CASE("vertex reduction: sup over D attained at a box vertex") {
    auto spec = make_spec(1, {"-x1"}, {{"1", "x1"}}, box_disturbance({0, 0.1}, {0.1, 0.2}),
                          "x1^2-1", Box{{-1.5}, {1.5}}, Box{{-0.2}, {0.2}}, 1.0);
    auto v = PolyExpr::parse("x1^2 + x1*t - 1", 1);
    auto vertex_polys = lie_derivative_vertices(spec, v);
    auto verts = spec.D.vertices();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 1.0),
        ud(-1.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
        double x[] = {ux(rng)};
        double t = ut(rng);
        double best = -1e30;
        for (const auto& p : vertex_polys) best = std::max(best, p.eval(x, t));
        // random interior d never beats the vertex max
        std::vector<double> d = {0.1 * ud(rng), 0.1 + 0.2 * ud(rng)};
        CHECK(lie_derivative(spec, v, d).eval(x, t) <= best + 1e-9);
    }
}

TEST_CASE("check_certificate accepts the stationary classic") {
    auto spec = stationary_spec();
    Certificate cert{PolyExpr::parse("x1^2-1", 1), 0.0, CertMode::Eq5};
    auto rep = check_certificate(spec, cert);
    CHECK(rep.status == CheckStatus::Valid);
    CHECK(rep.conditions.size() == 3);
}

TEST_CASE("check_certificate rejects a time-drifting candidate") {
    auto spec = stationary_spec();
    Certificate cert{PolyExpr::parse("x1^2-1+t", 1), 0.0, CertMode::Eq5};
    auto rep = check_certificate(spec, cert);
    REQUIRE(rep.status == CheckStatus::Invalid);
    REQUIRE(rep.counterexample.has_value());
    CHECK(rep.counterexample->condition == CertCondition::LieNonpositive);
    // confirmed by direct evaluation: Lv = 1
    CHECK(evaluate_violation(spec, cert, *rep.counterexample) > 1e-6);
    CHECK(evaluate_violation(spec, cert, *rep.counterexample) == doctest::Approx(1.0));
}

TEST_CASE("check_certificate catches the disturbance-driven Lie violation") {
    auto spec = contractive_spec();
    Certificate cert{PolyExpr::parse("x1^2-1", 1), 0.0, CertMode::Eq5};
    auto rep = check_certificate(spec, cert);
    REQUIRE(rep.status == CheckStatus::Invalid);
    REQUIRE(rep.counterexample.has_value());
    CHECK(rep.counterexample->condition == CertCondition::LieNonpositive);
    // e.g. at x = 0.05, d = 0.1: Lv = -2 x^2 + 2 x d = 0.005
    CHECK(evaluate_violation(spec, cert, *rep.counterexample) > 1e-6);
}

TEST_CASE("eq8 verdicts agree with brute-force sign checks") {
    auto spec = contractive_spec();
    auto brute_worst = [&](const Certificate& cert) {
        // max over a dense grid of Lv - lambda v
        double worst = -1e30;
        for (int xi = 0; xi <= 400; ++xi) {
            double x[] = {-1.0 + xi * 0.005};
            for (int ti = 0; ti <= 20; ++ti) {
                double t = ti * 0.05;
                for (double d : {-0.1, 0.1}) {
                    double lie =
                        lie_derivative(spec, cert.v, std::vector<double>{d}).eval(x, t);
                    worst = std::max(lie - cert.lambda * cert.v.eval(x, t), worst);
                }
            }
        }
        return worst;
    };

    // lambda = 1: Lv - v = -3x^2 + 2xd + 1 is +1 at the origin -> invalid
    Certificate pos{PolyExpr::parse("x1^2-1", 1), 1.0, CertMode::Eq8};
    CHECK(brute_worst(pos) > 0.5);
    auto rep_pos = check_certificate(spec, pos);
    REQUIRE(rep_pos.status == CheckStatus::Invalid);
    CHECK(evaluate_violation(spec, pos, *rep_pos.counterexample) > 1e-6);

    // lambda = -1: Lv + v = -x^2 + 2xd - 1 <= -(|x| - 0.1)^2 - 0.98 < 0 -> valid
    Certificate neg{PolyExpr::parse("x1^2-1", 1), -1.0, CertMode::Eq8};
    CHECK(brute_worst(neg) < 0.0);
    auto rep_neg = check_certificate(spec, neg);
    CHECK(rep_neg.status == CheckStatus::Valid);
}

TEST_CASE("eq7 implies eq5") {
    auto spec = stationary_spec();
    Certificate cert{PolyExpr::parse("x1^2-1", 1), 0.0, CertMode::Eq7};
    auto rep7 = check_certificate(spec, cert);
    REQUIRE(rep7.status == CheckStatus::Valid);
    cert.mode = CertMode::Eq5;
    CHECK(check_certificate(spec, cert).status == CheckStatus::Valid);
}

TEST_CASE("eq3 static mode") {
    auto spec = stationary_spec();
    Certificate cert{PolyExpr::parse("x1^2-1", 1), 0.0, CertMode::Eq3Static};
    CHECK(check_certificate(spec, cert).status == CheckStatus::Valid);
    Certificate bad{PolyExpr::parse("x1^2-1+t", 1), 0.0, CertMode::Eq3Static};
    CHECK_THROWS_AS(check_certificate(spec, bad), std::invalid_argument);
}

TEST_CASE("valid certificates have no simulated counterexamples") {
    auto spec = contractive_spec();
    Certificate cert{PolyExpr::parse("x1^2-1", 1), -1.0, CertMode::Eq8};
    REQUIRE(check_certificate(spec, cert).status == CheckStatus::Valid);
    CHECK(!monte_carlo_falsify(spec, 10000, spec.T / 400.0, 99).has_value());
}

TEST_CASE("transform_lambda identities") {
    auto spec = contractive_spec();
    Certificate cert{PolyExpr::parse("x1^2-1+0.5*t", 1), 0.7, CertMode::Eq8};
    auto tf = transform_lambda(spec, cert);

    // lambda = 0 is the identity
    Certificate id{PolyExpr::parse("x1^2-1+0.5*t", 1), 0.0, CertMode::Eq8};
    auto tf0 = transform_lambda(spec, id);
    double x[] = {0.3};
    CHECK(tf0.value(x, 0.8) == doctest::Approx(id.v.eval(x, 0.8)));

    // v = 1, lambda = 1: v'(x,1) = e^-1
    Certificate one{PolyExpr::constant(1, 1.0), 1.0, CertMode::Eq8};
    auto tf1 = transform_lambda(spec, one);
    CHECK(tf1.value(x, 1.0) == doctest::Approx(std::exp(-1.0)));

    // finite-difference check of Lv' = e^{-lambda t}(Lv - lambda v) along trajectories
    auto traj = integrate(spec, std::vector<double>{0.15},
                          DisturbanceSignal::constant({0.1}), 1e-3);
    int checked = 0;
    for (size_t k = 10; k + 10 < traj.times.size() && checked < 100; k += 9, ++checked) {
        double t = traj.times[k];
        double dt = traj.times[k + 1] - traj.times[k - 1];
        double num = (tf.value(traj.states[k + 1], traj.times[k + 1]) -
                      tf.value(traj.states[k - 1], traj.times[k - 1])) /
                     dt;
        double ana = tf.lie(traj.states[k], t, std::vector<double>{0.1});
        CHECK(num == doctest::Approx(ana).epsilon(1e-5));
    }
    CHECK(checked == 100);
}

TEST_CASE("certificate serialization is bit-exact") {
    Certificate cert;
    cert.v = PolyExpr(2);
    cert.v.add_term(0.1 + 0.2, {2, 0}, 0);  // deliberately non-representable sum
    cert.v.add_term(-1.0 / 3.0, {0, 1}, 3);
    cert.lambda = std::nextafter(0.5, 1.0);
    cert.mode = CertMode::Eq8;
    auto text = cert.serialize();
    auto back = Certificate::deserialize(text, 2);
    CHECK(back.mode == cert.mode);
    CHECK(back.lambda == cert.lambda);
    CHECK(back.v == cert.v);
    CHECK(back.serialize() == text);
}

TEST_CASE("ball disturbance Lie condition") {
    auto spec = make_spec(1, {"-x1"}, {{"1"}}, ball_disturbance({0}, 0.1), "x1^2-1",
                          Box{{-1.5}, {1.5}}, Box{{-0.2}, {0.2}}, 1.0);
    Certificate good{PolyExpr::parse("x1^2-1", 1), -1.0, CertMode::Eq8};
    CHECK(check_certificate(spec, good).status == CheckStatus::Valid);
    Certificate bad{PolyExpr::parse("x1^2-1", 1), 0.0, CertMode::Eq5};
    auto rep = check_certificate(spec, bad);
    REQUIRE(rep.status == CheckStatus::Invalid);
    CHECK(evaluate_violation(spec, bad, *rep.counterexample) > 1e-6);
}
