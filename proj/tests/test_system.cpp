#include "safehj/system.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace safehj;
using namespace safehj::testing;

TEST_CASE("eval_field examples") {
    auto spec = spec_1d("-x1", 0.1, Box{{-0.2}, {0.2}}, 1.0);
    double x[] = {1.0}, d[] = {0.1};
    CHECK(eval_field(spec, x, d)[0] == doctest::Approx(-0.9));

    auto zero = make_spec(1, {"0"}, {{"0"}}, box_disturbance({0}, {1}), "x1^2-1",
                          Box{{-1.5}, {1.5}}, Box{{-0.1}, {0.1}}, 1.0);
    double d2[] = {0.7};
    CHECK(eval_field(zero, x, d2)[0] == doctest::Approx(0.0));

    auto rot = make_spec(2, {"x2", "-x1"}, {{"1"}, {"0"}}, box_disturbance({0}, {1}),
                         "x1^2+x2^2-1", Box{{-1.5, -1.5}, {1.5, 1.5}},
                         Box{{-0.1, -0.1}, {0.1, 0.1}}, 1.0);
    double y[] = {0.0, 1.0}, dr[] = {0.5};
    auto v = eval_field(rot, y, dr);
    CHECK(v[0] == doctest::Approx(1.5));
    CHECK(v[1] == doctest::Approx(0.0));
}

TEST_CASE("eval_field rejects d outside D and bad dimensions") {
    auto spec = spec_1d("-x1", 0.1, Box{{-0.2}, {0.2}}, 1.0);
    double x[] = {1.0}, dbad[] = {0.2};
    CHECK_THROWS_AS(eval_field(spec, x, dbad), std::domain_error);
    double d[] = {0.1};
    double x2[] = {1.0, 2.0};
    CHECK_THROWS_AS(eval_field(spec, x2, d), std::invalid_argument);
}

TEST_CASE("extend_field clamps outside the clamp box") {
    auto spec = make_spec(1, {"x1^3"}, {{"0"}}, no_disturbance(), "x1^2-1",
                          Box{{-1.5}, {1.5}}, Box{{-0.1}, {0.1}}, 1.0);
    spec.clamp_box = Box{{-2}, {2}};
    double d[] = {0.0};
    double x[] = {3.0};
    CHECK(extend_field(spec, x, d)[0] == doctest::Approx(8.0));
    double xin[] = {1.2};
    CHECK(extend_field(spec, xin, d)[0] == eval_field(spec, xin, d)[0]);

    auto lin = spec_1d("-x1", 0.0, Box{{-0.2}, {0.2}}, 1.0);
    lin.clamp_box = Box{{-2}, {2}};
    double xm[] = {-5.0};
    CHECK(extend_field(lin, xm, d)[0] == doctest::Approx(2.0));
}

TEST_CASE("extend_field equals eval_field on the safe closure (property)") {
    auto spec = make_spec(2, {"x2", "-x1+x2^2"}, {{"1", "0"}, {"0", "1"}},
                          box_disturbance({0, 0}, {0.3, 0.2}), "x1^2+x2^2-1",
                          Box{{-1.5, -1.5}, {1.5, 1.5}}, Box{{-0.1, -0.1}, {0.1, 0.1}}, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 300; ++s) {
        std::vector<double> x = {u(rng), u(rng)};
        if (spec.safe.h.eval(x) > 0.0) continue;
        std::vector<double> d = {0.3 * u(rng), 0.2 * u(rng)};
        auto a = eval_field(spec, x, d);
        auto b = extend_field(spec, x, d);
        CHECK(a[0] == doctest::Approx(b[0]));
        CHECK(a[1] == doctest::Approx(b[1]));
    }
}

TEST_CASE("extend_field is Lipschitz with the interval bound constant") {
    auto spec = make_spec(1, {"x1^2"}, {{"1"}}, box_disturbance({0}, {0.5}), "x1^2-1",
                          Box{{-1.5}, {1.5}}, Box{{-0.1}, {0.1}}, 1.0);
    // L for a scalar field: bound on |d f / d x| over the clamp box
    double L = lipschitz_bound(spec.f1[0], spec.clamp_box) +
               0.5 * lipschitz_bound(spec.f2[0][0], spec.clamp_box);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    std::uniform_real_distribution<double> ud(-0.5, 0.5);
    for (int s = 0; s < 500; ++s) {
        double x[] = {u(rng)}, y[] = {u(rng)}, d[] = {ud(rng)};
        double fx = extend_field(spec, x, d)[0];
        double fy = extend_field(spec, y, d)[0];
        CHECK(std::abs(fx - fy) <= L * std::abs(x[0] - y[0]) + 1e-9);
    }
}

TEST_CASE("hamiltonian_sup closed forms") {
    auto spec = spec_1d("-x1", 0.1, Box{{-0.2}, {0.2}}, 1.0);
    double x[] = {1.0}, p[] = {2.0};
    CHECK(hamiltonian_sup(spec, x, p) == doctest::Approx(-1.8));
    double p0[] = {0.0};
    CHECK(hamiltonian_sup(spec, x, p0) == doctest::Approx(0.0));

    // n=1, m=2, f1=0, f2=(1,1), D half-widths (1,2): sup = 3 at vertex (1,2)
    auto two = make_spec(1, {"0"}, {{"1", "1"}}, box_disturbance({0, 0}, {1, 2}), "x1^2-1",
                         Box{{-1.5}, {1.5}}, Box{{-0.1}, {0.1}}, 1.0);
    double p1[] = {1.0};
    double expected = -1e30;
    for (const auto& d : two.D.vertices()) expected = std::max(expected, d[0] + d[1]);
    CHECK(expected == doctest::Approx(3.0));
    CHECK(hamiltonian_sup(two, x, p1) == doctest::Approx(expected));
}

TEST_CASE("hamiltonian_sup dominates sampled directions, attained at a vertex") {
    auto spec = make_spec(2, {"x2", "-x1"}, {{"1", "0"}, {"0", "1"}},
                          box_disturbance({0.1, 0}, {0.4, 0.3}), "x1^2+x2^2-1",
                          Box{{-1.5, -1.5}, {1.5, 1.5}}, Box{{-0.1, -0.1}, {0.1, 0.1}}, 1.0);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 100; ++s) {
        std::vector<double> x = {u(rng), u(rng)};
        std::vector<double> p = {u(rng), u(rng)};
        double H = hamiltonian_sup(spec, x, p);
        double vertex_best = -1e30;
        for (const auto& d : spec.D.vertices()) {
            auto f = eval_field(spec, x, d);
            double dot = p[0] * f[0] + p[1] * f[1];
            CHECK(H >= dot - 1e-9);
            vertex_best = std::max(vertex_best, dot);
        }
        CHECK(H == doctest::Approx(vertex_best));
        // positive homogeneity in p modulo the linear structure
        std::vector<double> p2 = {3.0 * p[0], 3.0 * p[1]};
        CHECK(hamiltonian_sup(spec, x, p2) == doctest::Approx(3.0 * H));
    }
}

TEST_CASE("hamiltonian_sup for ball disturbance") {
    auto spec = make_spec(1, {"0"}, {{"1", "1"}}, ball_disturbance({0, 0}, 2.0), "x1^2-1",
                          Box{{-1.5}, {1.5}}, Box{{-0.1}, {0.1}}, 1.0);
    double x[] = {0.0}, p[] = {1.0};
    // q = (1,1), sup = 2 * ||q|| = 2 sqrt 2
    CHECK(hamiltonian_sup(spec, x, p) == doctest::Approx(2.0 * std::sqrt(2.0)));
    auto d = hamiltonian_argmax(spec, x, p);
    CHECK(std::hypot(d[0], d[1]) == doctest::Approx(2.0));
}

TEST_CASE("lipschitz_bound reference cases") {
    CHECK(lipschitz_bound(PolyExpr::parse("x1", 1), Box{{0}, {1}}) == doctest::Approx(1.0));
    CHECK(lipschitz_bound(PolyExpr::parse("x1^2", 1), Box{{-1}, {2}}) >= 4.0);
    CHECK(lipschitz_bound(PolyExpr::parse("x1^2-x1", 1), Box{{0}, {1}}) >= 1.0);
}

TEST_CASE("set validation") {
    auto spec = spec_1d("-x1", 0.1, Box{{-0.2}, {0.2}}, 1.0);
    CHECK_NOTHROW(spec.validate_sets());

    // unbounded S: h = x1 is negative on the whole lower face
    auto bad = make_spec(1, {"1"}, {{"0"}}, no_disturbance(), "x1", Box{{-2}, {2}},
                         Box{{-0.5}, {-0.4}}, 1.0);
    CHECK_THROWS_AS(bad.validate_sets(), std::invalid_argument);

    // X0 not inside S
    auto out = spec_1d("-x1", 0.1, Box{{0.9}, {1.1}}, 1.0);
    CHECK_THROWS_AS(out.validate_sets(), std::invalid_argument);
}
