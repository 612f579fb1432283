#include "safehj/problem.hpp"

#include <string>

#include "doctest.h"

using namespace safehj;

namespace {

const char* kMinimal = R"(# 1-D contractive benchmark
[system]
n = 1
m = 1
f1_1 = -x1
f2_1_1 = 1
[disturbance]
kind = box
center = 0
radius = 0.1
[safe]
h = x1^2 - 1
bounds = -1.5 1.5
[init]
kind = box
bounds = -0.2 0.2
[horizon]
T = 1
[solver]
seed = 42
)";

}  // namespace

TEST_CASE("parse a minimal document") {
    auto p = parse_problem(kMinimal);
    CHECK(p.spec.n == 1);
    CHECK(p.spec.m == 1);
    CHECK(p.spec.T == 1.0);
    double x[] = {0.5};
    CHECK(p.spec.safe.h.eval(x) == doctest::Approx(-0.75));
    CHECK(p.spec.D.radius[0] == doctest::Approx(0.1));
    // default clamp box: safe bounds inflated by 10% per axis
    CHECK(p.spec.clamp_box.lo[0] == doctest::Approx(-1.65));
    CHECK(p.spec.clamp_box.hi[0] == doctest::Approx(1.65));
    CHECK(p.solver.seed == 42);
    CHECK(p.solver.seed_set);
    CHECK(!p.certificate.has_value());

    auto g = make_grid(p.spec, p.solver);
    CHECK(g.counts == std::vector<int>{101});
}

TEST_CASE("certificate section") {
    std::string text = std::string(kMinimal) +
                       "[certificate]\nv = x1^2 - 1\nlambda = -1\nmode = eq8\n";
    auto p = parse_problem(text);
    REQUIRE(p.certificate.has_value());
    CHECK(p.certificate->mode == CertMode::Eq8);
    CHECK(p.certificate->lambda == -1.0);
}

TEST_CASE("rejections carry useful messages") {
    auto replaced = [&](const std::string& from, const std::string& to) {
        std::string t = kMinimal;
        t.replace(t.find(from), from.size(), to);
        return t;
    };

    // unbounded safe set
    CHECK_THROWS_AS(parse_problem(replaced("h = x1^2 - 1", "h = x1")), std::invalid_argument);
    // X0 escapes S
    CHECK_THROWS_AS(parse_problem(replaced("bounds = -0.2 0.2", "bounds = 0.9 1.1")),
                    std::invalid_argument);
    // unknown key
    CHECK_THROWS_AS(parse_problem(replaced("seed = 42", "seed = 42\nbogus = 1")),
                    std::invalid_argument);
    // unknown section
    CHECK_THROWS_AS(parse_problem(std::string(kMinimal) + "[extras]\nfoo = 1\n"),
                    std::invalid_argument);
    // missing seed
    CHECK_THROWS_AS(parse_problem(replaced("seed = 42", "tol = 1e-6")),
                    std::invalid_argument);
    // duplicate key
    CHECK_THROWS_AS(parse_problem(replaced("T = 1", "T = 1\nT = 2")), std::invalid_argument);
    // key before any section
    CHECK_THROWS_AS(parse_problem("n = 1\n" + std::string(kMinimal)), std::invalid_argument);
}

TEST_CASE("serialize round-trips semantically") {
    std::string text = std::string(kMinimal) +
                       "[certificate]\nv = x1^2 - 1\nlambda = -1\nmode = eq8\n";
    auto p = parse_problem(text);
    auto dumped = serialize_problem(p);
    auto back = parse_problem(dumped);
    CHECK(back.spec.n == p.spec.n);
    CHECK(back.spec.safe.h == p.spec.safe.h);
    CHECK(back.spec.f1[0] == p.spec.f1[0]);
    CHECK(back.spec.T == p.spec.T);
    CHECK(back.solver.seed == p.solver.seed);
    REQUIRE(back.certificate.has_value());
    CHECK(back.certificate->v == p.certificate->v);
    // fixed point after one dump
    CHECK(serialize_problem(back) == dumped);
}

TEST_CASE("input_hash is deterministic and content sensitive") {
    CHECK(input_hash(kMinimal) == input_hash(kMinimal));
    CHECK(input_hash(kMinimal) != input_hash(std::string(kMinimal) + " "));
    // FNV-1a reference value for the empty string
    CHECK(input_hash("") == 0xcbf29ce484222325ULL);
}
