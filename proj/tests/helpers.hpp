#pragma once

#include <string>
#include <vector>

#include "safehj/system.hpp"

namespace safehj::testing {

// Small builder for 1-D and 2-D test systems.
inline SystemSpec make_spec(int n, std::vector<std::string> f1,
                            std::vector<std::vector<std::string>> f2, DisturbanceSet D,
                            const std::string& h, Box safe_bounds, Box init_box, double T) {
    SystemSpec s;
    s.n = n;
    s.m = D.dim();
    for (auto& e : f1) s.f1.push_back(PolyExpr::parse(e, n));
    for (auto& row : f2) {
        std::vector<PolyExpr> r;
        for (auto& e : row) r.push_back(PolyExpr::parse(e, n));
        s.f2.push_back(std::move(r));
    }
    s.D = std::move(D);
    s.safe.h = PolyExpr::parse(h, n);
    s.safe.bounds = std::move(safe_bounds);
    s.init.kind = InitialSet::Kind::Box;
    s.init.box = std::move(init_box);
    s.T = T;
    s.clamp_box = default_clamp_box(s.safe);
    s.validate_shapes();
    return s;
}

inline DisturbanceSet box_disturbance(std::vector<double> center, std::vector<double> radius) {
    DisturbanceSet D;
    D.kind = DisturbanceSet::Kind::Box;
    D.center = std::move(center);
    D.radius = std::move(radius);
    return D;
}

inline DisturbanceSet ball_disturbance(std::vector<double> center, double radius) {
    DisturbanceSet D;
    D.kind = DisturbanceSet::Kind::Ball;
    D.center = std::move(center);
    D.radius = {radius};
    return D;
}

inline DisturbanceSet no_disturbance(int m = 1) {
    return box_disturbance(std::vector<double>(m, 0.0), std::vector<double>(m, 0.0));
}

// x' = f1(x) + d with |d| <= r, S = {x^2 - 1 < 0}.
inline SystemSpec spec_1d(const std::string& f1, double r, Box init_box, double T,
                          const std::string& h = "x1^2-1",
                          Box safe_bounds = Box{{-1.5}, {1.5}}) {
    return make_spec(1, {f1}, {{"1"}}, box_disturbance({0.0}, {r}), h, safe_bounds, init_box,
                     T);
}

}  // namespace safehj::testing
