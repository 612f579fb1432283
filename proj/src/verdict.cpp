#include "safehj/verdict.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace safehj {

std::string to_string(SafetyStatus s) {
    switch (s) {
        case SafetyStatus::Safe: return "SAFE";
        case SafetyStatus::Unsafe: return "UNSAFE";
        default: return "UNKNOWN";
    }
}

namespace {

// Empirical Lipschitz constant of V(.,0) from adjacent node pairs inside
// the safe-set bounding box.
double empirical_lipschitz(const SystemSpec& spec, const ValueGrid& vg) {
    const Grid& g = vg.grid();
    const int n = g.dim();
    std::vector<size_t> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * size_t(g.counts[i + 1]);
    double L = 0.0;
    const size_t N = vg.node_count();
    for (size_t s = 0; s < N; ++s) {
        auto x = g.node(s);
        if (!spec.safe.bounds.contains(x, 1e-12)) continue;
        size_t rem = s;
        for (int i = 0; i < n; ++i) {
            size_t ci = rem / stride[i];
            rem %= stride[i];
            if (ci + 1 >= size_t(g.counts[i])) continue;
            auto xn = x;
            xn[i] += g.spacing(i);
            if (!spec.safe.bounds.contains(xn, 1e-12)) continue;
            L = std::max(L, std::abs(vg.at(0, s + stride[i]) - vg.at(0, s)) / g.spacing(i));
        }
    }
    return L;
}

}  // namespace

Verdict safety_verdict(const SystemSpec& spec, const ValueGrid& vg, double dt_sim) {
    const auto t_start = std::chrono::steady_clock::now();
    const Grid& g = vg.grid();
    const int n = g.dim();
    for (int i = 0; i < n; ++i)
        if (g.bounds.lo[i] > spec.init.box.lo[i] || g.bounds.hi[i] < spec.init.box.hi[i])
            throw std::invalid_argument("verdict: X0 not covered by the value grid");

    // Max of V(.,0) over X0: grid nodes inside X0, X0 corners, X0 center.
    double M = -std::numeric_limits<double>::infinity();
    std::vector<double> argmax = spec.init.box.center();
    const size_t N = vg.node_count();
    for (size_t s = 0; s < N; ++s) {
        auto x = g.node(s);
        if (!spec.init.contains(x, 1e-12)) continue;
        if (vg.at(0, s) > M) {
            M = vg.at(0, s);
            argmax = x;
        }
    }
    const int corners = 1 << n;
    for (int c = 0; c <= corners; ++c) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) {
            if (c == corners)
                x[i] = 0.5 * (spec.init.box.lo[i] + spec.init.box.hi[i]);
            else
                x[i] = (c >> i & 1) ? spec.init.box.hi[i] : spec.init.box.lo[i];
        }
        if (!spec.init.contains(x, 1e-12)) continue;
        double v = vg.value(x, 0.0);
        if (v > M) {
            M = v;
            argmax = x;
        }
    }
    if (!std::isfinite(M))
        throw std::invalid_argument("verdict: no evaluation points found inside X0");

    Verdict out;
    out.margin = M;
    out.diagnostics.grid_counts = g.counts;
    double dx_max = 0.0;
    for (int i = 0; i < n; ++i) dx_max = std::max(dx_max, g.spacing(i));
    out.diagnostics.max_spacing = dx_max;
    const double L = empirical_lipschitz(spec, vg);
    out.diagnostics.lipschitz_est = L;
    const auto alpha = field_bounds(spec, g.bounds);
    double diss = 0.0;
    for (int i = 0; i < n; ++i) diss += alpha[i] * g.spacing(i);
    out.diagnostics.dissipation_est = diss;
    const double delta_num = L * dx_max + diss;
    out.diagnostics.delta_num = delta_num;

    if (M <= -delta_num && delta_num > 0.0) {
        out.status = SafetyStatus::Safe;
    } else if (M <= 0.0 && delta_num == 0.0 && M < 0.0) {
        out.status = SafetyStatus::Safe;  // stationary / exact case
    } else {
        Trajectory traj = worst_case_replay(spec, argmax, vg, dt_sim);
        if (traj.exit_time && *traj.exit_time <= spec.T) {
            out.status = SafetyStatus::Unsafe;
            out.witness = std::move(traj);
        } else {
            out.status = SafetyStatus::Unknown;
        }
    }
    out.diagnostics.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

DppReport check_dpp(const SystemSpec& spec, const ValueGrid& vg, int samples, uint64_t seed,
                    double tol) {
    DppReport rep;
    rep.tol = tol;
    const Grid& g = vg.grid();
    const double T = g.T;

    // Grid truncation pollutes a band near the frontier: a point (x, t) is only
    // DPP-consistent if its numerical domain of dependence x +- alpha (T - t)
    // stays on the grid. Points outside that cone are skipped.
    const auto alpha = field_bounds(spec, g.bounds);
    auto trusted = [&](const std::vector<double>& x, double t) {
        for (int i = 0; i < spec.n; ++i) {
            double reach = alpha[i] * (T - t);
            if (x[i] - reach < g.bounds.lo[i] - 1e-12) return false;
            if (x[i] + reach > g.bounds.hi[i] + 1e-12) return false;
        }
        return true;
    };

    // Exhaustive one-step check at every node and layer with the center
    // disturbance: V(x, t_k) >= max(h along the step, V(x', t_{k+1})) - tol.
    {
        const double dt = vg.dt();
        const auto d0 = spec.D.center;
        std::vector<double> k1(spec.n), k2(spec.n), k3(spec.n), k4(spec.n), tmp(spec.n);
        const size_t N = vg.node_count();
        for (int k = 0; k + 1 <= vg.steps(); ++k) {
            for (size_t s = 0; s < N; ++s) {
                auto x = g.node(s);
                if (!spec.safe.bounds.contains(x, 1e-12)) continue;
                if (!trusted(x, vg.time_of(k))) continue;
                double h0 = spec.safe.h.eval(x);
                auto xs = x;
                // one RK4 step of the extended field
                auto f = [&](const std::vector<double>& y) { return extend_field(spec, y, d0); };
                k1 = f(xs);
                for (int i = 0; i < spec.n; ++i) tmp[i] = xs[i] + 0.5 * dt * k1[i];
                k2 = f(tmp);
                for (int i = 0; i < spec.n; ++i) tmp[i] = xs[i] + 0.5 * dt * k2[i];
                k3 = f(tmp);
                for (int i = 0; i < spec.n; ++i) tmp[i] = xs[i] + dt * k3[i];
                k4 = f(tmp);
                for (int i = 0; i < spec.n; ++i)
                    xs[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
                double payoff = std::max({h0, spec.safe.h.eval(xs),
                                          vg.value(clamp_to_box(xs, g.bounds), vg.time_of(k + 1))});
                double lhs = vg.at(k, s);
                ++rep.samples_checked;
                double gap = payoff - lhs;
                if (gap > tol) {
                    ++rep.violations;
                    rep.max_violation = std::max(rep.max_violation, gap);
                }
            }
        }
    }
    for (int s = 0; s < samples; ++s) {
        const uint64_t sub = substream_seed(seed, uint64_t(s));
        std::mt19937_64 rng(sub);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        // sample x in the safe-set bounding box, t < s_t <= T
        std::vector<double> x(spec.n);
        for (int i = 0; i < spec.n; ++i)
            x[i] = spec.safe.bounds.lo[i] + u(rng) * spec.safe.bounds.width(i);
        double t = u(rng) * T;
        double s_t = t + u(rng) * (T - t);
        if (s_t <= t) s_t = std::min(T, t + 1e-6);
        if (!trusted(x, t)) continue;

        // run the sampled signal on the shifted clock
        SystemSpec shifted = spec;
        shifted.T = s_t - t;
        if (shifted.T <= 0.0) continue;
        auto sig = sample_signal(shifted, substream_seed(sub, 1), 8);
        double dt = std::max(shifted.T / 400.0, 1e-6);
        Trajectory traj = integrate(shifted, x, sig, dt);

        double run_max = -std::numeric_limits<double>::infinity();
        for (const auto& st : traj.states)
            run_max = std::max(run_max, spec.safe.h.eval(st));
        auto xe = clamp_to_box(traj.final_state(), g.bounds);
        double payoff = std::max(run_max, vg.value(xe, s_t));
        double lhs = vg.value(clamp_to_box(x, g.bounds), t);
        ++rep.samples_checked;
        const double gap = payoff - lhs;  // > tol means violation
        if (gap > tol) {
            ++rep.violations;
            rep.max_violation = std::max(rep.max_violation, gap);
        }
    }
    return rep;
}

}  // namespace safehj
