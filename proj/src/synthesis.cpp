#include "safehj/synthesis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "safehj/sim.hpp"
#include "safehj/simplex.hpp"

namespace safehj {

namespace {

void enumerate_xexp(int nvars, int axis, int remaining, std::vector<int>& cur,
                    std::vector<std::vector<int>>& out) {
    if (axis == nvars) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur[axis] = e;
        enumerate_xexp(nvars, axis + 1, remaining - e, cur, out);
    }
    cur[axis] = 0;
}

}  // namespace

Template Template::make(int nvars, int deg_x, int deg_t) {
    if (nvars < 1 || deg_x < 0 || deg_t < 0) throw std::invalid_argument("bad template degrees");
    Template t;
    t.nvars = nvars;
    t.deg_x = deg_x;
    t.deg_t = deg_t;
    std::vector<std::vector<int>> xexps;
    std::vector<int> cur(nvars, 0);
    enumerate_xexp(nvars, 0, deg_x, cur, xexps);
    for (const auto& xe : xexps)
        for (int te = 0; te <= deg_t; ++te) t.basis.push_back({1.0, xe, te});
    return t;
}

PolyExpr Template::instantiate(const std::vector<double>& coeffs) const {
    if (coeffs.size() != basis.size())
        throw std::invalid_argument("coefficient count mismatch");
    PolyExpr p(nvars);
    for (size_t j = 0; j < basis.size(); ++j)
        if (coeffs[j] != 0.0) p.add_term(coeffs[j], basis[j].xexp, basis[j].texp);
    return p;
}

namespace {

double eval_monomial(const Monomial& m, std::span<const double> x, double t) {
    double v = m.coeff;
    for (size_t i = 0; i < m.xexp.size(); ++i)
        for (int k = 0; k < m.xexp[i]; ++k) v *= x[i];
    for (int k = 0; k < m.texp; ++k) v *= t;
    return v;
}

// Bisection for h = 0 along the segment [inside, outside].
std::optional<std::vector<double>> boundary_on_segment(const SystemSpec& spec,
                                                       std::vector<double> a,
                                                       std::vector<double> b) {
    double ha = spec.safe.h.eval(a);
    double hb = spec.safe.h.eval(b);
    if (ha >= 0.0 || hb <= 0.0) return std::nullopt;
    for (int it = 0; it < 80; ++it) {
        std::vector<double> mid(a.size());
        for (size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
        if (spec.safe.h.eval(mid) < 0.0)
            a = std::move(mid);
        else
            b = std::move(mid);
    }
    return b;  // h >= 0 side, within 2^-80 of the boundary
}

std::vector<std::vector<double>> lie_disturbance_values(const SystemSpec& spec) {
    if (spec.m == 0) return {{}};
    if (spec.D.kind == DisturbanceSet::Kind::Box) return spec.D.vertices();
    // ball: center plus axis-aligned boundary points
    std::vector<std::vector<double>> out = {spec.D.center};
    for (int j = 0; j < spec.m; ++j)
        for (double s : {-1.0, 1.0}) {
            auto d = spec.D.center;
            d[j] += s * spec.D.radius[0];
            out.push_back(d);
        }
    return out;
}

}  // namespace

SamplePoints initial_samples(const SystemSpec& spec, CertMode mode, int per_condition,
                             uint64_t seed) {
    SamplePoints pts;
    const int n = spec.n;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Per-axis stratified counts so the product is roughly per_condition.
    auto strata = [&](const Box& box, int target) {
        int per_axis = std::max(2, int(std::ceil(std::pow(double(target), 1.0 / n))));
        std::vector<std::vector<double>> out;
        std::vector<int> idx(n, 0);
        for (;;) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) {
                double f = per_axis == 1 ? 0.5 : double(idx[i]) / (per_axis - 1);
                x[i] = box.lo[i] + f * box.width(i);
            }
            out.push_back(std::move(x));
            int i = 0;
            while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
            if (i == n) break;
        }
        return out;
    };

    for (auto& x : strata(spec.init.box, per_condition))
        if (spec.init.contains(x, 1e-12)) pts.init_pts.push_back(std::move(x));

    const int nt = 8;
    auto t_of = [&](int k) { return spec.T * double(k) / (nt - 1); };

    if (mode == CertMode::Eq7) {
        for (auto& x : strata(spec.safe.bounds, per_condition))
            if (spec.safe.h.eval(x) <= 0.0)
                for (int k = 0; k < nt; ++k) pts.boundary_pts.push_back({x, t_of(k)});
    } else {
        // boundary points: bisect h = 0 along rays from the X0 box center
        auto inside = spec.init.box.center();
        int rays = std::max(per_condition / nt, 8);
        for (int r = 0; r < rays; ++r) {
            std::vector<double> dir(n);
            double norm = 0.0;
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (int i = 0; i < n; ++i) {
                dir[i] = n == 1 ? (r % 2 ? 1.0 : -1.0) : gauss(rng);
                norm += dir[i] * dir[i];
            }
            norm = std::sqrt(norm);
            std::vector<double> far(n);
            // stretch the ray to the bounds box surface
            double scale = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                if (dir[i] == 0.0) continue;
                double lim = dir[i] > 0 ? spec.safe.bounds.hi[i] - inside[i]
                                        : spec.safe.bounds.lo[i] - inside[i];
                scale = std::min(scale, lim / dir[i]);
            }
            for (int i = 0; i < n; ++i) far[i] = inside[i] + scale * dir[i];
            if (auto bp = boundary_on_segment(spec, inside, far))
                for (int k = 0; k < nt; ++k) pts.boundary_pts.push_back({*bp, t_of(k)});
        }
    }

    const auto dvals = lie_disturbance_values(spec);
    for (auto& x : strata(spec.safe.bounds, per_condition))
        if (spec.safe.h.eval(x) <= 0.0)
            for (int k = 0; k < nt; k += 2)
                for (const auto& d : dvals) pts.lie_pts.push_back({x, t_of(k), d});
    return pts;
}

LinearFeasibilityProblem build_constraints(const SystemSpec& spec, const Template& tmpl,
                                           CertMode mode, double lambda,
                                           const SamplePoints& points, double margin) {
    if (points.init_pts.empty() && points.boundary_pts.empty() && points.lie_pts.empty())
        throw std::invalid_argument("build_constraints: empty sample set");
    if (mode != CertMode::Eq8) lambda = 0.0;
    const size_t nc = tmpl.size();
    LinearFeasibilityProblem lfp;

    // Precompute monomial derivative polynomials once.
    std::vector<PolyExpr> mono_t, mono_poly;
    std::vector<std::vector<PolyExpr>> mono_x(nc);
    for (size_t j = 0; j < nc; ++j) {
        PolyExpr p(tmpl.nvars);
        p.add_term(1.0, tmpl.basis[j].xexp, tmpl.basis[j].texp);
        mono_poly.push_back(p);
        mono_t.push_back(p.deriv_t());
        for (int i = 0; i < spec.n; ++i) mono_x[j].push_back(p.deriv_x(i));
    }

    for (const auto& x : points.init_pts) {
        std::vector<double> row(nc);
        for (size_t j = 0; j < nc; ++j) row[j] = eval_monomial(tmpl.basis[j], x, 0.0);
        lfp.rows.push_back(std::move(row));
        lfp.rhs.push_back(-margin);
    }
    for (const auto& [x, t] : points.boundary_pts) {
        std::vector<double> row(nc);
        for (size_t j = 0; j < nc; ++j) row[j] = -eval_monomial(tmpl.basis[j], x, t);
        if (mode == CertMode::Eq7) {
            lfp.rows.push_back(std::move(row));
            lfp.rhs.push_back(-margin - spec.safe.h.eval(x));
        } else {
            lfp.rows.push_back(std::move(row));
            lfp.rhs.push_back(0.0);
        }
    }
    for (const auto& [x, t, d] : points.lie_pts) {
        std::vector<double> fi(spec.n);
        for (int i = 0; i < spec.n; ++i) {
            fi[i] = spec.f1[i].eval(x);
            for (int j = 0; j < spec.m; ++j) fi[i] += spec.f2[i][j].eval(x) * d[j];
        }
        std::vector<double> row(nc);
        for (size_t j = 0; j < nc; ++j) {
            double lie = mono_t[j].eval(x, t);
            for (int i = 0; i < spec.n; ++i) lie += mono_x[j][i].eval(x, t) * fi[i];
            row[j] = lie - lambda * eval_monomial(tmpl.basis[j], x, t);
        }
        lfp.rows.push_back(std::move(row));
        lfp.rhs.push_back(-margin);
    }
    return lfp;
}

std::optional<std::vector<double>> solve_feasibility(const LinearFeasibilityProblem& lfp) {
    if (lfp.rows.empty()) throw std::invalid_argument("solve_feasibility: no rows");
    const size_t nc = lfp.rows[0].size();
    const double B = lfp.coeff_bound;
    const double s_cap = 10.0 * B;
    // variables z = (y_0..y_{nc-1}, s), y = c + B in [0, 2B], maximize s
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (size_t r = 0; r < lfp.rows.size(); ++r) {
        std::vector<double> row = lfp.rows[r];
        double shift = 0.0;
        for (double a : row) shift += a * B;
        row.push_back(1.0);  // slack column
        A.push_back(std::move(row));
        b.push_back(lfp.rhs[r] + shift);
    }
    for (size_t j = 0; j < nc; ++j) {
        std::vector<double> row(nc + 1, 0.0);
        row[j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(2.0 * B);
    }
    {
        std::vector<double> row(nc + 1, 0.0);
        row[nc] = 1.0;
        A.push_back(std::move(row));
        b.push_back(s_cap);
    }
    std::vector<double> obj(nc + 1, 0.0);
    obj[nc] = 1.0;
    auto res = simplex_maximize(A, b, obj);
    if (!res || res->objective < -1e-9) return std::nullopt;
    std::vector<double> c(nc);
    for (size_t j = 0; j < nc; ++j) c[j] = res->z[j] - B;
    // sanity: the returned point must satisfy every row
    for (size_t r = 0; r < lfp.rows.size(); ++r) {
        double dot = 0.0;
        for (size_t j = 0; j < nc; ++j) dot += lfp.rows[r][j] * c[j];
        if (dot > lfp.rhs[r] + 1e-6) return std::nullopt;
    }
    return c;
}

std::optional<Certificate> cegis_synthesize(const SystemSpec& spec, const Template& tmpl,
                                            CertMode mode, double lambda, double margin,
                                            int max_iters, uint64_t seed, double tol,
                                            long max_boxes, SynthesisInfo* info) {
    if (mode == CertMode::Eq3Static && tmpl.deg_t > 0)
        throw std::invalid_argument("static mode needs a t-free template");
    SamplePoints samples = initial_samples(spec, mode, 200, seed);
    std::mt19937_64 rng(substream_seed(seed, 0x9c715));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SynthesisInfo local;
    local.route = "cegis";

    for (int iter = 0; iter < max_iters; ++iter) {
        local.iterations = iter + 1;
        local.samples = samples.init_pts.size() + samples.boundary_pts.size() +
                        samples.lie_pts.size();
        auto lfp = build_constraints(spec, tmpl, mode, lambda, samples, margin);
        auto coeffs = solve_feasibility(lfp);
        if (!coeffs) {
            local.failure = "feasibility problem infeasible at iteration " +
                            std::to_string(iter + 1);
            if (info) *info = local;
            return std::nullopt;
        }
        Certificate cand;
        cand.v = tmpl.instantiate(*coeffs);
        cand.mode = mode;
        cand.lambda = mode == CertMode::Eq8 ? lambda : 0.0;
        auto rep = check_certificate(spec, cand, tol, max_boxes);
        if (rep.status == CheckStatus::Valid) {
            if (info) *info = local;
            return cand;
        }
        if (rep.status == CheckStatus::Invalid && rep.counterexample) {
            const auto& ce = *rep.counterexample;
            // jittered companions around the counterexample
            auto add_near = [&](auto&& push) {
                push(0.0);
                for (int k = 0; k < 4; ++k) push(1.0);
            };
            switch (ce.condition) {
                case CertCondition::InitialNegative:
                    add_near([&](double jit) {
                        auto x = ce.x;
                        for (int i = 0; i < spec.n; ++i)
                            x[i] = clamp_to(x[i] + jit * 0.01 * u(rng) * spec.init.box.width(i),
                                            spec.init.box.lo[i], spec.init.box.hi[i]);
                        samples.init_pts.push_back(std::move(x));
                    });
                    break;
                case CertCondition::BoundaryNonneg:
                case CertCondition::ValueDominates:
                    add_near([&](double jit) {
                        auto x = ce.x;
                        double t = clamp_to(ce.t + jit * 0.02 * u(rng) * spec.T, 0.0, spec.T);
                        for (int i = 0; i < spec.n; ++i)
                            x[i] = clamp_to(x[i] + jit * 0.005 * u(rng) * spec.safe.bounds.width(i),
                                            spec.safe.bounds.lo[i], spec.safe.bounds.hi[i]);
                        samples.boundary_pts.push_back({std::move(x), t});
                    });
                    break;
                case CertCondition::LieNonpositive:
                    add_near([&](double jit) {
                        auto x = ce.x;
                        double t = clamp_to(ce.t + jit * 0.02 * u(rng) * spec.T, 0.0, spec.T);
                        for (int i = 0; i < spec.n; ++i)
                            x[i] = clamp_to(x[i] + jit * 0.01 * u(rng) * spec.safe.bounds.width(i),
                                            spec.safe.bounds.lo[i], spec.safe.bounds.hi[i]);
                        samples.lie_pts.push_back({std::move(x), t, ce.d});
                    });
                    break;
            }
        } else {
            // inconclusive: densify with a fresh deterministic batch
            auto extra = initial_samples(spec, mode, 100, substream_seed(seed, 1000 + iter));
            samples.init_pts.insert(samples.init_pts.end(), extra.init_pts.begin(),
                                    extra.init_pts.end());
            samples.boundary_pts.insert(samples.boundary_pts.end(), extra.boundary_pts.begin(),
                                        extra.boundary_pts.end());
            samples.lie_pts.insert(samples.lie_pts.end(), extra.lie_pts.begin(),
                                   extra.lie_pts.end());
        }
    }
    local.failure = "no valid certificate within max_iters";
    if (info) *info = local;
    return std::nullopt;
}

std::optional<Certificate> fit_from_value_function(const SystemSpec& spec, const ValueGrid& vg,
                                                   int deg_x, int deg_t, double tol,
                                                   long max_boxes, SynthesisInfo* info) {
    const Grid& g = vg.grid();
    Template tmpl = Template::make(spec.n, deg_x, deg_t);
    SynthesisInfo local;
    local.route = "fit";

    // Fit rows: grid nodes inside S-bar, strided time layers.
    std::vector<std::pair<size_t, int>> rows;  // (node, layer)
    const size_t N = vg.node_count();
    std::vector<char> in_sbar(N, 0);
    for (size_t s = 0; s < N; ++s)
        in_sbar[s] = spec.safe.h.eval(g.node(s)) <= 0.0 ? 1 : 0;
    size_t n_sbar = std::count(in_sbar.begin(), in_sbar.end(), char(1));
    if (n_sbar == 0) throw std::invalid_argument("fit: no grid nodes inside the safe set");
    int layer_stride = std::max<size_t>(1, (size_t(vg.steps()) + 1) * n_sbar / 50000);
    for (int k = 0; k <= vg.steps(); k += layer_stride)
        for (size_t s = 0; s < N; ++s)
            if (in_sbar[s]) rows.push_back({s, k});

    Eigen::MatrixXd A(rows.size(), tmpl.size());
    Eigen::VectorXd y(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
        auto x = g.node(rows[r].first);
        double t = vg.time_of(rows[r].second);
        for (size_t j = 0; j < tmpl.size(); ++j)
            A(long(r), long(j)) = eval_monomial(tmpl.basis[j], x, t);
        y(long(r)) = vg.at(rows[r].second, rows[r].first);
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    std::vector<double> cvec(coef.data(), coef.data() + coef.size());
    PolyExpr w = tmpl.instantiate(cvec);

    // eps-hat: max fit residual and positive part of the worst Lie value.
    double residual = 0.0;
    for (size_t r = 0; r < rows.size(); ++r) {
        auto x = g.node(rows[r].first);
        double t = vg.time_of(rows[r].second);
        residual = std::max(residual, std::abs(w.eval(x, t) - y(long(r))));
    }
    double lie_max = -std::numeric_limits<double>::infinity();
    const auto dvals = lie_disturbance_values(spec);
    std::vector<PolyExpr> lies;
    for (const auto& d : dvals) lies.push_back(lie_derivative(spec, w, d));
    const int nt_dense = 33;
    for (size_t s = 0; s < N; ++s) {
        if (!in_sbar[s]) continue;
        auto x = g.node(s);
        for (int k = 0; k < nt_dense; ++k) {
            double t = spec.T * double(k) / (nt_dense - 1);
            for (const auto& lp : lies) lie_max = std::max(lie_max, lp.eval(x, t));
        }
    }
    const double eps_hat = std::max({residual, lie_max, 0.0});
    local.eps_hat = eps_hat;

    // delta-hat = -max V(x,0) over X0 evaluation points.
    double M = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < N; ++s) {
        auto x = g.node(s);
        if (spec.init.contains(x, 1e-12)) M = std::max(M, vg.at(0, s));
    }
    M = std::max(M, vg.value(clamp_to_box(spec.init.box.center(), g.bounds), 0.0));
    local.delta_hat = -M;

    // shifted candidate w' = w - 2 eps t + 2 (T+1) eps
    PolyExpr wprime = w;
    PolyExpr shift(spec.n);
    shift.add_term(-2.0 * eps_hat, std::vector<int>(spec.n, 0), 1);
    shift.add_term(2.0 * (spec.T + 1.0) * eps_hat, std::vector<int>(spec.n, 0), 0);
    wprime = wprime + shift;

    Certificate cert;
    cert.v = wprime;
    cert.mode = CertMode::Eq7;
    auto rep = check_certificate(spec, cert, tol, max_boxes);
    if (rep.status == CheckStatus::Valid) {
        if (info) *info = local;
        return cert;
    }
    const double eps_limit = local.delta_hat / (2.0 * (2.0 * spec.T + 3.0));
    local.failure = "shifted fit rejected (" + to_string(rep.status) + "); eps_hat = " +
                    std::to_string(eps_hat) + ", needs < " + std::to_string(eps_limit);
    if (info) *info = local;
    return std::nullopt;
}

}  // namespace safehj
