#include "safehj/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace safehj {

std::string to_string(CertMode m) {
    switch (m) {
        case CertMode::Eq3Static: return "eq3";
        case CertMode::Eq5: return "eq5";
        case CertMode::Eq7: return "eq7";
        default: return "eq8";
    }
}

CertMode cert_mode_from_string(const std::string& s) {
    if (s == "eq3") return CertMode::Eq3Static;
    if (s == "eq5") return CertMode::Eq5;
    if (s == "eq7") return CertMode::Eq7;
    if (s == "eq8") return CertMode::Eq8;
    throw std::invalid_argument("unknown certificate mode: " + s);
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Valid: return "VALID";
        case CheckStatus::Invalid: return "INVALID";
        default: return "INCONCLUSIVE";
    }
}

std::string to_string(CertCondition c) {
    switch (c) {
        case CertCondition::InitialNegative: return "v(x,0) < 0 on X0";
        case CertCondition::BoundaryNonneg: return "v >= 0 on the safe-set boundary";
        case CertCondition::ValueDominates: return "h - v <= 0 on S x [0,T]";
        default: return "Lie derivative condition";
    }
}

void Certificate::validate() const {
    if (mode == CertMode::Eq3Static && v.depends_on_t())
        throw std::invalid_argument("static (eq3) certificate must not depend on t");
    if (lambda != 0.0 && mode != CertMode::Eq8)
        throw std::invalid_argument("lambda != 0 requires eq8 mode");
}

std::string Certificate::serialize() const {
    std::ostringstream os;
    os << "certificate\n";
    os << "mode " << to_string(mode) << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", lambda);
    os << "lambda " << buf << "\n";
    os << "nvars " << v.nvars() << "\n";
    os << "terms " << v.terms().size() << "\n";
    for (const auto& m : v.terms()) {
        std::snprintf(buf, sizeof buf, "%.17g", m.coeff);
        os << "term " << buf;
        for (int e : m.xexp) os << " " << e;
        os << " " << m.texp << "\n";
    }
    os << "end\n";
    return os.str();
}

Certificate Certificate::deserialize(const std::string& text, int nvars) {
    std::istringstream is(text);
    std::string tok;
    auto expect = [&](const std::string& want) {
        if (!(is >> tok) || tok != want)
            throw std::invalid_argument("certificate parse: expected '" + want + "', got '" +
                                        tok + "'");
    };
    expect("certificate");
    expect("mode");
    is >> tok;
    Certificate cert;
    cert.mode = cert_mode_from_string(tok);
    expect("lambda");
    is >> cert.lambda;
    expect("nvars");
    int nv = 0;
    is >> nv;
    if (nv != nvars)
        throw std::invalid_argument("certificate nvars mismatch: file has " + std::to_string(nv));
    expect("terms");
    size_t nterms = 0;
    is >> nterms;
    cert.v = PolyExpr(nvars);
    for (size_t i = 0; i < nterms; ++i) {
        expect("term");
        double c = 0.0;
        is >> c;
        std::vector<int> xe(nvars);
        for (int& e : xe) is >> e;
        int te = 0;
        is >> te;
        if (!is) throw std::invalid_argument("certificate parse: truncated term");
        cert.v.add_term(c, std::move(xe), te);
    }
    expect("end");
    cert.validate();
    return cert;
}

PolyExpr lie_derivative(const SystemSpec& spec, const PolyExpr& v, std::span<const double> d) {
    if (v.nvars() != spec.n) throw std::invalid_argument("lie_derivative: nvars mismatch");
    PolyExpr out = v.deriv_t();
    for (int i = 0; i < spec.n; ++i) {
        PolyExpr fi = spec.f1[i];
        for (int j = 0; j < spec.m; ++j) fi = fi + spec.f2[i][j].scaled(d[j]);
        out = out + v.deriv_x(i) * fi;
    }
    return out;
}

std::vector<PolyExpr> lie_derivative_vertices(const SystemSpec& spec, const PolyExpr& v) {
    if (spec.D.kind != DisturbanceSet::Kind::Box)
        throw std::logic_error("vertex Lie derivatives need a box disturbance set");
    if (spec.m > 8) throw std::invalid_argument("disturbance dimension > 8: vertex blow-up");
    std::vector<PolyExpr> out;
    for (const auto& d : spec.D.vertices()) out.push_back(lie_derivative(spec, v, d));
    return out;
}

Interval interval_bound(const PolyExpr& poly, const Box& xbox, const Interval& tint) {
    return poly.bound(xbox, tint);
}

namespace {

struct WorkBox {
    Box x;
    Interval t;
};

// Per-condition branch-and-bound driver. `passes` returns true when the box
// is certified, `refute` tries to confirm a point counterexample inside it.
struct BnB {
    explicit BnB(long& b) : budget(b) {}

    long& budget;
    std::function<bool(const WorkBox&)> passes;
    std::function<std::optional<Counterexample>(const WorkBox&)> refute;
    Box domain_x;
    Interval domain_t;
    bool split_t = true;

    ConditionResult result;
    std::optional<Counterexample> ce;

    void run(CertCondition cond) {
        result.condition = cond;
        std::deque<WorkBox> work;
        work.push_back({domain_x, domain_t});
        bool stuck = false;
        while (!work.empty()) {
            if (budget-- <= 0) {
                result.status = CheckStatus::Inconclusive;
                return;
            }
            WorkBox wb = std::move(work.front());
            work.pop_front();
            ++result.boxes_processed;
            if (passes(wb)) continue;
            if (auto c = refute(wb)) {
                ce = std::move(c);
                ce->condition = cond;
                result.status = CheckStatus::Invalid;
                return;
            }
            // pick widest axis relative to the original domain
            int best = -1;
            double best_w = 0.0;
            for (int i = 0; i < wb.x.dim(); ++i) {
                double dw = domain_x.width(i);
                double w = dw > 0 ? wb.x.width(i) / dw : 0.0;
                if (w > best_w) {
                    best_w = w;
                    best = i;
                }
            }
            double tw = domain_t.width() > 0 && split_t ? wb.t.width() / domain_t.width() : 0.0;
            if (tw > best_w) best = wb.x.dim();  // split the time axis
            if (best < 0 || std::max(best_w, tw) < 1e-9) {
                stuck = true;  // cannot certify nor refute at floating-point width
                continue;
            }
            WorkBox a = wb, b = wb;
            if (best == wb.x.dim()) {
                double mid = 0.5 * (wb.t.lo + wb.t.hi);
                a.t.hi = mid;
                b.t.lo = mid;
            } else {
                double mid = 0.5 * (wb.x.lo[best] + wb.x.hi[best]);
                a.x.hi[best] = mid;
                b.x.lo[best] = mid;
            }
            work.push_back(std::move(a));
            work.push_back(std::move(b));
        }
        result.status = stuck ? CheckStatus::Inconclusive : CheckStatus::Valid;
    }
};

// Newton projection of x onto {h = 0}; nullopt when it fails to converge.
std::optional<std::vector<double>> project_to_boundary(const SystemSpec& spec,
                                                       std::vector<double> x) {
    std::vector<PolyExpr> grad;
    for (int i = 0; i < spec.n; ++i) grad.push_back(spec.safe.h.deriv_x(i));
    for (int it = 0; it < 50; ++it) {
        double hv = spec.safe.h.eval(x);
        if (std::abs(hv) < 1e-11) return x;
        double norm2 = 0.0;
        std::vector<double> g(spec.n);
        for (int i = 0; i < spec.n; ++i) {
            g[i] = grad[i].eval(x);
            norm2 += g[i] * g[i];
        }
        if (norm2 < 1e-14) return std::nullopt;
        for (int i = 0; i < spec.n; ++i) x[i] -= hv * g[i] / norm2;
    }
    return std::nullopt;
}

}  // namespace

double evaluate_violation(const SystemSpec& spec, const Certificate& cert,
                          const Counterexample& ce) {
    switch (ce.condition) {
        case CertCondition::InitialNegative:
            return cert.v.eval(ce.x, 0.0);
        case CertCondition::BoundaryNonneg:
            return -cert.v.eval(ce.x, ce.t);
        case CertCondition::ValueDominates:
            return spec.safe.h.eval(ce.x) - cert.v.eval(ce.x, ce.t);
        case CertCondition::LieNonpositive: {
            double lie = lie_derivative(spec, cert.v, ce.d).eval(ce.x, ce.t);
            return lie - cert.lambda * cert.v.eval(ce.x, ce.t);
        }
    }
    return 0.0;
}

CheckReport check_certificate(const SystemSpec& spec, const Certificate& cert, double tol,
                              long max_boxes) {
    cert.validate();
    if (cert.v.nvars() != spec.n)
        throw std::invalid_argument("certificate variable count mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");

    CheckReport report;
    long budget = max_boxes;
    const double lambda = cert.mode == CertMode::Eq8 ? cert.lambda : 0.0;
    const Interval horizon{0.0, spec.T};

    // Precompute the Lie data once.
    std::vector<PolyExpr> lie_vertex_polys;
    std::vector<std::vector<double>> dvertices;
    PolyExpr lie_a(spec.n);          // ball: drift part at the center
    std::vector<PolyExpr> lie_b;     // ball: per-axis disturbance coefficients
    PolyExpr lie_b_sq(spec.n);
    const bool boxD = spec.D.kind == DisturbanceSet::Kind::Box;
    if (boxD) {
        lie_vertex_polys = lie_derivative_vertices(spec, cert.v);
        dvertices = spec.D.vertices();
        if (lambda != 0.0)
            for (auto& p : lie_vertex_polys) p = p - cert.v.scaled(lambda);
    } else {
        lie_a = lie_derivative(spec, cert.v, spec.D.center) - cert.v.scaled(lambda);
        for (int j = 0; j < spec.m; ++j) {
            PolyExpr bj(spec.n);
            for (int i = 0; i < spec.n; ++i) bj = bj + cert.v.deriv_x(i) * spec.f2[i][j];
            lie_b.push_back(bj);
            lie_b_sq = lie_b_sq + bj * bj;
        }
    }

    auto record = [&](BnB& engine) {
        report.conditions.push_back(engine.result);
        report.boxes_processed += engine.result.boxes_processed;
        if (engine.result.status == CheckStatus::Invalid) {
            report.status = CheckStatus::Invalid;
            report.counterexample = engine.ce;
            return false;
        }
        return true;
    };

    // C1: v(x,0) < 0 on X0, certified as hi <= -tol.
    {
        BnB c1{budget};
        c1.domain_x = spec.init.box;
        c1.domain_t = {0.0, 0.0};
        c1.split_t = false;
        c1.passes = [&](const WorkBox& wb) {
            if (spec.init.kind == InitialSet::Kind::Sublevel &&
                spec.init.g->bound(wb.x).lo > 0.0)
                return true;  // box misses X0
            return cert.v.bound(wb.x, {0.0, 0.0}).hi <= -tol;
        };
        c1.refute = [&](const WorkBox& wb) -> std::optional<Counterexample> {
            auto c = wb.x.center();
            if (!spec.init.contains(c)) return std::nullopt;
            double val = cert.v.eval(c, 0.0);
            if (val > tol) return Counterexample{c, 0.0, {}, CertCondition::InitialNegative, val};
            return std::nullopt;
        };
        c1.run(CertCondition::InitialNegative);
        if (!record(c1)) return report;
    }

    // C2 / C2': boundary or domination condition.
    if (cert.mode == CertMode::Eq7) {
        BnB c2{budget};
        c2.domain_x = spec.safe.bounds;
        c2.domain_t = horizon;
        c2.passes = [&](const WorkBox& wb) {
            if (spec.safe.h.bound(wb.x).lo > 0.0) return true;  // outside S-bar
            return (spec.safe.h - cert.v).bound(wb.x, wb.t).hi <= 0.0;
        };
        c2.refute = [&](const WorkBox& wb) -> std::optional<Counterexample> {
            auto c = wb.x.center();
            if (spec.safe.h.eval(c) > 0.0) return std::nullopt;
            for (double t : {0.5 * (wb.t.lo + wb.t.hi), wb.t.lo, wb.t.hi}) {
                double val = spec.safe.h.eval(c) - cert.v.eval(c, t);
                if (val > tol)
                    return Counterexample{c, t, {}, CertCondition::ValueDominates, val};
            }
            return std::nullopt;
        };
        c2.run(CertCondition::ValueDominates);
        if (!record(c2)) return report;
    } else {
        BnB c2{budget};
        c2.domain_x = spec.safe.bounds;
        c2.domain_t = horizon;
        c2.passes = [&](const WorkBox& wb) {
            if (!spec.safe.h.bound(wb.x).contains(0.0)) return true;  // no boundary inside
            if (cert.v.bound(wb.x, wb.t).lo >= 0.0) return true;
            // v >= h on the box also suffices: on the boundary h = 0.
            return (spec.safe.h - cert.v).bound(wb.x, wb.t).hi <= 0.0;
        };
        c2.refute = [&](const WorkBox& wb) -> std::optional<Counterexample> {
            auto proj = project_to_boundary(spec, wb.x.center());
            if (!proj || !spec.safe.bounds.contains(*proj, 1e-9)) return std::nullopt;
            for (double t : {0.5 * (wb.t.lo + wb.t.hi), wb.t.lo, wb.t.hi}) {
                double val = -cert.v.eval(*proj, t);
                if (val > tol)
                    return Counterexample{*proj, t, {}, CertCondition::BoundaryNonneg, val};
            }
            return std::nullopt;
        };
        c2.run(CertCondition::BoundaryNonneg);
        if (!record(c2)) return report;
    }

    // C3: sup_d Lv - lambda v <= 0 over (S-bar) x [0,T].
    {
        BnB c3{budget};
        c3.domain_x = spec.safe.bounds;
        c3.domain_t = horizon;
        c3.passes = [&](const WorkBox& wb) {
            if (spec.safe.h.bound(wb.x).lo > 0.0) return true;  // box misses S-bar
            if (boxD) {
                for (const auto& p : lie_vertex_polys)
                    if (p.bound(wb.x, wb.t).hi > 0.0) return false;
                return true;
            }
            double hi = lie_a.bound(wb.x, wb.t).hi;
            double b2 = std::max(0.0, lie_b_sq.bound(wb.x, wb.t).hi);
            return hi + spec.D.radius[0] * std::sqrt(b2) <= 0.0;
        };
        c3.refute = [&](const WorkBox& wb) -> std::optional<Counterexample> {
            auto c = wb.x.center();
            if (spec.safe.h.eval(c) > 0.0) return std::nullopt;
            for (double t : {0.5 * (wb.t.lo + wb.t.hi), wb.t.lo, wb.t.hi}) {
                // worst disturbance at the point
                std::vector<double> dworst;
                double val;
                if (boxD) {
                    val = -std::numeric_limits<double>::infinity();
                    for (size_t k = 0; k < lie_vertex_polys.size(); ++k) {
                        double v = lie_vertex_polys[k].eval(c, t);
                        if (v > val) {
                            val = v;
                            dworst = dvertices[k];
                        }
                    }
                } else {
                    dworst = spec.D.center;
                    double norm = 0.0;
                    std::vector<double> bv(spec.m);
                    for (int j = 0; j < spec.m; ++j) {
                        bv[j] = lie_b[j].eval(c, t);
                        norm += bv[j] * bv[j];
                    }
                    norm = std::sqrt(norm);
                    if (norm > 0.0)
                        for (int j = 0; j < spec.m; ++j)
                            dworst[j] += spec.D.radius[0] * bv[j] / norm;
                    val = lie_derivative(spec, cert.v, dworst).eval(c, t) -
                          lambda * cert.v.eval(c, t);
                }
                if (val > tol)
                    return Counterexample{c, t, dworst, CertCondition::LieNonpositive, val};
            }
            return std::nullopt;
        };
        c3.run(CertCondition::LieNonpositive);
        if (!record(c3)) return report;
    }

    report.status = CheckStatus::Valid;
    for (const auto& c : report.conditions)
        if (c.status != CheckStatus::Valid) report.status = CheckStatus::Inconclusive;
    return report;
}

LambdaTransform transform_lambda(const SystemSpec& spec, const Certificate& cert) {
    if (cert.mode != CertMode::Eq8)
        throw std::invalid_argument("transform_lambda: eq8 certificates only");
    const double lambda = cert.lambda;
    const PolyExpr v = cert.v;
    PolyExpr vt = v.deriv_t();
    std::vector<PolyExpr> vx;
    for (int i = 0; i < spec.n; ++i) vx.push_back(v.deriv_x(i));
    SystemSpec spec_copy = spec;

    LambdaTransform out;
    out.value = [v, lambda](std::span<const double> x, double t) {
        return std::exp(-lambda * t) * v.eval(x, t);
    };
    out.lie = [v, vt, vx, lambda, spec_copy](std::span<const double> x, double t,
                                             std::span<const double> d) {
        double lie = vt.eval(x, t);
        for (int i = 0; i < spec_copy.n; ++i) {
            double fi = spec_copy.f1[i].eval(x);
            for (int j = 0; j < spec_copy.m; ++j) fi += spec_copy.f2[i][j].eval(x) * d[j];
            lie += vx[i].eval(x, t) * fi;
        }
        return std::exp(-lambda * t) * (lie - lambda * v.eval(x, t));
    };
    return out;
}

}  // namespace safehj
