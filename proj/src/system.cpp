#include "safehj/system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace safehj {

bool DisturbanceSet::contains(std::span<const double> d, double tol) const {
    if (static_cast<int>(d.size()) != dim()) return false;
    if (kind == Kind::Box) {
        for (int j = 0; j < dim(); ++j)
            if (std::abs(d[j] - center[j]) > radius[j] + tol) return false;
        return true;
    }
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += (d[j] - center[j]) * (d[j] - center[j]);
    return std::sqrt(s) <= radius[0] + tol;
}

Box DisturbanceSet::bounding_box() const {
    Box b;
    b.lo.resize(dim());
    b.hi.resize(dim());
    for (int j = 0; j < dim(); ++j) {
        double r = kind == Kind::Box ? radius[j] : radius[0];
        b.lo[j] = center[j] - r;
        b.hi[j] = center[j] + r;
    }
    return b;
}

std::vector<std::vector<double>> DisturbanceSet::vertices() const {
    if (kind != Kind::Box) throw std::logic_error("vertices: box disturbance sets only");
    // Collapse zero-width axes so degenerate boxes do not multiply corners.
    std::vector<int> free_axes;
    for (int j = 0; j < dim(); ++j)
        if (radius[j] > 0.0) free_axes.push_back(j);
    if (free_axes.size() > 20) throw std::invalid_argument("disturbance box vertex blow-up");
    std::vector<std::vector<double>> out;
    const size_t count = size_t{1} << free_axes.size();
    out.reserve(count);
    for (size_t mask = 0; mask < count; ++mask) {
        std::vector<double> v = center;
        for (size_t b = 0; b < free_axes.size(); ++b) {
            int j = free_axes[b];
            v[j] += (mask >> b & 1) ? radius[j] : -radius[j];
        }
        out.push_back(std::move(v));
    }
    return out;
}

void DisturbanceSet::validate() const {
    if (kind == Kind::Box) {
        if (radius.size() != center.size())
            throw std::invalid_argument("disturbance box: radius length mismatch");
    } else if (radius.size() != 1) {
        throw std::invalid_argument("disturbance ball: scalar radius expected");
    }
    for (double r : radius)
        if (!(r >= 0.0)) throw std::invalid_argument("disturbance radius must be >= 0");
}

bool InitialSet::contains(std::span<const double> x, double tol) const {
    std::vector<double> xv(x.begin(), x.end());
    if (!box.contains(xv, tol)) return false;
    if (kind == Kind::Sublevel) return g->eval(x) <= tol;
    return true;
}

void SystemSpec::validate_shapes() const {
    if (n < 1) throw std::invalid_argument("state dimension must be >= 1");
    if (m < 0) throw std::invalid_argument("disturbance dimension must be >= 0");
    if (static_cast<int>(f1.size()) != n) throw std::invalid_argument("f1 must have n components");
    if (static_cast<int>(f2.size()) != n) throw std::invalid_argument("f2 must have n rows");
    for (const auto& row : f2)
        if (static_cast<int>(row.size()) != m)
            throw std::invalid_argument("f2 rows must have m entries");
    if (D.dim() != m) throw std::invalid_argument("disturbance set dimension mismatch");
    D.validate();
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("horizon T must be finite and > 0");
    if (safe.bounds.dim() != n || clamp_box.dim() != n)
        throw std::invalid_argument("box dimension mismatch");
    for (int i = 0; i < n; ++i) {
        if (!(safe.bounds.lo[i] < safe.bounds.hi[i]))
            throw std::invalid_argument("safe.bounds axis degenerate");
        if (clamp_box.lo[i] > safe.bounds.lo[i] || clamp_box.hi[i] < safe.bounds.hi[i])
            throw std::invalid_argument("clamp_box must contain the safe-set bounding box");
    }
    if (init.box.dim() != n) throw std::invalid_argument("initial set dimension mismatch");
    if (init.kind == InitialSet::Kind::Sublevel && !init.g)
        throw std::invalid_argument("sublevel initial set needs g");
}

void SystemSpec::validate_sets() const {
    // S bounded: h > 0 on every face of the declared enclosing box.
    for (int i = 0; i < n; ++i) {
        for (int side = 0; side < 2; ++side) {
            Box face = safe.bounds;
            double v = side ? safe.bounds.hi[i] : safe.bounds.lo[i];
            face.lo[i] = face.hi[i] = v;
            Interval hb = safe.h.bound(face);
            if (!(hb.lo > 0.0))
                throw std::invalid_argument(
                    "safe set not verified bounded: h not positive on face x" +
                    std::to_string(i + 1) + (side ? " = upper" : " = lower") +
                    " of the declared bounds");
        }
    }
    // X0 subset of S: interval bound of h over the X0 box must be negative.
    Interval hx0 = safe.h.bound(init.box);
    if (!(hx0.hi < 0.0))
        throw std::invalid_argument("X0 not contained in S (interval bound of h on X0 is " +
                                    std::to_string(hx0.hi) + ", need < 0)");
    for (int i = 0; i < n; ++i)
        if (init.box.lo[i] < safe.bounds.lo[i] || init.box.hi[i] > safe.bounds.hi[i])
            throw std::invalid_argument("X0 box exceeds the declared safe-set bounds");
}

Box default_clamp_box(const SafeSet& safe) { return safe.bounds.inflated(0.1); }

namespace {

void check_point_dims(const SystemSpec& spec, std::span<const double> x,
                      std::span<const double> d) {
    if (static_cast<int>(x.size()) != spec.n)
        throw std::invalid_argument("state dimension mismatch");
    if (static_cast<int>(d.size()) != spec.m)
        throw std::invalid_argument("disturbance dimension mismatch");
}

std::vector<double> field_at(const SystemSpec& spec, std::span<const double> x,
                             std::span<const double> d) {
    std::vector<double> out(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        double v = spec.f1[i].eval(x);
        for (int j = 0; j < spec.m; ++j) v += spec.f2[i][j].eval(x) * d[j];
        out[i] = v;
    }
    return out;
}

}  // namespace

std::vector<double> eval_field(const SystemSpec& spec, std::span<const double> x,
                               std::span<const double> d) {
    check_point_dims(spec, x, d);
    if (!spec.D.contains(d)) throw std::domain_error("disturbance value outside D");
    return field_at(spec, x, d);
}

std::vector<double> extend_field(const SystemSpec& spec, std::span<const double> x,
                                 std::span<const double> d) {
    check_point_dims(spec, x, d);
    if (!spec.D.contains(d)) throw std::domain_error("disturbance value outside D");
    std::vector<double> xc(x.size());
    for (int i = 0; i < spec.n; ++i)
        xc[i] = clamp_to(x[i], spec.clamp_box.lo[i], spec.clamp_box.hi[i]);
    return field_at(spec, xc, d);
}

double hamiltonian_sup(const SystemSpec& spec, std::span<const double> x,
                       std::span<const double> p) {
    if (static_cast<int>(p.size()) != spec.n)
        throw std::invalid_argument("gradient dimension mismatch");
    std::vector<double> xc(x.size());
    for (int i = 0; i < spec.n; ++i)
        xc[i] = clamp_to(x[i], spec.clamp_box.lo[i], spec.clamp_box.hi[i]);
    double base = 0.0;
    for (int i = 0; i < spec.n; ++i) base += p[i] * spec.f1[i].eval(xc);
    // q = p^T f2(x)
    std::vector<double> q(spec.m, 0.0);
    for (int j = 0; j < spec.m; ++j)
        for (int i = 0; i < spec.n; ++i) q[j] += p[i] * spec.f2[i][j].eval(xc);
    double sup = base;
    if (spec.D.kind == DisturbanceSet::Kind::Box) {
        for (int j = 0; j < spec.m; ++j)
            sup += q[j] * spec.D.center[j] + std::abs(q[j]) * spec.D.radius[j];
    } else {
        double norm = 0.0;
        for (int j = 0; j < spec.m; ++j) {
            sup += q[j] * spec.D.center[j];
            norm += q[j] * q[j];
        }
        sup += spec.D.radius[0] * std::sqrt(norm);
    }
    return sup;
}

std::vector<double> hamiltonian_argmax(const SystemSpec& spec, std::span<const double> x,
                                       std::span<const double> p) {
    std::vector<double> xc(x.size());
    for (int i = 0; i < spec.n; ++i)
        xc[i] = clamp_to(x[i], spec.clamp_box.lo[i], spec.clamp_box.hi[i]);
    std::vector<double> q(spec.m, 0.0);
    for (int j = 0; j < spec.m; ++j)
        for (int i = 0; i < spec.n; ++i) q[j] += p[i] * spec.f2[i][j].eval(xc);
    std::vector<double> d = spec.D.center;
    if (spec.D.kind == DisturbanceSet::Kind::Box) {
        for (int j = 0; j < spec.m; ++j)
            d[j] += (q[j] >= 0 ? spec.D.radius[j] : -spec.D.radius[j]);
    } else {
        double norm = 0.0;
        for (int j = 0; j < spec.m; ++j) norm += q[j] * q[j];
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (int j = 0; j < spec.m; ++j) d[j] += spec.D.radius[0] * q[j] / norm;
    }
    return d;
}

double lipschitz_bound(const PolyExpr& poly, const Box& box) {
    double sq = 0.0;
    for (int i = 0; i < poly.nvars(); ++i) {
        Interval gi = poly.deriv_x(i).bound(box);
        sq += gi.mag() * gi.mag();
    }
    return std::sqrt(sq);
}

}  // namespace safehj
