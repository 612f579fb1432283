#include "safehj/value_grid.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace safehj {

size_t Grid::node_count() const {
    size_t n = 1;
    for (int c : counts) n *= size_t(c);
    return n;
}

std::vector<double> Grid::node(size_t flat) const {
    std::vector<double> x(dim());
    for (int i = dim() - 1; i >= 0; --i) {
        size_t idx = flat % size_t(counts[i]);
        flat /= size_t(counts[i]);
        x[i] = bounds.lo[i] + double(idx) * spacing(i);
    }
    return x;
}

void Grid::validate() const {
    if (dim() < 1) throw std::invalid_argument("grid: empty dimension");
    if (dim() > 3)
        throw std::invalid_argument(
            "grid: dimensions above 3 rejected (curse of dimensionality)");
    if (bounds.dim() != dim()) throw std::invalid_argument("grid: bounds dimension mismatch");
    for (int i = 0; i < dim(); ++i) {
        if (counts[i] < 3) throw std::invalid_argument("grid: need >= 3 nodes per axis");
        if (!(bounds.lo[i] < bounds.hi[i]))
            throw std::invalid_argument("grid: degenerate axis bounds");
    }
    if (!(T > 0.0)) throw std::invalid_argument("grid: horizon must be > 0");
}

ValueGrid::ValueGrid(Grid g, int steps)
    : grid_(std::move(g)), steps_(steps), nnodes_(grid_.node_count()) {
    values_.assign(size_t(steps_ + 1) * nnodes_, 0.0);
}

namespace {

// Lower node index and interpolation weight along one axis.
void locate(const Grid& g, int axis, double v, size_t& idx, double& w) {
    const double dx = g.spacing(axis);
    double s = (v - g.bounds.lo[axis]) / dx;
    if (s < -1e-9 || s > g.counts[axis] - 1 + 1e-9)
        throw std::domain_error("query point outside grid bounds");
    s = std::min(std::max(s, 0.0), double(g.counts[axis] - 1));
    idx = std::min(size_t(s), size_t(g.counts[axis] - 2));
    w = s - double(idx);
}

}  // namespace

double ValueGrid::value(std::span<const double> x, double t) const {
    const int n = grid_.dim();
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("value: dimension mismatch");
    if (t < -1e-9 || t > grid_.T + 1e-9) throw std::domain_error("query time outside [0,T]");
    double tk = std::min(std::max(t / dt(), 0.0), double(steps_));
    int k0 = std::min(int(tk), steps_ - 1);
    if (steps_ == 0) k0 = 0;
    double wt = steps_ == 0 ? 0.0 : tk - k0;
    int k1 = std::min(k0 + 1, steps_);

    std::vector<size_t> idx(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) locate(grid_, i, x[i], idx[i], w[i]);

    // Accumulate the 2^n corner contributions.
    double v0 = 0.0, v1 = 0.0;
    const int corners = 1 << n;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        size_t flat = 0;
        for (int i = 0; i < n; ++i) {
            const int bit = c >> i & 1;
            weight *= bit ? w[i] : 1.0 - w[i];
            flat = flat * size_t(grid_.counts[i]) + idx[i] + size_t(bit);
        }
        if (weight == 0.0) continue;
        v0 += weight * at(k0, flat);
        v1 += weight * at(k1, flat);
    }
    return (1.0 - wt) * v0 + wt * v1;
}

std::vector<double> ValueGrid::gradient(std::span<const double> x, double t) const {
    const int n = grid_.dim();
    std::vector<double> g(n);
    std::vector<double> xp(x.begin(), x.end());
    for (int i = 0; i < n; ++i) {
        const double h = grid_.spacing(i);
        double lo = std::max(x[i] - h, grid_.bounds.lo[i]);
        double hi = std::min(x[i] + h, grid_.bounds.hi[i]);
        xp[i] = hi;
        double vp = value(xp, t);
        xp[i] = lo;
        double vm = value(xp, t);
        xp[i] = x[i];
        g[i] = (vp - vm) / (hi - lo);
    }
    return g;
}

std::vector<double> field_bounds(const SystemSpec& spec, const Box& box) {
    const Box dbox = spec.D.bounding_box();
    std::vector<double> alpha(spec.n, 0.0);
    for (int i = 0; i < spec.n; ++i) {
        Interval fi = spec.f1[i].bound(box);
        for (int j = 0; j < spec.m; ++j)
            fi += spec.f2[i][j].bound(box) * dbox.axis(j);
        alpha[i] = fi.mag();
    }
    return alpha;
}

double cfl_dt_bound(const Grid& grid, const std::vector<double>& alpha) {
    double s = 0.0;
    for (int i = 0; i < grid.dim(); ++i) s += alpha[i] / grid.spacing(i);
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 / s;
}

ValueGrid solve_value_function(const SystemSpec& spec, const Grid& grid, SolveStats* stats) {
    grid.validate();
    if (grid.dim() != spec.n) throw std::invalid_argument("grid/state dimension mismatch");
    for (int i = 0; i < spec.n; ++i)
        if (grid.bounds.lo[i] > spec.clamp_box.lo[i] || grid.bounds.hi[i] < spec.clamp_box.hi[i])
            throw std::invalid_argument("grid must cover the clamp box");

    const std::vector<double> alpha = field_bounds(spec, grid.bounds);
    const double dt_max = cfl_dt_bound(grid, alpha);
    int K = grid.steps;
    if (K <= 0) {
        K = std::isfinite(dt_max) ? int(std::ceil(grid.T / dt_max)) : 10;
        K = std::max(K, 10);
    } else if (grid.T / K > dt_max * (1.0 + 1e-12)) {
        throw std::invalid_argument("CFL violation: need dt <= " + std::to_string(dt_max) +
                                    ", got " + std::to_string(grid.T / K));
    }
    const double dt = grid.T / K;

    ValueGrid vg(grid, K);
    const size_t N = vg.node_count();
    const int n = grid.dim();

    // Cache node coordinates and h(node).
    std::vector<std::vector<double>> nodes(N);
    std::vector<double> hval(N);
    for (size_t s = 0; s < N; ++s) {
        nodes[s] = grid.node(s);
        hval[s] = spec.safe.h.eval(nodes[s]);
        vg.at(K, s) = hval[s];  // terminal condition
    }

    // Strides for neighbor lookup in the flat row-major index.
    std::vector<size_t> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * size_t(grid.counts[i + 1]);
    std::vector<size_t> coord(n);

    std::vector<double> dminus(n), dplus(n), pcen(n);
    for (int k = K - 1; k >= 0; --k) {
        for (size_t s = 0; s < N; ++s) {
            // decode per-axis indices
            size_t rem = s;
            for (int i = 0; i < n; ++i) {
                coord[i] = rem / stride[i];
                rem %= stride[i];
            }
            const double vc = vg.at(k + 1, s);
            bool frontier = false;
            for (int i = 0; i < n; ++i) {
                const double dx = grid.spacing(i);
                const bool at_lo = coord[i] == 0;
                const bool at_hi = coord[i] == size_t(grid.counts[i] - 1);
                if (at_lo || at_hi) frontier = true;
                const double vm = at_lo ? vc : vg.at(k + 1, s - stride[i]);
                const double vp = at_hi ? vc : vg.at(k + 1, s + stride[i]);
                double dm = (vc - vm) / dx;
                double dp = (vp - vc) / dx;
                // one-sided at the boundary (kills the dissipation term there)
                if (at_lo) dm = dp;
                if (at_hi) dp = dm;
                dminus[i] = dm;
                dplus[i] = dp;
                pcen[i] = 0.5 * (dm + dp);
            }
            if (frontier) {
                // The one-sided stencil is upwind only if the maximizing
                // field points back into the grid; when it points off-grid
                // the value depends on data we do not have, so the node is
                // pinned at its terminal value. The clamp-box inflation
                // keeps such nodes outside S-bar.
                auto dstar = hamiltonian_argmax(spec, nodes[s], pcen);
                auto f = extend_field(spec, nodes[s], dstar);
                bool off_grid = false;
                for (int i = 0; i < n; ++i) {
                    if (coord[i] == 0 && f[i] < 0.0) off_grid = true;
                    if (coord[i] == size_t(grid.counts[i] - 1) && f[i] > 0.0) off_grid = true;
                }
                if (off_grid) {
                    vg.at(k, s) = vc;
                    continue;
                }
            }
            // Marching backward in t, the stable dissipation acts like
            // +alpha * laplacian on V (opposite of the forward-time form).
            double H = hamiltonian_sup(spec, nodes[s], pcen);
            for (int i = 0; i < n; ++i) H += 0.5 * alpha[i] * (dplus[i] - dminus[i]);
            double v = vc + dt * H;
            if (!std::isfinite(v)) throw std::runtime_error("non-finite value in HJ sweep");
            vg.at(k, s) = std::max(hval[s], v);
        }
    }
    if (stats) {
        stats->alpha = alpha;
        stats->dt = dt;
        stats->steps = K;
    }
    return vg;
}

void ValueGrid::write_csv(std::ostream& os) const {
    os << "t";
    for (int i = 0; i < grid_.dim(); ++i) os << ",x" << i + 1;
    os << ",V\n";
    char buf[512];
    for (int k = 0; k <= steps_; ++k) {
        for (size_t s = 0; s < nnodes_; ++s) {
            const auto x = grid_.node(s);
            int len = std::snprintf(buf, sizeof buf, "%.17g", time_of(k));
            os.write(buf, len);
            for (double xi : x) {
                len = std::snprintf(buf, sizeof buf, ",%.17g", xi);
                os.write(buf, len);
            }
            len = std::snprintf(buf, sizeof buf, ",%.17g\n", at(k, s));
            os.write(buf, len);
        }
    }
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    os.write(reinterpret_cast<const char*>(&v), 8);  // little-endian host assumed
}

template <typename T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void ValueGrid::write_binary(std::ostream& os) const {
    put<uint64_t>(os, uint64_t(grid_.dim()));
    put<uint64_t>(os, uint64_t(steps_));
    put<double>(os, grid_.T);
    for (int i = 0; i < grid_.dim(); ++i) {
        put<double>(os, grid_.bounds.lo[i]);
        put<double>(os, grid_.bounds.hi[i]);
        put<uint64_t>(os, uint64_t(grid_.counts[i]));
    }
    for (double v : values_) put<double>(os, v);
}

ValueGrid ValueGrid::read_binary(std::istream& is) {
    Grid g;
    const auto dim = get<uint64_t>(is);
    const auto steps = get<uint64_t>(is);
    g.T = get<double>(is);
    g.bounds.lo.resize(dim);
    g.bounds.hi.resize(dim);
    g.counts.resize(dim);
    for (uint64_t i = 0; i < dim; ++i) {
        g.bounds.lo[i] = get<double>(is);
        g.bounds.hi[i] = get<double>(is);
        g.counts[i] = int(get<uint64_t>(is));
    }
    g.steps = int(steps);
    ValueGrid vg(g, int(steps));
    for (double& v : vg.values_) v = get<double>(is);
    if (!is) throw std::runtime_error("truncated value-grid dump");
    return vg;
}

}  // namespace safehj
