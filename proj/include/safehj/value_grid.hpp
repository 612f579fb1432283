#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "safehj/system.hpp"

namespace safehj {

// Uniform spatial grid times uniform time steps on [0,T].
struct Grid {
    Box bounds;
    std::vector<int> counts;  // nodes per axis, >= 3
    int steps = 0;            // time step count K; 0 = pick from CFL
    double T = 0.0;

    int dim() const { return static_cast<int>(counts.size()); }
    double spacing(int i) const { return bounds.width(i) / (counts[i] - 1); }
    size_t node_count() const;
    std::vector<double> node(size_t flat) const;
    void validate() const;
};

// V(x, t_k) for k = 0..K, time-major storage.
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(Grid g, int steps);

    const Grid& grid() const { return grid_; }
    int steps() const { return steps_; }  // K; stored layers are K+1
    double dt() const { return grid_.T / steps_; }
    double time_of(int k) const { return k * dt(); }

    double& at(int k, size_t node) { return values_[size_t(k) * nnodes_ + node]; }
    double at(int k, size_t node) const { return values_[size_t(k) * nnodes_ + node]; }
    size_t node_count() const { return nnodes_; }

    // Multilinear in space, linear in t. Throws std::domain_error off-grid.
    double value(std::span<const double> x, double t) const;
    // Central-difference spatial gradient of the interpolated value.
    std::vector<double> gradient(std::span<const double> x, double t) const;

    void write_csv(std::ostream& os) const;
    void write_binary(std::ostream& os) const;
    static ValueGrid read_binary(std::istream& is);

private:
    Grid grid_;
    int steps_ = 0;
    size_t nnodes_ = 0;
    std::vector<double> values_;
};

struct SolveStats {
    std::vector<double> alpha;  // per-axis dissipation coefficients
    double dt = 0.0;
    int steps = 0;
};

// Backward Lax-Friedrichs sweep for the variational inequality
//   max{ h - V, V_t + sup_d grad V . F } = 0, V(x,T) = h(x).
// If grid.steps > 0 it is validated against the CFL bound; otherwise the
// step count is chosen from it.
ValueGrid solve_value_function(const SystemSpec& spec, const Grid& grid,
                               SolveStats* stats = nullptr);

// Per-axis bound max |F_i| over box x D (the dissipation coefficients).
std::vector<double> field_bounds(const SystemSpec& spec, const Box& box);

// CFL time-step bound 0.5 / sum_i alpha_i / dx_i (infinite when all alpha = 0).
double cfl_dt_bound(const Grid& grid, const std::vector<double>& alpha);

}  // namespace safehj
