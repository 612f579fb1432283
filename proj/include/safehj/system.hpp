#pragma once

#include <optional>
#include <span>
#include <vector>

#include "safehj/interval.hpp"
#include "safehj/poly.hpp"

namespace safehj {

// Compact convex disturbance value set: axis-aligned box or Euclidean ball.
struct DisturbanceSet {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    std::vector<double> center;
    std::vector<double> radius;  // per-axis half-widths (box) or single entry (ball)

    int dim() const { return static_cast<int>(center.size()); }
    bool contains(std::span<const double> d, double tol = 1e-12) const;
    Box bounding_box() const;
    // Box kind only: all 2^m corners. Degenerate axes collapse.
    std::vector<std::vector<double>> vertices() const;
    void validate() const;
};

// S = {x | h(x) < 0}; bounds is the user-declared box S is claimed to lie in.
struct SafeSet {
    PolyExpr h{0};
    Box bounds;
};

struct InitialSet {
    enum class Kind { Box, Sublevel };
    Kind kind = Kind::Box;
    Box box;                    // the box itself, or the bounding box of {g <= 0}
    std::optional<PolyExpr> g;  // Sublevel kind only
    bool contains(std::span<const double> x, double tol = 1e-12) const;
};

struct SystemSpec {
    int n = 0;  // state dimension
    int m = 0;  // disturbance dimension
    std::vector<PolyExpr> f1;               // n entries
    std::vector<std::vector<PolyExpr>> f2;  // n rows of m entries
    DisturbanceSet D;
    SafeSet safe;
    InitialSet init;
    double T = 0.0;
    Box clamp_box;  // extension field clamps x onto this box; must contain S-bar

    // Structural checks (dimensions, T > 0, clamp_box covers safe.bounds).
    void validate_shapes() const;
    // Semantic checks: S bounded inside safe.bounds (h > 0 on its faces) and
    // X0 inside S (interval bound of h over X0 box negative). Throws on failure.
    void validate_sets() const;
};

// Default clamp box: safe-set bounding box inflated by 10% per axis.
Box default_clamp_box(const SafeSet& safe);

// f(x,d) = f1(x) + f2(x) d. Requires d in D.
std::vector<double> eval_field(const SystemSpec& spec, std::span<const double> x,
                               std::span<const double> d);

// Globally Lipschitz extension F(x,d) = f(clamp(x), d).
std::vector<double> extend_field(const SystemSpec& spec, std::span<const double> x,
                                 std::span<const double> d);

// sup_{d in D} p . F(x,d), closed form over box/ball D.
double hamiltonian_sup(const SystemSpec& spec, std::span<const double> x,
                       std::span<const double> p);

// Maximizing disturbance of p . F(x,d) over D.
std::vector<double> hamiltonian_argmax(const SystemSpec& spec, std::span<const double> x,
                                       std::span<const double> p);

// Upper bound on ||grad poly|| over box via interval evaluation of the partials.
double lipschitz_bound(const PolyExpr& poly, const Box& box);

}  // namespace safehj
