#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safehj/certificate.hpp"
#include "safehj/value_grid.hpp"

namespace safehj {

// Monomial basis over (x,t): all x-degrees up to deg_x total, t-degree up to deg_t.
struct Template {
    int nvars = 0;
    int deg_x = 0;
    int deg_t = 0;
    std::vector<Monomial> basis;  // unit-coefficient monomials

    static Template make(int nvars, int deg_x, int deg_t);
    PolyExpr instantiate(const std::vector<double>& coeffs) const;
    size_t size() const { return basis.size(); }
};

// Rows a . c <= b, linear in the template coefficients c.
struct LinearFeasibilityProblem {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    double coeff_bound = 1e3;
};

struct SamplePoints {
    std::vector<std::vector<double>> init_pts;                // x in X0
    std::vector<std::pair<std::vector<double>, double>> boundary_pts;  // (x,t), x on dS (eq5) or in S-bar (eq7)
    std::vector<std::tuple<std::vector<double>, double, std::vector<double>>> lie_pts;  // (x,t,d)
};

// Deterministic stratified sample sets for each condition.
SamplePoints initial_samples(const SystemSpec& spec, CertMode mode, int per_condition,
                             uint64_t seed);

LinearFeasibilityProblem build_constraints(const SystemSpec& spec, const Template& tmpl,
                                           CertMode mode, double lambda,
                                           const SamplePoints& points, double margin);

// Max-min-slack LP; nullopt when infeasible (or degenerate).
std::optional<std::vector<double>> solve_feasibility(const LinearFeasibilityProblem& lfp);

struct SynthesisInfo {
    int iterations = 0;
    size_t samples = 0;
    std::string route;
    double eps_hat = 0.0;    // fit route only
    double delta_hat = 0.0;  // fit route only
    std::string failure;     // empty on success
};

std::optional<Certificate> cegis_synthesize(const SystemSpec& spec, const Template& tmpl,
                                            CertMode mode, double lambda, double margin,
                                            int max_iters, uint64_t seed, double tol = 1e-6,
                                            long max_boxes = 1'000'000,
                                            SynthesisInfo* info = nullptr);

// Corollary-2 style constructive route: polynomial least-squares fit of the
// value function plus the epsilon shift, verified in eq7 mode.
std::optional<Certificate> fit_from_value_function(const SystemSpec& spec, const ValueGrid& vg,
                                                   int deg_x, int deg_t, double tol = 1e-6,
                                                   long max_boxes = 1'000'000,
                                                   SynthesisInfo* info = nullptr);

}  // namespace safehj
