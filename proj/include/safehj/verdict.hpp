#pragma once

#include <optional>
#include <string>

#include "safehj/sim.hpp"
#include "safehj/value_grid.hpp"

namespace safehj {

enum class SafetyStatus { Safe, Unsafe, Unknown };

std::string to_string(SafetyStatus s);

struct Verdict {
    SafetyStatus status = SafetyStatus::Unknown;
    double margin = 0.0;  // max V(x,0) over X0; <= -delta_num when SAFE
    std::optional<Trajectory> witness;
    struct Diagnostics {
        double delta_num = 0.0;       // numerical safety threshold
        double lipschitz_est = 0.0;   // empirical Lipschitz constant of V(.,0)
        double dissipation_est = 0.0;
        std::vector<int> grid_counts;
        double max_spacing = 0.0;
        double runtime_seconds = 0.0;
    } diagnostics;
};

// Lemma-3 style verdict: SAFE when max V(.,0) over X0 clears the numerical
// threshold; UNSAFE only with a simulated witness; UNKNOWN otherwise.
Verdict safety_verdict(const SystemSpec& spec, const ValueGrid& vg, double dt_sim);

struct DppReport {
    int samples_checked = 0;
    int violations = 0;
    double max_violation = 0.0;
    double tol = 0.0;
};

// Dynamic-programming consistency spot check: V(x,t) must dominate the
// payoff of any sampled single signal up to tol.
DppReport check_dpp(const SystemSpec& spec, const ValueGrid& vg, int samples, uint64_t seed,
                    double tol);

}  // namespace safehj
