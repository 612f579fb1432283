#pragma once

#include <optional>
#include <vector>

namespace safehj {

// Dense two-phase primal simplex for
//   maximize c . z   s.t.  A z <= b,  z >= 0.
// Small problems only (hundreds of rows/columns).
struct LpResult {
    std::vector<double> z;
    double objective = 0.0;
};

std::optional<LpResult> simplex_maximize(const std::vector<std::vector<double>>& A,
                                         const std::vector<double>& b,
                                         const std::vector<double>& c,
                                         int max_pivots = 200000);

}  // namespace safehj
