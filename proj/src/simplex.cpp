#include "safehj/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace safehj {

namespace {

constexpr double kEps = 1e-9;
// Ratio-test pivots below this are treated as zero: with many nearly parallel
// rows, elimination leaves cancellation noise around 1e-9 that must never be
// divided by.
constexpr double kPivTol = 1e-7;

// Standard tableau simplex on
//   maximize c.z  s.t. A z + s = b, z,s >= 0
// with artificial variables for rows whose b < 0 (phase 1).
class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
            const std::vector<double>& c)
        : m_(A.size()), n_(c.size()) {
        // columns: n structural + m slacks + (phase-1 artificials appended later)
        rows_.assign(m_, {});
        basis_.resize(m_);
        rhs_.resize(m_);
        int n_art = 0;
        for (size_t r = 0; r < m_; ++r)
            if (b[r] < 0) ++n_art;
        width_ = n_ + m_ + size_t(n_art);
        size_t art = n_ + m_;
        for (size_t r = 0; r < m_; ++r) {
            rows_[r].assign(width_, 0.0);
            double sign = b[r] < 0 ? -1.0 : 1.0;
            for (size_t j = 0; j < n_; ++j) rows_[r][j] = sign * A[r][j];
            rows_[r][n_ + r] = sign;  // slack
            rhs_[r] = sign * b[r];
            if (b[r] < 0) {
                rows_[r][art] = 1.0;
                basis_[r] = art++;
            } else {
                basis_[r] = n_ + r;
            }
        }
        n_art_ = size_t(n_art);
        obj_.assign(width_, 0.0);
        for (size_t j = 0; j < n_; ++j) obj_[j] = c[j];
    }

    // returns false on iteration blow-up / unboundedness
    bool solve(int max_pivots) {
        if (n_art_ > 0) {
            // phase 1: minimize sum of artificials
            std::vector<double> saved = obj_;
            obj_.assign(width_, 0.0);
            for (size_t j = n_ + m_; j < width_; ++j) obj_[j] = -1.0;
            limit_ = width_;
            make_reduced();
            if (!iterate(max_pivots)) return false;
            if (objective() < -1e-7) return false;  // infeasible
            // drive remaining artificials out of the basis if possible
            for (size_t r = 0; r < m_; ++r) {
                if (basis_[r] < n_ + m_) continue;
                size_t enter = width_;
                for (size_t j = 0; j < n_ + m_; ++j)
                    if (std::abs(rows_[r][j]) > kPivTol) {
                        enter = j;
                        break;
                    }
                if (enter < width_) pivot(r, enter);
                // an all-zero row is redundant: its artificial stays basic
                // at zero and is simply never allowed to move again
            }
            obj_ = saved;
        }
        // phase 2 never considers artificial columns
        limit_ = n_ + m_;
        make_reduced();
        if (!iterate(max_pivots)) return false;
        // the basis must still be primal feasible; reject if drift broke it
        for (size_t r = 0; r < m_; ++r)
            if (rhs_[r] < -1e-6) return false;
        return true;
    }

    double objective() const { return obj_value_; }

    std::vector<double> solution() const {
        std::vector<double> z(n_, 0.0);
        for (size_t r = 0; r < m_; ++r)
            if (basis_[r] < n_) z[basis_[r]] = rhs_[r];
        return z;
    }

private:
    void make_reduced() {
        // express the objective in terms of nonbasic variables
        red_ = obj_;
        obj_value_ = 0.0;
        for (size_t r = 0; r < m_; ++r) {
            double cb = obj_[basis_[r]];
            if (cb == 0.0) continue;
            obj_value_ += cb * rhs_[r];
            for (size_t j = 0; j < width_; ++j) red_[j] -= cb * rows_[r][j];
        }
    }

    void pivot(size_t r, size_t col) {
        double piv = rows_[r][col];
        for (size_t j = 0; j < width_; ++j) rows_[r][j] /= piv;
        rhs_[r] /= piv;
        for (size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = rows_[i][col];
            if (f == 0.0) continue;
            for (size_t j = 0; j < width_; ++j) rows_[i][j] -= f * rows_[r][j];
            rhs_[i] -= f * rhs_[r];
            if (std::abs(rhs_[i]) < 1e-9) rhs_[i] = 0.0;
        }
        double f = red_[col];
        if (f != 0.0) {
            for (size_t j = 0; j < width_; ++j) red_[j] -= f * rows_[r][j];
            obj_value_ += f * rhs_[r];
        }
        basis_[r] = col;
    }

    bool iterate(int max_pivots) {
        for (int it = 0; it < max_pivots; ++it) {
            // Dantzig rule with Bland fallback on near-ties to dodge cycling
            size_t enter = width_;
            double best = kEps;
            for (size_t j = 0; j < limit_; ++j)
                if (red_[j] > best) {
                    best = red_[j];
                    enter = j;
                }
            if (enter == width_) return true;  // optimal
            size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (size_t r = 0; r < m_; ++r) {
                if (rows_[r][enter] > kPivTol) {
                    double ratio = rhs_[r] / rows_[r][enter];
                    // among (near-)ties take the largest pivot element for stability
                    if (ratio < best_ratio - 1e-9 ||
                        (ratio < best_ratio + 1e-9 &&
                         (leave == m_ || rows_[r][enter] > rows_[leave][enter]))) {
                        best_ratio = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == m_) return false;  // unbounded
            pivot(leave, enter);
            if ((it & 63) == 63) make_reduced();  // limit reduced-cost drift
        }
        return false;  // pivot budget exhausted
    }

    size_t m_, n_, width_ = 0, n_art_ = 0, limit_ = 0;
    std::vector<std::vector<double>> rows_;
    std::vector<double> rhs_;
    std::vector<size_t> basis_;
    std::vector<double> obj_, red_;
    double obj_value_ = 0.0;
};

}  // namespace

std::optional<LpResult> simplex_maximize(const std::vector<std::vector<double>>& A,
                                         const std::vector<double>& b,
                                         const std::vector<double>& c, int max_pivots) {
    if (A.size() != b.size()) throw std::invalid_argument("simplex: A/b size mismatch");
    for (const auto& row : A)
        if (row.size() != c.size()) throw std::invalid_argument("simplex: row width mismatch");
    Tableau t(A, b, c);
    if (!t.solve(max_pivots)) return std::nullopt;
    return LpResult{t.solution(), t.objective()};
}

}  // namespace safehj
