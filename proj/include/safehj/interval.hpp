#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace safehj {

// Closed interval [lo, hi] with outward-agnostic double arithmetic.
// Enclosures are valid for exact real arithmetic; rounding slack is
// absorbed by the tolerances of the callers.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(a), hi(b) {}
    static Interval point(double v) { return {v, v}; }

    bool contains(double v) const { return lo <= v && v <= hi; }
    double width() const { return hi - lo; }
    double mag() const { return std::max(std::abs(lo), std::abs(hi)); }

    Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
    Interval operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }
    Interval operator-() const { return {-hi, -lo}; }

    Interval operator*(const Interval& o) const {
        const double a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
        return {std::min(std::min(a, b), std::min(c, d)),
                std::max(std::max(a, b), std::max(c, d))};
    }
    Interval operator*(double s) const {
        return s >= 0 ? Interval{lo * s, hi * s} : Interval{hi * s, lo * s};
    }
    Interval& operator+=(const Interval& o) {
        lo += o.lo;
        hi += o.hi;
        return *this;
    }

    // x^k for integer k >= 0; even powers are tightened around zero.
    Interval pow(int k) const {
        if (k == 0) return {1.0, 1.0};
        if (k == 1) return *this;
        if (k % 2 == 1 || lo >= 0.0)
            return {std::pow(lo, k), std::pow(hi, k)};
        if (hi <= 0.0) return {std::pow(hi, k), std::pow(lo, k)};
        return {0.0, std::pow(mag(), k)};
    }
};

// Axis-aligned box.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {}

    int dim() const { return static_cast<int>(lo.size()); }
    Interval axis(int i) const { return {lo[i], hi[i]}; }
    double width(int i) const { return hi[i] - lo[i]; }
    std::vector<double> center() const {
        std::vector<double> c(lo.size());
        for (size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }
    bool contains(const std::vector<double>& x, double tol = 0.0) const {
        for (size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }
    // Inflate each axis by frac of its half-width (degenerate axes by abs).
    Box inflated(double frac) const {
        Box b = *this;
        for (size_t i = 0; i < lo.size(); ++i) {
            double pad = 0.5 * frac * (hi[i] - lo[i]);
            if (pad <= 0.0) pad = frac * std::max(1.0, std::abs(lo[i]));
            b.lo[i] -= pad;
            b.hi[i] += pad;
        }
        return b;
    }
};

inline double clamp_to(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

inline std::vector<double> clamp_to_box(const std::vector<double>& x, const Box& b) {
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = clamp_to(x[i], b.lo[i], b.hi[i]);
    return y;
}

}  // namespace safehj
