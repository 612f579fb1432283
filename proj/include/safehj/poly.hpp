#pragma once

#include <span>
#include <string>
#include <vector>

#include "safehj/interval.hpp"

namespace safehj {

// One monomial: coeff * x1^e1 * ... * xn^en * t^et.
struct Monomial {
    double coeff = 0.0;
    std::vector<int> xexp;  // length nvars, entries >= 0
    int texp = 0;
};

// Sparse multivariate polynomial in state variables x1..xn and optionally t,
// kept in canonical form (terms sorted by exponent vector, duplicates merged,
// zero coefficients dropped).
class PolyExpr {
public:
    explicit PolyExpr(int nvars = 0) : nvars_(nvars) {}

    static PolyExpr constant(int nvars, double c);
    static PolyExpr variable(int nvars, int i);  // x_{i+1}
    static PolyExpr time_var(int nvars);

    int nvars() const { return nvars_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(double coeff, std::vector<int> xexp, int texp = 0);

    PolyExpr operator+(const PolyExpr& o) const;
    PolyExpr operator-(const PolyExpr& o) const;
    PolyExpr operator*(const PolyExpr& o) const;
    PolyExpr scaled(double s) const;

    double eval(std::span<const double> x, double t = 0.0) const;

    PolyExpr deriv_x(int i) const;
    PolyExpr deriv_t() const;

    bool depends_on_t() const;
    int degree_x() const;  // max total degree in x
    int degree_t() const;

    // Range enclosure over box (in x) times time interval.
    Interval bound(const Box& xbox, const Interval& tint = {0.0, 0.0}) const;

    std::string str() const;

    // Grammar: sum of terms; term = [sign] factor ('*' factor)*;
    // factor = number | var | var '^' uint; var = x1..xn | t
    // (when nvars == 1, plain "x" is accepted for x1).
    static PolyExpr parse(const std::string& text, int nvars);

    bool operator==(const PolyExpr& o) const;

private:
    void canonicalize();

    int nvars_;
    std::vector<Monomial> terms_;
};

}  // namespace safehj
