#include "safehj/poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace safehj {

namespace {

bool exp_less(const Monomial& a, const Monomial& b) {
    if (a.xexp != b.xexp) return a.xexp < b.xexp;
    return a.texp < b.texp;
}

}  // namespace

PolyExpr PolyExpr::constant(int nvars, double c) {
    PolyExpr p(nvars);
    p.add_term(c, std::vector<int>(nvars, 0), 0);
    return p;
}

PolyExpr PolyExpr::variable(int nvars, int i) {
    if (i < 0 || i >= nvars) throw std::invalid_argument("variable index out of range");
    PolyExpr p(nvars);
    std::vector<int> e(nvars, 0);
    e[i] = 1;
    p.add_term(1.0, std::move(e), 0);
    return p;
}

PolyExpr PolyExpr::time_var(int nvars) {
    PolyExpr p(nvars);
    p.add_term(1.0, std::vector<int>(nvars, 0), 1);
    return p;
}

void PolyExpr::add_term(double coeff, std::vector<int> xexp, int texp) {
    if (static_cast<int>(xexp.size()) != nvars_)
        throw std::invalid_argument("exponent vector length mismatch");
    for (int e : xexp)
        if (e < 0) throw std::invalid_argument("negative exponent");
    if (texp < 0) throw std::invalid_argument("negative time exponent");
    terms_.push_back({coeff, std::move(xexp), texp});
    canonicalize();
}

void PolyExpr::canonicalize() {
    std::sort(terms_.begin(), terms_.end(), exp_less);
    std::vector<Monomial> out;
    for (auto& m : terms_) {
        if (!out.empty() && out.back().xexp == m.xexp && out.back().texp == m.texp)
            out.back().coeff += m.coeff;
        else
            out.push_back(std::move(m));
    }
    std::erase_if(out, [](const Monomial& m) { return m.coeff == 0.0; });
    terms_ = std::move(out);
}

PolyExpr PolyExpr::operator+(const PolyExpr& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("nvars mismatch");
    PolyExpr r(nvars_);
    r.terms_ = terms_;
    r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
    r.canonicalize();
    return r;
}

PolyExpr PolyExpr::operator-(const PolyExpr& o) const { return *this + o.scaled(-1.0); }

PolyExpr PolyExpr::operator*(const PolyExpr& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("nvars mismatch");
    PolyExpr r(nvars_);
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            Monomial m;
            m.coeff = a.coeff * b.coeff;
            m.texp = a.texp + b.texp;
            m.xexp.resize(nvars_);
            for (int i = 0; i < nvars_; ++i) m.xexp[i] = a.xexp[i] + b.xexp[i];
            r.terms_.push_back(std::move(m));
        }
    r.canonicalize();
    return r;
}

PolyExpr PolyExpr::scaled(double s) const {
    PolyExpr r(nvars_);
    r.terms_ = terms_;
    for (auto& m : r.terms_) m.coeff *= s;
    r.canonicalize();
    return r;
}

double PolyExpr::eval(std::span<const double> x, double t) const {
    if (static_cast<int>(x.size()) != nvars_)
        throw std::invalid_argument("eval: point dimension mismatch");
    double sum = 0.0;
    for (const auto& m : terms_) {
        double v = m.coeff;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m.xexp[i]; ++k) v *= x[i];
        for (int k = 0; k < m.texp; ++k) v *= t;
        sum += v;
    }
    return sum;
}

PolyExpr PolyExpr::deriv_x(int i) const {
    PolyExpr r(nvars_);
    for (const auto& m : terms_) {
        if (m.xexp[i] == 0) continue;
        Monomial d = m;
        d.coeff *= d.xexp[i];
        d.xexp[i] -= 1;
        r.terms_.push_back(std::move(d));
    }
    r.canonicalize();
    return r;
}

PolyExpr PolyExpr::deriv_t() const {
    PolyExpr r(nvars_);
    for (const auto& m : terms_) {
        if (m.texp == 0) continue;
        Monomial d = m;
        d.coeff *= d.texp;
        d.texp -= 1;
        r.terms_.push_back(std::move(d));
    }
    r.canonicalize();
    return r;
}

bool PolyExpr::depends_on_t() const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [](const Monomial& m) { return m.texp > 0; });
}

int PolyExpr::degree_x() const {
    int d = 0;
    for (const auto& m : terms_) {
        int s = 0;
        for (int e : m.xexp) s += e;
        d = std::max(d, s);
    }
    return d;
}

int PolyExpr::degree_t() const {
    int d = 0;
    for (const auto& m : terms_) d = std::max(d, m.texp);
    return d;
}

Interval PolyExpr::bound(const Box& xbox, const Interval& tint) const {
    if (xbox.dim() != nvars_) throw std::invalid_argument("bound: box dimension mismatch");
    Interval sum{0.0, 0.0};
    for (const auto& m : terms_) {
        Interval v{m.coeff, m.coeff};
        for (int i = 0; i < nvars_; ++i)
            if (m.xexp[i] > 0) v = v * xbox.axis(i).pow(m.xexp[i]);
        if (m.texp > 0) v = v * tint.pow(m.texp);
        sum += v;
    }
    return sum;
}

std::string PolyExpr::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& m : terms_) {
        double c = m.coeff;
        if (!first) {
            out += c < 0 ? " - " : " + ";
            c = std::abs(c);
        } else if (c < 0) {
            out += "-";
            c = -c;
        }
        first = false;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", c);
        std::vector<std::string> factors;
        bool all_zero = true;
        for (int i = 0; i < nvars_; ++i)
            if (m.xexp[i] > 0) {
                all_zero = false;
                std::string f = "x" + std::to_string(i + 1);
                if (m.xexp[i] > 1) f += "^" + std::to_string(m.xexp[i]);
                factors.push_back(f);
            }
        if (m.texp > 0) {
            all_zero = false;
            std::string f = "t";
            if (m.texp > 1) f += "^" + std::to_string(m.texp);
            factors.push_back(f);
        }
        if (all_zero || c != 1.0) {
            out += buf;
            if (!all_zero) out += "*";
        }
        for (size_t i = 0; i < factors.size(); ++i) {
            if (i) out += "*";
            out += factors[i];
        }
    }
    return out;
}

bool PolyExpr::operator==(const PolyExpr& o) const {
    if (nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
    for (size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].coeff != o.terms_[i].coeff || terms_[i].xexp != o.terms_[i].xexp ||
            terms_[i].texp != o.terms_[i].texp)
            return false;
    }
    return true;
}

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;
    int nvars;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("polynomial parse error at offset " +
                                    std::to_string(pos) + ": " + msg + " in \"" + s + "\"");
    }

    double number() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                s[pos] == 'e' || s[pos] == 'E' ||
                ((s[pos] == '+' || s[pos] == '-') && pos > start &&
                 (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
            ++pos;
        if (pos == start) fail("expected number");
        return std::stod(s.substr(start, pos - start));
    }

    int uint_val() {
        skip_ws();
        size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) fail("expected integer exponent");
        return std::stoi(s.substr(start, pos - start));
    }

    // factor -> monomial contribution: multiplies (coeff, xexp, texp)
    void factor(double& coeff, std::vector<int>& xexp, int& texp) {
        skip_ws();
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            coeff *= number();
            return;
        }
        int var_index = -1;  // -1 none, nvars => t
        if (c == 't') {
            ++pos;
            var_index = nvars;
        } else if (c == 'x') {
            ++pos;
            if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                int idx = uint_val();
                if (idx < 1 || idx > nvars) fail("variable index out of range");
                var_index = idx - 1;
            } else if (nvars == 1) {
                var_index = 0;
            } else {
                fail("plain 'x' only allowed when n = 1");
            }
        } else {
            fail("expected number or variable");
        }
        int e = 1;
        if (peek() == '^') {
            ++pos;
            e = uint_val();
        }
        if (var_index == nvars)
            texp += e;
        else
            xexp[var_index] += e;
    }

    void term(PolyExpr& out, int sign) {
        double coeff = sign;
        std::vector<int> xexp(nvars, 0);
        int texp = 0;
        factor(coeff, xexp, texp);
        while (peek() == '*') {
            ++pos;
            factor(coeff, xexp, texp);
        }
        out.add_term(coeff, std::move(xexp), texp);
    }

    PolyExpr run() {
        PolyExpr out(nvars);
        int sign = 1;
        if (peek() == '+') ++pos;
        else if (peek() == '-') {
            sign = -1;
            ++pos;
        }
        if (eof()) fail("empty polynomial");
        term(out, sign);
        while (!eof()) {
            char c = peek();
            if (c == '+') sign = 1;
            else if (c == '-') sign = -1;
            else fail("expected '+' or '-'");
            ++pos;
            term(out, sign);
        }
        return out;
    }
};

}  // namespace

PolyExpr PolyExpr::parse(const std::string& text, int nvars) {
    Parser p{text, 0, nvars};
    return p.run();
}

}  // namespace safehj
