#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "safehj/system.hpp"

namespace safehj {

enum class CertMode { Eq3Static, Eq5, Eq7, Eq8 };

std::string to_string(CertMode m);
CertMode cert_mode_from_string(const std::string& s);

// Candidate barrier certificate v(x,t) with optional relaxation rate lambda.
struct Certificate {
    PolyExpr v{0};
    double lambda = 0.0;
    CertMode mode = CertMode::Eq5;

    void validate() const;  // static mode forbids t-dependence; lambda only in Eq8
    std::string serialize() const;
    static Certificate deserialize(const std::string& text, int nvars);
};

enum class CheckStatus { Valid, Invalid, Inconclusive };

std::string to_string(CheckStatus s);

// Which of the three condition systems a result refers to.
enum class CertCondition { InitialNegative, BoundaryNonneg, ValueDominates, LieNonpositive };

std::string to_string(CertCondition c);

struct Counterexample {
    std::vector<double> x;
    double t = 0.0;
    std::vector<double> d;
    CertCondition condition = CertCondition::InitialNegative;
    double violation = 0.0;  // direct-evaluation margin beyond the condition
};

struct ConditionResult {
    CertCondition condition;
    CheckStatus status = CheckStatus::Inconclusive;
    long boxes_processed = 0;
};

struct CheckReport {
    CheckStatus status = CheckStatus::Inconclusive;
    std::vector<ConditionResult> conditions;
    std::optional<Counterexample> counterexample;
    long boxes_processed = 0;
};

// Lie derivative Lv = dv/dt + grad_x v . (f1 + f2 d) for a fixed disturbance
// value, as a polynomial in (x,t).
PolyExpr lie_derivative(const SystemSpec& spec, const PolyExpr& v,
                        std::span<const double> d);

// One Lie polynomial per vertex of a box disturbance set.
std::vector<PolyExpr> lie_derivative_vertices(const SystemSpec& spec, const PolyExpr& v);

// Range enclosure of poly over an (x, t) box. Thin wrapper over PolyExpr::bound.
Interval interval_bound(const PolyExpr& poly, const Box& xbox, const Interval& tint);

// Branch-and-bound verification of the mode's condition system.
CheckReport check_certificate(const SystemSpec& spec, const Certificate& cert,
                              double tol = 1e-6, long max_boxes = 1'000'000);

// Numeric evaluators for the Remark's transform v'(x,t) = e^{-lambda t} v(x,t).
struct LambdaTransform {
    std::function<double(std::span<const double>, double)> value;
    // Lie derivative of v' at (x, t, d): e^{-lambda t} (Lv - lambda v).
    std::function<double(std::span<const double>, double, std::span<const double>)> lie;
};

LambdaTransform transform_lambda(const SystemSpec& spec, const Certificate& cert);

// Direct evaluation of the violated condition at a point; used to confirm
// counterexamples independently of the interval path.
double evaluate_violation(const SystemSpec& spec, const Certificate& cert,
                          const Counterexample& ce);

}  // namespace safehj
