#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nwidths {

/// A slowly varying scale factor: positive on (0, inf), with
/// y*f'(y)/f(y) -> 0 along y = 2^k.  Closed under product, reciprocal
/// and the reflection y -> 1/y, which is all the calculus downstream
/// needs (h(t) = t^theta * Lambda(t), psi_Lambda(y) = 1/Lambda(1/y), ...).
///
/// All evaluation happens in log2 coordinates so that arguments like
/// y = 2^1000 stay representable.  Logs are base 2 throughout; factors
/// that conceptually use a natural log carry the ln(2) conversion as an
/// explicit constant factor.
class SlowFactor {
public:
    enum class Kind { constant, power_of_log, product, user_table };

    SlowFactor();  // constant 1

    static SlowFactor constant(double value);
    /// f(y) = max(|log2 y|, 1)^exponent.  The clamp at 1 keeps the factor
    /// positive near y = 1; it is inactive on the dyadic rays y = 2^k, k >= 1.
    static SlowFactor power_of_log(double exponent);
    static SlowFactor product(std::vector<SlowFactor> factors);
    /// Piecewise-linear table of log2 f against log2 y, constant outside
    /// the sampled range.
    static SlowFactor user_table(std::vector<double> log2_y, std::vector<double> log2_value);

    Kind kind() const { return kind_; }

    /// f(y), y > 0.
    double operator()(double y) const;
    /// log2 f(2^u).
    double log2_eval(double u) const;

    /// 1/f as a SlowFactor (kinds are closed under reciprocal).
    SlowFactor reciprocal() const;
    /// y |-> f(1/y) as a SlowFactor.
    SlowFactor reflected() const;

    /// d(log2 f)/d(log2 y) at u = log2 y, by central differences.  Equals
    /// y f'(y)/f(y); slow variation means this tends to 0 as u -> inf.
    double derivative_ratio(double u) const;

    double constant_value() const { return value_; }
    double exponent() const { return value_; }
    const std::vector<SlowFactor>& factors() const { return factors_; }
    const std::vector<double>& table_log2_y() const { return table_x_; }
    const std::vector<double>& table_log2_value() const { return table_v_; }

    std::string describe() const;

private:
    Kind kind_ = Kind::constant;
    double value_ = 1.0;  // constant value or log exponent
    std::vector<SlowFactor> factors_;
    std::vector<double> table_x_, table_v_;
};

/// h(t) = t^theta * Lambda(t) on (0, 1].  Throws std::domain_error for t <= 0.
double eval_h(double theta, const SlowFactor& lam, double t);

/// log2 h(2^u) = theta*u + log2 Lambda(2^u); safe for very small scales.
double log2_eval_h(double theta, const SlowFactor& lam, double u);

/// Empirical two-sided slow-variation check against Lemma-style bounds
/// t^{-eps} <~ f(t y)/f(y) <~ t^{eps} for expansion factors t = 2^i >= 1.
/// c_upper / c_lower are the smallest constants making the two bounds hold
/// over the sample; a factor is flagged when either exceeds the budget.
struct SlowVariationReport {
    double epsilon = 0.0;
    int k_max = 0;
    double c_upper = 1.0;       // smallest C with f(ty)/f(y) <= C t^eps
    double c_lower = 1.0;       // smallest C with f(ty)/f(y) >= (1/C) t^-eps
    double worst_t = 1.0;
    double worst_y = 1.0;
    double budget = 8.0;
    bool violated = false;
};

SlowVariationReport check_slow_variation(const SlowFactor& f, double epsilon, int k_max,
                                         double budget = 8.0);

}  // namespace nwidths
