#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nwidths/ball_widths.hpp"
#include "nwidths/slow_factor.hpp"

namespace nwidths {

/// Parameter regime of the weighted Sobolev width theorem.  The scale
/// functions are parametrized in their log-power form
///   Lambda(t) = |log t|^gamma tau(|log t|),
///   Psi_g(t)  = |log t|^{-alpha_g} rho_g(|log t|),  likewise Psi_v,
/// which covers both the subcritical case a and the critical case b.
struct RegimeParams {
    double p = 2.0, q = 2.0;
    int r = 1, d = 1;
    double theta = 0.0;
    double beta_g = 0.0, beta_v = 0.0;
    double alpha_g = 0.0, alpha_v = 0.0;
    double gamma = 0.0;
    WidthKind kind = WidthKind::kolmogorov;
    SlowFactor tau = SlowFactor::constant(1.0);
    SlowFactor rho_g = SlowFactor::constant(1.0);
    SlowFactor rho_v = SlowFactor::constant(1.0);

    double delta() const;
    double beta() const { return beta_g + beta_v; }
    double alpha() const { return alpha_g + alpha_v; }
    /// (1/q - 1/p)_+
    double gap() const;
    double q_hat() const { return hat_q(kind, p, q); }
    /// true = case b (critical coupling beta = delta - theta gap)
    bool critical_case() const;
};

struct SigmaDescriptor {
    std::string label;
    std::function<double(double)> eval;
};

struct ConditionCheck {
    std::string name;
    bool satisfied = false;
    std::string detail;
};

/// Exponent table for one regime: the active theta_j list, sigma_j
/// descriptors (evaluable closures), the selected index, and validity flags.
struct ExponentReport {
    std::string case_label;
    std::vector<double> theta;          // theta_1.. in printed order
    std::vector<SigmaDescriptor> sigma;
    int j_star = 0;                     // 1-based; 0 when no power rate applies
    bool degenerate = false;            // strict-minimum hypothesis failed
    bool log_rate = false;              // pure (log n)^... rate
    bool geometric = false;             // faster than any power (theta=0, kappa>0)
    std::function<double(double)> rate; // n -> predicted rate (empty if geometric)
    std::vector<ConditionCheck> validity;

    double selected_theta() const { return j_star >= 1 ? theta[static_cast<size_t>(j_star - 1)] : 0.0; }
    double sigma_at(double n) const;
    std::string serialize() const;
};

/// Exponent table of the weighted Sobolev theorem (all four cases).
/// Violated regime invariants raise regime_error naming the inequality.
ExponentReport sobolev_exponent(const RegimeParams& params);

struct CubeExponent {
    double theta = 0.0;
    bool degenerate = false;
};

/// theta_{p,q,r,d} of the unweighted cube theorem; requires 1 < p <= inf,
/// 1 <= q < inf, delta = r + d/q - d/p > 0.
CubeExponent cube_exponent(double p, double q, int r, int d, WidthKind kind);

/// Regime of the summation operator S_{u,w} on an h-regular tree.
struct TreeRegime {
    double p = 2.0, q = 2.0;
    double kappa = 1.0;
    double theta = 1.0;
    double gamma = 0.0;  // Lambda(t) = |log t|^gamma tau(|log t|)
    double alpha = 0.0;  // Psi(t) = |log t|^{-alpha} rho(|log t|)
    WidthKind kind = WidthKind::kolmogorov;
    SlowFactor lambda = SlowFactor::constant(1.0);  // Lambda as a function of t
    SlowFactor psi = SlowFactor::constant(1.0);     // Psi = Psi_g Psi_v as a function of t
    SlowFactor rho = SlowFactor::constant(1.0);     // rho_g rho_v
    SlowFactor tau = SlowFactor::constant(1.0);

    double gap() const;
    double q_hat() const { return hat_q(kind, p, q); }
};

/// Exponent report of the final summation-operator theorem: strict
/// (kappa > -theta gap), critical (equality), and theta = 0 cases; the
/// theta = 0, kappa > 0 regime returns the geometric-decay flag.
ExponentReport tree_exponent(const TreeRegime& regime);

/// The metric-tree width theorem's table: d = 1, r = 1 forced, and theta_2
/// excluded from the q_hat > 2 selection (it is never the minimum there).
ExponentReport metric_tree_exponent(RegimeParams params);

}  // namespace nwidths
