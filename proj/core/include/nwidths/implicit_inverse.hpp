#pragma once

#include <functional>

#include "nwidths/slow_factor.hpp"

namespace nwidths {

/// Map u = log2 y to log2 psi(2^u); the shape inverted below is
/// G(u) = gamma* u + L(u) = log2 of y^{gamma*} psi(y).
using LogScaleFn = std::function<double(double)>;

struct LogInverseResult {
    double u = 0.0;         // log2 y(x)
    double log2_phi = 0.0;  // log2 of phi*(x) = y * x^{-beta*}
};

/// Solves y^{gamma*} psi*(y) = x in log2 coordinates: bracketed bisection
/// started from u = beta* log2 x, then a Newton polish.  The map is only
/// guaranteed monotone for large y, so the valid x-range starts at a
/// numerically determined threshold.
class LogScaleInverter {
public:
    LogScaleInverter(double gamma_star, LogScaleFn log2_psi);

    double gamma_star() const { return gamma_star_; }
    double beta_star() const { return 1.0 / gamma_star_; }
    /// Smallest admissible log2 x.
    double log2_x_threshold() const { return log2_x_threshold_; }

    LogInverseResult invert_log2(double log2_x) const;

private:
    double forward(double u) const { return gamma_star_ * u + log2_psi_(u); }

    double gamma_star_;
    LogScaleFn log2_psi_;
    double u_threshold_ = 0.0;
    double log2_x_threshold_ = 0.0;
};

/// The implicit inverse y(x) of y^{gamma*} psi*(y) = x, with
/// y(x) = x^{beta*} phi*(x), beta* = 1/gamma*.
class ImplicitInverse {
public:
    ImplicitInverse(double gamma_star, SlowFactor psi_star);

    double gamma_star() const { return inverter_.gamma_star(); }
    double beta_star() const { return inverter_.beta_star(); }
    const SlowFactor& psi_star() const { return psi_star_; }
    /// x0 of the existence lemma, found numerically (a power of 2).
    double x_threshold() const { return x_threshold_; }

    struct Result {
        double y = 0.0;
        double phi_star = 0.0;
    };

    /// Requires x >= x_threshold(); |y^{gamma*} psi*(y) - x| <= 1e-10 x.
    Result invert(double x) const;

    /// y^{gamma*} psi*(y).
    double forward(double y) const;

private:
    SlowFactor psi_star_;
    LogScaleInverter inverter_;
    double x_threshold_;
};

std::pair<double, double> invert_scale(const ImplicitInverse& inv, double x);

}  // namespace nwidths
