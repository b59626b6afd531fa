#include "nwidths/implicit_inverse.hpp"

#include <cmath>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

namespace {

double diff_quotient(const std::function<double(double)>& f, double u, double h) {
    return (f(u + h) - f(u - h)) / (2.0 * h);
}

}  // namespace

LogScaleInverter::LogScaleInverter(double gamma_star, LogScaleFn log2_psi)
    : gamma_star_(gamma_star), log2_psi_(std::move(log2_psi)) {
    if (!(gamma_star_ > 0.0))
        throw std::invalid_argument("LogScaleInverter: gamma_star must be > 0");
    // Smallest integer u0 >= 0 such that the finite-difference slope of
    // G(u) = gamma* u + L(u) stays safely positive on [u0, u0 + 64].
    auto G = [this](double u) { return forward(u); };
    const double floor_slope = gamma_star_ / 4.0;
    int u0 = 0;
    for (; u0 <= 200; ++u0) {
        bool ok = true;
        for (double u = u0; u <= u0 + 64.0; u += 0.25) {
            if (diff_quotient(G, u, 0.125) <= floor_slope) {
                ok = false;
                break;
            }
        }
        if (ok) break;
    }
    if (u0 > 200)
        throw numeric_error("LogScaleInverter: could not find a monotone range; psi* does not look slowly varying");
    u_threshold_ = static_cast<double>(u0);
    log2_x_threshold_ = std::ceil(forward(u_threshold_));
}

LogInverseResult LogScaleInverter::invert_log2(double log2_x) const {
    if (log2_x < log2_x_threshold_)
        throw std::domain_error("LogScaleInverter: x below the monotonicity threshold");
    const double target = log2_x;
    // Bracket grown geometrically around the pure power-law guess.
    double lo = std::max(u_threshold_, beta_star() * log2_x - 1.0);
    double hi = lo + 2.0;
    double step = 1.0;
    int guard = 0;
    while (forward(lo) > target && lo > u_threshold_) {
        lo = std::max(u_threshold_, lo - step);
        step *= 2.0;
        if (++guard > 200) throw numeric_error("invert: bracket search failed (low side)");
    }
    step = 1.0;
    guard = 0;
    while (forward(hi) < target) {
        hi += step;
        step *= 2.0;
        if (++guard > 200) throw numeric_error("invert: bracket search failed (high side)");
    }
    if (forward(lo) > target) {
        // the threshold itself solves it as closely as monotonicity allows
        if (forward(u_threshold_) > target + 1e-9)
            throw numeric_error("invert: target below the monotone range");
        lo = u_threshold_;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (forward(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    double u = 0.5 * (lo + hi);
    // Newton polish with a numeric slope.
    for (int it = 0; it < 3; ++it) {
        const double g = forward(u) - target;
        const double slope = diff_quotient([this](double v) { return forward(v); }, u, 1e-6);
        if (slope <= 0.0) break;
        const double nu = u - g / slope;
        if (nu >= lo - 1.0 && nu <= hi + 1.0) u = nu;
    }
    LogInverseResult res;
    res.u = u;
    res.log2_phi = u - beta_star() * log2_x;
    return res;
}

ImplicitInverse::ImplicitInverse(double gamma_star, SlowFactor psi_star)
    : psi_star_(std::move(psi_star)),
      inverter_(gamma_star, [this](double u) { return psi_star_.log2_eval(u); }),
      x_threshold_(std::exp2(inverter_.log2_x_threshold())) {}

ImplicitInverse::Result ImplicitInverse::invert(double x) const {
    if (!(x >= x_threshold_)) throw std::domain_error("ImplicitInverse::invert: x below x_threshold");
    const auto r = inverter_.invert_log2(std::log2(x));
    return Result{std::exp2(r.u), std::exp2(r.log2_phi)};
}

double ImplicitInverse::forward(double y) const {
    if (!(y > 0.0)) throw std::domain_error("ImplicitInverse::forward: y must be > 0");
    const double u = std::log2(y);
    return std::exp2(gamma_star() * u + psi_star_.log2_eval(u));
}

std::pair<double, double> invert_scale(const ImplicitInverse& inv, double x) {
    const auto r = inv.invert(x);
    return {r.y, r.phi_star};
}

}  // namespace nwidths
