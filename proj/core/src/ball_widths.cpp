#include "nwidths/ball_widths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
}  // namespace

std::string to_string(WidthKind kind) {
    switch (kind) {
        case WidthKind::kolmogorov: return "kolmogorov";
        case WidthKind::linear: return "linear";
        case WidthKind::gelfand: return "gelfand";
    }
    return "?";
}

WidthKind width_kind_from_string(const std::string& s) {
    if (s == "kolmogorov") return WidthKind::kolmogorov;
    if (s == "linear") return WidthKind::linear;
    if (s == "gelfand") return WidthKind::gelfand;
    throw std::invalid_argument("unknown width kind: " + s);
}

double dual_exponent(double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("dual_exponent: p must be >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

double hat_q(WidthKind kind, double p, double q) {
    switch (kind) {
        case WidthKind::kolmogorov: return q;
        case WidthKind::linear: return std::min(q, dual_exponent(p));
        case WidthKind::gelfand: return dual_exponent(p);
    }
    return q;
}

void DiagonalSpec::validate() const {
    if (c.empty()) throw std::invalid_argument("DiagonalSpec: c must be non-empty");
    for (size_t j = 0; j < c.size(); ++j) {
        if (!(c[j] > 0.0)) throw std::invalid_argument("DiagonalSpec: entries must be > 0");
        if (j > 0 && c[j] > c[j - 1] + 1e-15 * c[j - 1])
            throw std::invalid_argument("DiagonalSpec: c must be non-increasing");
    }
    if (!(p >= 1.0) || !(q >= 1.0)) throw std::invalid_argument("DiagonalSpec: p, q must be >= 1");
}

double diag_width(const DiagonalSpec& spec, int n) {
    spec.validate();
    const int nu = spec.nu();
    if (n < 0 || n > nu) throw std::invalid_argument("diag_width: need 0 <= n <= nu");
    if (spec.p < spec.q)
        throw regime_error("diag_width: exact formula requires p >= q; use order_phi");
    if (spec.p == spec.q) return n == nu ? 0.0 : spec.c[static_cast<size_t>(n)];
    // exponent pq/(p-q), analytic limit q as p -> inf
    const double e = std::isinf(spec.p) ? spec.q : spec.p * spec.q / (spec.p - spec.q);
    double s = 0.0;
    for (int j = nu - 1; j >= n; --j) s += std::pow(spec.c[static_cast<size_t>(j)], e);
    return std::pow(s, inv(spec.q) - inv(spec.p));
}

double order_phi(int n, int nu, double p, double q) {
    if (nu < 1) throw std::invalid_argument("order_phi: nu must be >= 1");
    if (n < 0 || n > nu) throw std::invalid_argument("order_phi: need 0 <= n <= nu");
    if (!(p > 1.0) || !(p < q) || !(q < kInf))
        throw std::domain_error("order_phi: requires 1 < p < q < inf");
    const double nv = static_cast<double>(nu);
    const double ratio_term = n == 0 ? kInf : std::pow(nv, 1.0 / q) / std::sqrt(static_cast<double>(n));
    if (p >= 2.0) {
        const double expo = (1.0 / p - 1.0 / q) / (0.5 - 1.0 / q);
        return std::min(1.0, std::pow(std::min(ratio_term, 1e300), expo));
    }
    const double small_ball = std::pow(nv, 1.0 / q - 1.0 / p);
    const double frac = 1.0 - static_cast<double>(n) / nv;
    if (q > 2.0) {
        return std::max(small_ball, std::min(1.0, ratio_term) * std::sqrt(frac));
    }
    // 1 < p < q <= 2
    const double expo = (1.0 / q - 1.0 / p) / (1.0 - 2.0 / p);
    return std::max(small_ball, std::pow(frac, expo));
}

double order_psi(int n, int nu, double p, double q) {
    const double pd = dual_exponent(p);
    if (q <= pd) return order_phi(n, nu, p, q);
    return order_phi(n, nu, dual_exponent(q), pd);
}

double ball_width_order(WidthKind kind, int n, int nu, double p, double q) {
    if (p >= q) {
        DiagonalSpec spec;
        spec.c.assign(static_cast<size_t>(nu), 1.0);
        spec.p = p;
        spec.q = q;
        return diag_width(spec, n);
    }
    switch (kind) {
        case WidthKind::kolmogorov: return order_phi(n, nu, p, q);
        case WidthKind::linear: return order_psi(n, nu, p, q);
        case WidthKind::gelfand: return order_phi(n, nu, dual_exponent(q), dual_exponent(p));
    }
    return 0.0;
}

}  // namespace nwidths
