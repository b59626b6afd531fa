#pragma once

#include <limits>
#include <string>
#include <vector>

namespace nwidths {

enum class WidthKind { kolmogorov, linear, gelfand };

std::string to_string(WidthKind kind);
WidthKind width_kind_from_string(const std::string& s);

/// p' = p/(p-1), with p=1 -> inf and p=inf -> 1.
double dual_exponent(double p);

/// Effective exponent per width kind: q (Kolmogorov), min{q, p'} (linear),
/// p' (Gelfand).
double hat_q(WidthKind kind, double p, double q);

/// Axes of the diagonal ball B_p^nu(c): c_1 >= ... >= c_nu > 0.
/// Exact widths exist for p >= q only.
struct DiagonalSpec {
    std::vector<double> c;
    double p = 2.0;
    double q = 2.0;

    void validate() const;
    int nu() const { return static_cast<int>(c.size()); }
};

/// Exact common value of the Kolmogorov/Gelfand/linear n-widths of
/// B_p^nu(c) in l_q^nu for p >= q:
///   (sum_{j>n} c_j^{pq/(p-q)})^{1/q-1/p}   for p > q,
///   c_{n+1}                                for p = q (0 at n = nu).
/// p = inf is the analytic limit (exponent -> q).  Throws regime_error
/// for p < q: only order functions exist there (order_phi).
double diag_width(const DiagonalSpec& spec, int n);

/// Order function Phi(n, nu, p, q) of the three-branch theorem for
/// 1 < p < q < inf, value in (0, 1], implied constant 1.  n = 0 treats
/// n^{-1/2} as +inf so the min picks 1.
double order_phi(int n, int nu, double p, double q);

/// Psi(n, nu, p, q) = Phi(n, nu, p, q) if q <= p', else Phi(n, nu, q', p').
double order_psi(int n, int nu, double p, double q);

/// Order of vartheta_n(B_p^nu, l_q^nu) for the requested width kind:
/// exact value for p >= q, Gluskin order function for p < q.
double ball_width_order(WidthKind kind, int n, int nu, double p, double q);

}  // namespace nwidths
