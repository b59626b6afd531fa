#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nwidths/ball_widths.hpp"
#include "nwidths/implicit_inverse.hpp"
#include "nwidths/slow_factor.hpp"
#include "nwidths/tree.hpp"

namespace nwidths {

/// Level-indexed weight pair u_j = 2^{-kappa_u m* j} Psi_g(2^{-m* j}),
/// w_j = 2^{-kappa_w m* j} Psi_v(2^{-m* j}).
struct WeightLaw {
    double kappa_u = 0.0;
    double kappa_w = 0.0;
    int m_star = 1;
    SlowFactor psi_g = SlowFactor::constant(1.0);
    SlowFactor psi_v = SlowFactor::constant(1.0);

    double kappa() const { return kappa_u + kappa_w; }
    double u_at(int level) const;
    double w_at(int level) const;
};

/// How vertices are grouped into the scheme's layers: one layer per level
/// (theta > 0), or dyadic level blocks 2^t <= j < 2^{t+1} (theta = 0).
enum class LayerScheme { per_level, dyadic_levels };

/// The two-weighted summation operator S_{u,w} f(xi) = w(xi) sum_{xi' <= xi}
/// u(xi') f(xi') on a rooted tree, plus the layer structure used by the
/// budget scheme.  Matrix-free applications run in O(V) via prefix sums.
class WeightedTreeOperator {
public:
    static WeightedTreeOperator from_law(RootedTree tree, const WeightLaw& law,
                                         LayerScheme scheme = LayerScheme::per_level);
    static WeightedTreeOperator from_values(RootedTree tree, std::vector<double> u,
                                            std::vector<double> w,
                                            LayerScheme scheme = LayerScheme::per_level);

    const RootedTree& tree() const { return tree_; }
    double u(Vertex v) const { return u_[static_cast<size_t>(v)]; }
    double w(Vertex v) const { return w_[static_cast<size_t>(v)]; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& w() const { return w_; }
    int layer_of(Vertex v) const { return layer_[static_cast<size_t>(v)]; }
    int layer_count() const { return layer_count_; }
    const std::optional<WeightLaw>& law() const { return law_; }

    /// out = S f (prefix sums down the tree).
    void apply(const std::vector<double>& f, std::vector<double>& out) const;
    /// out = S^T g (subtree sums up the tree).
    void apply_adjoint(const std::vector<double>& g, std::vector<double>& out) const;

private:
    RootedTree tree_;
    std::vector<double> u_, w_;
    std::vector<int> layer_;
    int layer_count_ = 0;
    std::optional<WeightLaw> law_;
};

/// Dense matrix M[xi, xi'] = w(xi) u(xi') for xi' <= xi; lower-triangular
/// in breadth-first ids.  Throws capacity_error beyond `dense_limit` rows.
Eigen::MatrixXd assemble_matrix(const WeightedTreeOperator& op, int dense_limit = 8192);

/// Slow factors entering the critical-coupling Hardy constant.
struct CriticalFactors {
    double alpha_g = 0.0;
    double alpha_v = 0.0;
    double gamma = 0.0;
    SlowFactor rho_g = SlowFactor::constant(1.0);
    SlowFactor rho_v = SlowFactor::constant(1.0);
    SlowFactor tau = SlowFactor::constant(1.0);

    double alpha() const { return alpha_g + alpha_v; }
};

/// Hardy constant C(j0) of the two-weight summation inequality on the
/// subtree rooted at level j0:
///   kappa >  -theta (1/q - 1/p)_+ :  2^{-kappa m* j0} Psi(2^{-m* j0})
///   kappa == -theta (1/q - 1/p)_+ :  2^{-m* theta (1/q-1/p)_+ j0}
///                                    j0^{-alpha + (1/q-1/p)_+} rho(j0)
/// The critical case needs the factor data and alpha > (1-gamma)(1/q-1/p)_+.
double hardy_constant(const WeightLaw& law, double p, double q, int j0, double theta,
                      const std::optional<CriticalFactors>& critical = {});

/// Exact operator norm l_p -> l_q at the computable corners:
/// p=q=2 (largest singular value), p=1 (max column l_q norm),
/// q=inf (max row l_p' norm).  Other pairs raise unsupported_corner_error.
double operator_norm_corner(const Eigen::MatrixXd& M, double p, double q);

/// ||S||_{2->2} by power iteration on the matrix-free operator; handles
/// instances beyond the dense cap.
double operator_norm_l2(const WeightedTreeOperator& op);

/// All singular values, non-increasing; entry n is the linear width
/// lambda_n(S(B_2), l_2) = d_n(S(B_2), l_2).
std::vector<double> linear_widths_l2(const Eigen::MatrixXd& M);

/// Inputs of the abstract budget allocation.
struct BudgetParams {
    int k_star = 1;
    double gamma_star = 1.0;
    SlowFactor psi_star = SlowFactor::constant(1.0);
    double delta_star = std::numeric_limits<double>::infinity();  // +inf = discrete case
    double lambda_star = 1.0;
    double beta_star = 1.0;  // 1/gamma_star
};

struct BudgetConfig {
    int n_min = 16;
    double epsilon0 = 0.25;  // damping exponent used in the discrete case
    int t_max = 1 << 20;
};

/// Per-layer allocation of the approximation scheme.
struct BudgetPlan {
    int t_star = 0;                    // layer cut: min{t : nu_bar_t >= n}
    int t_hat = 0;                     // anchor layer of the damping term
    double epsilon = 0.0;
    std::vector<long long> n_t;        // cells per layer, t = 1..t_star (index t-1)
    std::vector<int> m_t_star;         // depth offsets per layer
    long long rank_total = 0;          // sum of layer allocations
};

/// t_star = min{t: 2^{k* g* t} psi*(2^{k* t}) >= n}; t_hat and epsilon per
/// the proof's choice; n_t and m_t* by their ceiling formulas.
BudgetPlan make_budget_plan(double n, const BudgetParams& params, const BudgetConfig& config = {});

struct UpperSchemeResult {
    int cut_layer = -1;          // layers <= cut reproduced exactly
    long long rank = 0;          // rank actually used (<= budget)
    double achieved_error = 0.0;
    bool error_is_exact = false; // exact corner norm vs theoretical bound
    int tail_parts = 0;
};

/// Layered approximant: layers <= cut reproduce S exactly; deeper layers get
/// the rank-1 root-matching projection span{w|_E} per tail subtree part, so
/// the residual on a part rooted at xi_hat is exactly
/// w(xi) sum_{xi_hat < xi' <= xi} u(xi') f(xi').  The cut is the largest one
/// whose total rank fits the budget, which makes the achieved error a true
/// upper bound for the width at index `budget`.
UpperSchemeResult discrete_upper_scheme(const WeightedTreeOperator& op, double p, double q,
                                        long long budget, int dense_limit = 8192);

struct LowerBoundResult {
    double value = 0.0;
    int layer = -1;      // layer whose disjoint subtrees realized the bound
    int parts_used = 0;
    bool feasible = false;
};

/// Disjoint-subtree lower bound: unit coordinate bumps at the roots of the
/// level-k subtrees give M_j = u(root_j) ||w||_{l_q(subtree_j)}; the bound is
/// M_min * vartheta_n(B_p^m, l_q^m) (common-M form) or, for p > q, the
/// diagonal tail sum over the sorted M_j.  Scans all feasible layers and
/// returns the best bound.
LowerBoundResult lower_bound_disjoint(const WeightedTreeOperator& op, double p, double q,
                                      WidthKind kind, int n);

/// Operator file: breadth-first lines "id parent_id u w".
void write_operator(std::ostream& os, const WeightedTreeOperator& op);
WeightedTreeOperator read_operator(std::istream& is);
void write_operator_file(const std::string& path, const WeightedTreeOperator& op);
WeightedTreeOperator read_operator_file(const std::string& path);

}  // namespace nwidths
