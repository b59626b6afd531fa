#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "nwidths/errors.hpp"
#include "nwidths/hardy_tree.hpp"
#include "nwidths/tree.hpp"

using namespace nwidths;

namespace {
constexpr double kPi = 3.14159265358979323846;

RootedTree path_tree(int n) {
    std::vector<Vertex> parent(static_cast<size_t>(n));
    parent[0] = kNoVertex;
    for (int v = 1; v < n; ++v) parent[static_cast<size_t>(v)] = v - 1;
    return RootedTree::from_parents(std::move(parent));
}

WeightedTreeOperator unit_op(RootedTree tree) {
    const size_t n = static_cast<size_t>(tree.vertex_count());
    return WeightedTreeOperator::from_values(std::move(tree), std::vector<double>(n, 1.0),
                                             std::vector<double>(n, 1.0));
}

WeightedTreeOperator binary_h_op(int depth, double kappa_u, double kappa_w) {
    HTreeSpec spec;
    spec.theta = 1.0;
    spec.depth = depth;
    WeightLaw law;
    law.kappa_u = kappa_u;
    law.kappa_w = kappa_w;
    return WeightedTreeOperator::from_law(generate_h_tree(spec), law);
}
}  // namespace

TEST_CASE("assemble_matrix on small trees") {
    SUBCASE("path of 3, unit weights: lower-triangular ones") {
        const auto M = assemble_matrix(unit_op(path_tree(3)));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(M(i, j) == doctest::Approx(j <= i ? 1.0 : 0.0));
    }
    SUBCASE("star root + 2 leaves") {
        const auto M = assemble_matrix(unit_op(RootedTree::from_parents({kNoVertex, 0, 0})));
        CHECK(M(0, 0) == 1.0);
        CHECK(M(1, 0) == 1.0);
        CHECK(M(1, 1) == 1.0);
        CHECK(M(1, 2) == 0.0);
        CHECK(M(2, 0) == 1.0);
        CHECK(M(2, 1) == 0.0);
        CHECK(M(2, 2) == 1.0);
    }
    SUBCASE("path of 3 with u=(1,2,3) by level, w=1") {
        auto op = WeightedTreeOperator::from_values(path_tree(3), {1, 2, 3}, {1, 1, 1});
        const auto M = assemble_matrix(op);
        CHECK(M(0, 0) == 1.0);
        CHECK(M(1, 0) == 1.0);
        CHECK(M(1, 1) == 2.0);
        CHECK(M(2, 0) == 1.0);
        CHECK(M(2, 1) == 2.0);
        CHECK(M(2, 2) == 3.0);
    }
    SUBCASE("dense cap raises capacity_error") {
        CHECK_THROWS_AS(assemble_matrix(unit_op(path_tree(64)), 32), capacity_error);
    }
}

TEST_CASE("matrix-free apply agrees with the assembled matrix") {
    HTreeSpec spec;
    spec.theta = 0.8;
    spec.depth = 7;
    spec.seed = 4;
    WeightLaw law;
    law.kappa_u = 0.3;
    law.kappa_w = 0.4;
    law.psi_g = SlowFactor::power_of_log(0.5);
    auto op = WeightedTreeOperator::from_law(generate_h_tree(spec), law);
    const int n = op.tree().vertex_count();
    const auto M = assemble_matrix(op);
    std::mt19937_64 rng(1);
    std::vector<double> f(static_cast<size_t>(n)), out;
    for (auto& x : f) x = static_cast<double>(rng() % 200) / 100.0 - 1.0;
    op.apply(f, out);
    Eigen::Map<const Eigen::VectorXd> fv(f.data(), n);
    Eigen::VectorXd ref = M * fv;
    for (int i = 0; i < n; ++i) CHECK(out[static_cast<size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-12));
    op.apply_adjoint(f, out);
    ref = M.transpose() * fv;
    for (int i = 0; i < n; ++i) CHECK(out[static_cast<size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-12));
}

TEST_CASE("hardy_constant") {
    WeightLaw law;
    law.kappa_u = 0.5;
    law.kappa_w = 0.5;  // kappa = 1: C(j0) = 2^{-kappa m* j0}
    law.m_star = 1;
    CHECK(hardy_constant(law, 2.0, 2.0, 2, 1.0) == doctest::Approx(0.25));
    CHECK(hardy_constant(law, 2.0, 2.0, 0, 1.0) == doctest::Approx(1.0));
    law.kappa_u = 0.25;
    law.kappa_w = 0.25;
    CHECK(hardy_constant(law, 2.0, 2.0, 2, 1.0) == doctest::Approx(0.5));
    SUBCASE("critical coupling (p=q, kappa=0): C(4) = 1/4 for alpha=1, rho=1") {
        WeightLaw crit_law;
        crit_law.kappa_u = 0.0;
        crit_law.kappa_w = 0.0;
        CriticalFactors cf;
        cf.alpha_g = 0.5;
        cf.alpha_v = 0.5;
        cf.gamma = -1.0;
        CHECK(hardy_constant(crit_law, 2.0, 2.0, 4, 1.0, cf) == doctest::Approx(0.25));
        CHECK_THROWS_AS(hardy_constant(crit_law, 2.0, 2.0, 4, 1.0), std::domain_error);
    }
    SUBCASE("kappa below the threshold") {
        WeightLaw bad;
        bad.kappa_u = -1.0;
        bad.kappa_w = 0.25;
        CHECK_THROWS_AS(hardy_constant(bad, 2.0, 1.0, 1, 1.0), std::domain_error);
    }
}

TEST_CASE("operator_norm_corner") {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
    CHECK(operator_norm_corner(I, 2.0, 2.0) == doctest::Approx(1.0));
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) L(i, j) = 1.0;
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(operator_norm_corner(L, 1.0, inf) == doctest::Approx(1.0));
    CHECK(operator_norm_corner(L, 2.0, 2.0) == doctest::Approx(1.0 / (2.0 * std::sin(kPi / 14.0))));
    CHECK(operator_norm_corner(L, 1.0, 2.0) == doctest::Approx(std::sqrt(3.0)));
    CHECK_THROWS_AS(operator_norm_corner(L, 1.5, 2.0), unsupported_corner_error);
}

TEST_CASE("linear_widths_l2") {
    SUBCASE("diagonal matrix") {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
        D(0, 0) = 3;
        D(1, 1) = 2;
        D(2, 2) = 1;
        const auto sv = linear_widths_l2(D);
        CHECK(sv[0] == doctest::Approx(3.0));
        CHECK(sv[1] == doctest::Approx(2.0));
        CHECK(sv[2] == doctest::Approx(1.0));
    }
    SUBCASE("zero matrix") {
        const auto sv = linear_widths_l2(Eigen::MatrixXd::Zero(3, 3));
        for (double s : sv) CHECK(s == doctest::Approx(0.0));
    }
    SUBCASE("prefix-sum matrix has the closed-form spectrum") {
        const auto M = assemble_matrix(unit_op(path_tree(3)));
        const auto sv = linear_widths_l2(M);
        for (int k = 1; k <= 3; ++k)
            CHECK(sv[static_cast<size_t>(k - 1)] ==
                  doctest::Approx(1.0 / (2.0 * std::sin((2 * k - 1) * kPi / 14.0))).epsilon(1e-10));
    }
}

TEST_CASE("power iteration matches the SVD on a mid-size instance") {
    auto op = binary_h_op(6, 0.5, 0.5);
    const auto sv = linear_widths_l2(assemble_matrix(op));
    CHECK(operator_norm_l2(op) == doctest::Approx(sv[0]).epsilon(1e-8));
    CHECK(operator_norm_corner(assemble_matrix(op), 2.0, 2.0) == doctest::Approx(sv[0]).epsilon(1e-10));
}

TEST_CASE("singular values are invariant under order-preserving relabeling") {
    HTreeSpec spec;
    spec.theta = 1.0;
    spec.depth = 5;
    auto tree = generate_h_tree(spec);
    WeightLaw law;
    law.kappa_u = 0.5;
    law.kappa_w = 0.5;
    auto op = WeightedTreeOperator::from_law(tree, law);

    // relabel: reverse the order of children at every vertex, then re-BFS
    std::vector<Vertex> new_of_old(static_cast<size_t>(tree.vertex_count()), -1);
    std::vector<Vertex> order{tree.root()};
    new_of_old[static_cast<size_t>(tree.root())] = 0;
    std::vector<Vertex> queue{tree.root()};
    size_t head = 0;
    int next_id = 1;
    while (head < queue.size()) {
        Vertex v = queue[head++];
        auto ch = tree.children(v);
        std::reverse(ch.begin(), ch.end());
        for (Vertex c : ch) {
            new_of_old[static_cast<size_t>(c)] = next_id++;
            queue.push_back(c);
        }
    }
    std::vector<Vertex> parent(static_cast<size_t>(tree.vertex_count()));
    std::vector<double> u(parent.size()), w(parent.size());
    for (Vertex v = 0; v < tree.vertex_count(); ++v) {
        const Vertex nv = new_of_old[static_cast<size_t>(v)];
        parent[static_cast<size_t>(nv)] =
            v == tree.root() ? kNoVertex : new_of_old[static_cast<size_t>(tree.parent(v))];
        u[static_cast<size_t>(nv)] = op.u(v);
        w[static_cast<size_t>(nv)] = op.w(v);
    }
    auto op2 = WeightedTreeOperator::from_values(RootedTree::from_parents(std::move(parent)),
                                                 std::move(u), std::move(w));
    const auto sv1 = linear_widths_l2(assemble_matrix(op));
    const auto sv2 = linear_widths_l2(assemble_matrix(op2));
    REQUIRE(sv1.size() == sv2.size());
    for (size_t i = 0; i < sv1.size(); ++i)
        CHECK(sv1[i] == doctest::Approx(sv2[i]).epsilon(1e-11));
}

TEST_CASE("make_budget_plan layer cut") {
    BudgetConfig cfg;
    cfg.n_min = 4;
    BudgetParams params;  // k*=1, gamma*=1, psi*=1, discrete
    CHECK(make_budget_plan(8, params, cfg).t_star == 3);
    CHECK(make_budget_plan(9, params, cfg).t_star == 4);
    SUBCASE("psi* = ln y: enumeration oracle") {
        BudgetParams p2;
        p2.psi_star = SlowFactor::product(
            {SlowFactor::constant(std::log(2.0)), SlowFactor::power_of_log(1.0)});
        const auto plan = make_budget_plan(100, p2, cfg);
        int expected = 0;
        for (int t = 1; t <= 8; ++t) {
            if (std::exp2(t) * std::log(std::exp2(t)) >= 100.0) {
                expected = t;
                break;
            }
        }
        CHECK(expected == 5);
        CHECK(plan.t_star == expected);
    }
    SUBCASE("n below the configured minimum") {
        CHECK_THROWS_AS(make_budget_plan(8, params), std::domain_error);
    }
}

TEST_CASE("budget plan rank ledger grows linearly") {
    BudgetParams params;
    params.k_star = 1;
    params.gamma_star = 1.0;
    params.lambda_star = 1.0;
    params.beta_star = 1.0;
    for (double n : {64.0, 128.0, 256.0, 512.0}) {
        const auto a = make_budget_plan(n, params);
        const auto b = make_budget_plan(2 * n, params);
        const double ratio = static_cast<double>(b.rank_total) / static_cast<double>(a.rank_total);
        CHECK(ratio >= 1.5);
        CHECK(ratio <= 3.0);
        CHECK(static_cast<double>(a.rank_total) <= 8.0 * n);
    }
}

TEST_CASE("discrete_upper_scheme") {
    SUBCASE("full budget reproduces S exactly") {
        auto op = unit_op(path_tree(7));
        const auto res = discrete_upper_scheme(op, 2.0, 2.0, 7);
        CHECK(res.achieved_error == doctest::Approx(0.0));
        CHECK(res.rank <= 7);
        CHECK(res.error_is_exact);
    }
    SUBCASE("rank-1 budget is dominated by sigma_2") {
        auto op = unit_op(path_tree(7));
        const auto sv = linear_widths_l2(assemble_matrix(op));
        const auto res = discrete_upper_scheme(op, 2.0, 2.0, 1);
        CHECK(res.rank == 1);
        CHECK(res.achieved_error >= sv[1] - 1e-12);
    }
    SUBCASE("binary depth-8 instance stays within 10x the predicted value") {
        auto op = binary_h_op(8, 0.5, 0.5);
        const auto res = discrete_upper_scheme(op, 2.0, 2.0, 16);
        CHECK(res.error_is_exact);
        CHECK(res.achieved_error <= 10.0 * (1.0 / 16.0));
        const auto sv = linear_widths_l2(assemble_matrix(op));
        CHECK(res.achieved_error >= sv[16] - 1e-12);  // rank <= 16 dominates width(16)
    }
    SUBCASE("invalid budget") {
        auto op = unit_op(path_tree(3));
        CHECK_THROWS_AS(discrete_upper_scheme(op, 2.0, 2.0, 0), std::domain_error);
    }
}

TEST_CASE("lower_bound_disjoint") {
    SUBCASE("p=q with 2n equal parts gives exactly M") {
        // root with 4 leaf children: level 1 has 4 singleton subtrees, M_j = 1
        auto op = unit_op(RootedTree::from_parents({kNoVertex, 0, 0, 0, 0}));
        const auto res = lower_bound_disjoint(op, 2.0, 2.0, WidthKind::linear, 2);
        CHECK(res.feasible);
        CHECK(res.value == doctest::Approx(1.0));
    }
    SUBCASE("p=2, q=1 with equal parts gives M sqrt(n)") {
        std::vector<Vertex> parent{kNoVertex};
        for (int i = 0; i < 8; ++i) parent.push_back(0);
        auto op = unit_op(RootedTree::from_parents(std::move(parent)));
        const auto res = lower_bound_disjoint(op, 2.0, 1.0, WidthKind::kolmogorov, 4);
        CHECK(res.value >= std::sqrt(4.0) - 1e-9);
    }
    SUBCASE("never exceeds the true l2 width") {
        auto op = binary_h_op(7, 0.5, 0.5);
        const auto sv = linear_widths_l2(assemble_matrix(op));
        for (int n : {1, 2, 4, 8, 16, 32}) {
            const auto res = lower_bound_disjoint(op, 2.0, 2.0, WidthKind::linear, n);
            CHECK(res.value <= sv[static_cast<size_t>(n)] * (1.0 + 1e-9));
        }
    }
    SUBCASE("infeasible when no layer is wide enough") {
        auto op = unit_op(path_tree(5));
        const auto res = lower_bound_disjoint(op, 2.0, 2.0, WidthKind::linear, 3);
        CHECK_FALSE(res.feasible);
        CHECK(res.value == 0.0);
    }
}

TEST_CASE("operator file round trip") {
    auto op = binary_h_op(4, 0.3, 0.7);
    std::ostringstream first;
    write_operator(first, op);
    std::istringstream in(first.str());
    auto op2 = read_operator(in);
    std::ostringstream second;
    write_operator(second, op2);
    CHECK(first.str() == second.str());
    CHECK(op2.tree().vertex_count() == op.tree().vertex_count());
}
