#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nwidths/tree.hpp"
#include "nwidths/tree_partition.hpp"

using namespace nwidths;

namespace {

RootedTree path_tree(int n) {
    std::vector<Vertex> parent(static_cast<size_t>(n));
    parent[0] = kNoVertex;
    for (int v = 1; v < n; ++v) parent[static_cast<size_t>(v)] = v - 1;
    return RootedTree::from_parents(std::move(parent));
}

RootedTree random_tree(std::mt19937_64& rng, int n, int k) {
    std::vector<Vertex> parent{kNoVertex};
    std::vector<int> child_count{0};
    for (Vertex v = 1; v < n; ++v) {
        // attach to a recent vertex with spare capacity to keep depth varied
        Vertex p;
        do {
            p = static_cast<Vertex>(rng() % static_cast<std::uint64_t>(v));
        } while (child_count[static_cast<size_t>(p)] >= k);
        parent.push_back(p);
        child_count[static_cast<size_t>(p)]++;
        child_count.push_back(0);
    }
    return RootedTree::from_parents(std::move(parent));
}

VertexCost unit_cost(const RootedTree& t) {
    VertexCost c;
    c.weight.assign(static_cast<size_t>(t.vertex_count()), 1.0);
    return c;
}

double part_cost(const VertexCost& cost, const std::vector<Vertex>& part) {
    double s = 0.0;
    for (Vertex v : part) s += cost.weight[static_cast<size_t>(v)];
    return s;
}

}  // namespace

TEST_CASE("path of 10, unit weights, n=5: both lemma bounds hold") {
    const auto t = path_tree(10);
    const auto cost = unit_cost(t);
    const auto part = partition_tree(t, cost, 5, 1);
    CHECK(is_valid_partition(t, part));
    CHECK(static_cast<int>(part.parts.size()) <= partition_constant(1) * 5);
    const double bound = (1 + 2) * 10.0 / 5.0;  // (k+2) Phi / n = 6
    for (const auto& p : part.parts)
        if (p.size() >= 2) CHECK(part_cost(cost, p) <= bound + 1e-12);
}

TEST_CASE("n >= vertex_count yields a valid partition (singletons allowed)") {
    const auto t = path_tree(6);
    const auto part = partition_tree(t, unit_cost(t), 8, 1);
    CHECK(is_valid_partition(t, part));
    for (const auto& p : part.parts) CHECK(p.size() == 1);
}

TEST_CASE("star with 4 leaves, n=2") {
    const auto t = RootedTree::from_parents({kNoVertex, 0, 0, 0, 0});
    const auto cost = unit_cost(t);
    const auto part = partition_tree(t, cost, 2, 4);
    CHECK(is_valid_partition(t, part));
    CHECK(static_cast<int>(part.parts.size()) <= partition_constant(4) * 2);
    const double bound = (4 + 2) * 5.0 / 2.0;
    for (const auto& p : part.parts)
        if (p.size() >= 2) CHECK(part_cost(cost, p) <= bound + 1e-12);
}

TEST_CASE("precondition: branching bound is checked") {
    const auto t = RootedTree::from_parents({kNoVertex, 0, 0, 0});
    CHECK_THROWS_AS(partition_tree(t, unit_cost(t), 2, 2), std::invalid_argument);
}

TEST_CASE("determinism") {
    std::mt19937_64 rng(19);
    const auto t = random_tree(rng, 300, 3);
    VertexCost cost;
    cost.weight.resize(static_cast<size_t>(t.vertex_count()));
    std::mt19937_64 wrng(5);
    for (auto& w : cost.weight) w = 0.1 + static_cast<double>(wrng() % 1000) / 100.0;
    const auto a = partition_tree(t, cost, 7, 3);
    const auto b = partition_tree(t, cost, 7, 3);
    CHECK(a.parts == b.parts);
    CHECK(a.part_of == b.part_of);
}

TEST_CASE("refinement overlap") {
    SUBCASE("path of 16, n=4 vs m=8") {
        const auto t = path_tree(16);
        const auto rep = check_refinement(t, unit_cost(t), 4, 8);
        CHECK(rep.max_overlap <= partition_constant(1));
        CHECK(rep.within_bound);
    }
    SUBCASE("n = m means overlap exactly 1") {
        const auto t = path_tree(16);
        const auto rep = check_refinement(t, unit_cost(t), 6, 6);
        CHECK(rep.max_overlap == 1);
    }
    SUBCASE("random seeded trees, k=3, n=5 vs m=10") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 10; ++trial) {
            const auto t = random_tree(rng, 200 + static_cast<int>(rng() % 400), 3);
            const auto rep = check_refinement(t, unit_cost(t), 5, 10);
            CHECK(rep.max_overlap <= partition_constant(3));
        }
    }
}

TEST_CASE("property-1 bound never fails on a randomized corpus") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 4);
        const int n_vertices = 20 + static_cast<int>(rng() % 800);
        const auto t = random_tree(rng, n_vertices, k);
        VertexCost cost;
        cost.weight.resize(static_cast<size_t>(t.vertex_count()));
        for (auto& w : cost.weight) w = static_cast<double>(rng() % 100) / 10.0;
        if (cost.total() <= 0.0) cost.weight[0] = 1.0;
        for (int n : {2, 4, 8}) {
            const auto part = partition_tree(t, cost, n, k);
            REQUIRE(is_valid_partition(t, part));
            const double bound = (k + 2) * cost.total() / n;
            for (const auto& p : part.parts)
                if (p.size() >= 2) CHECK(part_cost(cost, p) <= bound + 1e-9);
            CHECK(static_cast<int>(part.parts.size()) <= partition_constant(k) * n);
        }
    }
}

TEST_CASE("metric partition: single edge interval splitting") {
    const auto skel = RootedTree::from_parents({kNoVertex, 0});
    MetricTree mt(skel, {0.0, 1.0}, {PiecewiseDensity::constant(1.0), PiecewiseDensity::constant(1.0)},
                  {PiecewiseDensity::constant(1.0), PiecewiseDensity::constant(1.0)});
    MetricCost cost;
    cost.densities = {{PiecewiseDensity::constant(1.0), PiecewiseDensity::constant(1.0)}};
    cost.exponents = {1.0};

    SUBCASE("m=0, n=4: intervals of length <= C/4") {
        const auto part = partition_metric_tree(mt, cost, 0, 4);
        CHECK(part.parts.size() <= 8);
        CHECK(part.max_phi <= part.recorded_constant / 4.0 + 1e-12);
        CHECK(part.recorded_constant <= 2.0);
        double covered = 0.0;
        for (const auto& p : part.parts)
            for (const auto& s : p.segments) covered += s.t1 - s.t0;
        CHECK(covered == doctest::Approx(1.0));
    }
    SUBCASE("m=2, n=1: <= C*4 intervals, each <= C/4") {
        const auto part = partition_metric_tree(mt, cost, 2, 1);
        CHECK(static_cast<double>(part.parts.size()) <= 4.0 * std::max(1.0, part.recorded_constant) + 1);
        CHECK(part.max_phi * 4.0 / part.phi_total <= part.recorded_constant + 1e-12);
    }
}

TEST_CASE("metric partition: 3-edge star with Lebesgue measure, n=3") {
    const auto skel = RootedTree::from_parents({kNoVertex, 0, 0, 0});
    std::vector<double> len{0.0, 1.0, 2.0, 0.5};
    EdgeFunction ones(4, PiecewiseDensity::constant(1.0));
    MetricTree mt(skel, len, ones, ones);
    MetricCost cost;
    cost.densities = {ones};
    cost.exponents = {1.0};
    const auto part = partition_metric_tree(mt, cost, 0, 3);
    const double total = 3.5;
    CHECK(part.phi_total == doctest::Approx(total));
    for (const auto& p : part.parts) {
        double len_p = 0.0;
        for (const auto& s : p.segments) len_p += s.t1 - s.t0;
        CHECK(len_p <= part.recorded_constant * total / 3.0 + 1e-9);
    }
}

TEST_CASE("metric partition: product of two measures keeps parts under the budget") {
    const auto skel = RootedTree::from_parents({kNoVertex, 0, 1, 1});
    std::vector<double> len{0.0, 1.0, 1.0, 1.0};
    EdgeFunction ones(4, PiecewiseDensity::constant(1.0));
    EdgeFunction ramp(4, PiecewiseDensity::constant(1.0));
    ramp[2] = PiecewiseDensity{{0.0, 0.5}, {4.0, 0.25}};
    MetricTree mt(skel, len, ones, ones);
    MetricCost cost;
    cost.densities = {ones, ramp};
    cost.exponents = {0.5, 0.5};
    const auto part = partition_metric_tree(mt, cost, 1, 2);
    CHECK(part.max_phi <= part.budget * (1.0 + 1.0 / 8.0));
    CHECK(part.parts.size() <= 4 * 4 + 2);
    // nesting with the doubled budget: every finer part sits inside one coarser
    const auto finer = partition_metric_tree(mt, cost, 2, 2);
    CHECK(finer.max_phi <= part.max_phi + 1e-12);
}

TEST_CASE("metric partition input validation") {
    const auto skel = RootedTree::from_parents({kNoVertex, 0});
    EdgeFunction ones(2, PiecewiseDensity::constant(1.0));
    MetricTree mt(skel, {0.0, 1.0}, ones, ones);
    MetricCost cost;
    cost.densities = {ones};
    cost.exponents = {0.5};  // does not sum to 1
    CHECK_THROWS_AS(partition_metric_tree(mt, cost, 0, 2), std::invalid_argument);
}
