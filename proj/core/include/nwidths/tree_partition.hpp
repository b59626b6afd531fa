#pragma once

#include <vector>

#include "nwidths/metric_tree.hpp"
#include "nwidths/tree.hpp"

namespace nwidths {

/// Additive vertex cost: Phi(V) = sum of per-vertex weights.  Additivity
/// realizes the superadditivity the partition lemma needs.
struct VertexCost {
    std::vector<double> weight;  // per vertex, >= 0, total > 0

    void validate(const RootedTree& tree) const;
    double total() const;
};

/// Recorded constant C(k) for the partition guarantees (part count <=
/// C(k)*n and refinement overlap <= C(k)).  The construction is dyadic and
/// nested, so both follow from bounded branching.
inline int partition_constant(int k) { return 2 * (k + 1) * (k + 2) + 2; }

/// Balanced partition of the tree into subtrees:
///   (a) at most C(k)*n parts;
///   (b) every part with >= 2 vertices has Phi <= (k+2) Phi(V(T)) / n;
///   (c) partitions for different n are dyadically nested, so an element
///       of S_n overlaps at most C(k) elements of S_m whenever m <= 2n.
/// Deterministic; requires card V_1(xi) <= k for all xi.
SubtreePartition partition_tree(const RootedTree& tree, const VertexCost& cost, int n, int k);

struct RefinementReport {
    int max_overlap = 0;
    int bound = 0;  // C(k) the overlap is checked against
    bool within_bound = true;
};

/// Brute-force overlap count between partition_tree(n) and partition_tree(m).
RefinementReport check_refinement(const RootedTree& tree, const VertexCost& cost, int n, int m);

/// Product cost Phi(A) = prod_j mu_j(A)^{alpha_j} with sum alpha_j = 1;
/// measures are induced by piecewise-constant densities on the edges.
struct MetricCost {
    std::vector<EdgeFunction> densities;  // one per measure
    std::vector<double> exponents;        // alpha_j, sum = 1
};

struct MetricSegment {
    Vertex edge;
    double t0, t1;
};

struct MetricPart {
    std::vector<MetricSegment> segments;
};

struct MetricPartition {
    std::vector<MetricPart> parts;
    double max_phi = 0.0;       // largest part cost
    double phi_total = 0.0;
    double budget = 0.0;        // Phi_total / 2^ceil(log2(2^m n))
    double recorded_constant = 0.0;  // max_phi * 2^m n / phi_total
};

/// Lemma-style partition of the metric tree: at most C * 2^m n subtree
/// parts, each with Phi(E) <= C * Phi(A)/(2^m n); partitions with
/// consecutive m are nested (same dyadic hierarchy).
MetricPartition partition_metric_tree(const MetricTree& mtree, const MetricCost& cost, int m, int n);

/// Partition file format: "vertex_id part_id" lines in breadth-first order.
void write_partition(std::ostream& os, const SubtreePartition& partition);

}  // namespace nwidths
