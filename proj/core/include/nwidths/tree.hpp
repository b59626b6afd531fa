#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nwidths/slow_factor.hpp"

namespace nwidths {

using Vertex = int;
inline constexpr Vertex kNoVertex = -1;

/// Finite rooted tree with dense breadth-first vertex ids.  Ids increase
/// along every root-to-leaf chain, so any ancestor-triangular matrix
/// indexed by them is lower-triangular.
class RootedTree {
public:
    /// Build from a parent map (exactly one -1 entry, the root).  Validates
    /// acyclicity and that ids are breadth-first compatible (parent < child).
    static RootedTree from_parents(std::vector<Vertex> parent);

    int vertex_count() const { return static_cast<int>(parent_.size()); }
    Vertex root() const { return root_; }
    Vertex parent(Vertex v) const { return parent_[static_cast<size_t>(v)]; }
    const std::vector<Vertex>& children(Vertex v) const { return children_[static_cast<size_t>(v)]; }
    int level(Vertex v) const { return level_[static_cast<size_t>(v)]; }
    /// Deepest level present.
    int depth() const { return depth_; }
    const std::vector<Vertex>& level_vertices(int j) const;
    int max_branching() const { return max_branching_; }

    /// a <= b in the tree partial order (a is an ancestor of b or equal).
    bool is_ancestor_or_equal(Vertex a, Vertex b) const {
        return tin_[static_cast<size_t>(a)] <= tin_[static_cast<size_t>(b)] &&
               tout_[static_cast<size_t>(b)] <= tout_[static_cast<size_t>(a)];
    }

    /// Vertices of T_v in breadth-first order.
    std::vector<Vertex> subtree_vertices(Vertex v) const;

    void check_vertex(Vertex v) const;

private:
    std::vector<Vertex> parent_;
    std::vector<std::vector<Vertex>> children_;
    std::vector<int> level_;
    std::vector<std::vector<Vertex>> levels_;
    std::vector<int> tin_, tout_;
    Vertex root_ = 0;
    int depth_ = 0;
    int max_branching_ = 0;
};

/// V_j(xi) = { xi' >= xi : rho(xi, xi') = j }.
std::vector<Vertex> level_set(const RootedTree& tree, Vertex xi, int j);

/// Partition of a tree into vertex-disjoint subtrees.
struct SubtreePartition {
    std::vector<std::vector<Vertex>> parts;  // each sorted ascending
    std::vector<int> part_of;                // vertex -> part index
};

/// Checks disjoint cover + connectivity of every part.
bool is_valid_partition(const RootedTree& tree, const SubtreePartition& partition);

/// Generator spec for an h-regular tree: level-k cardinalities track
/// 1/h(2^{-m_star k}) with h(t) = t^theta Lambda(t).
struct HTreeSpec {
    double theta = 0.0;
    int m_star = 1;
    int depth = 1;
    SlowFactor lambda = SlowFactor::constant(1.0);
    std::uint64_t seed = 0;
    /// Growth cap; exceeding it raises capacity_error.
    int max_vertices = 1 << 22;
};

/// Builds the tree by a fractional-accumulator scheme: every vertex at
/// level k draws from a running child budget h(2^{-m k})/h(2^{-m (k+1)}),
/// the remainder is carried to the next vertex (and level), so
/// N_k + carry = h(1)/h(2^{-m k}) exactly.  The seed permutes which
/// vertices receive the fractional surplus, not the level sizes.
RootedTree generate_h_tree(const HTreeSpec& spec);

/// Target level cardinality h(1)/h(2^{-m_star k}) of the generator.
double h_tree_level_target(const HTreeSpec& spec, int k);

/// Text format: one vertex per line, breadth-first, "id parent_id",
/// root parent_id = -1.  Round-trips bit-exactly.
void write_tree(std::ostream& os, const RootedTree& tree);
RootedTree read_tree(std::istream& is);
void write_tree_file(const std::string& path, const RootedTree& tree);
RootedTree read_tree_file(const std::string& path);

}  // namespace nwidths
