#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nwidths/slow_factor.hpp"
#include "nwidths/tree.hpp"

namespace nwidths {

/// Piecewise-constant nonnegative function on one edge; breaks[i] is the
/// offset (from the parent end) where values[i] starts, breaks[0] = 0.
struct PiecewiseDensity {
    std::vector<double> breaks{0.0};
    std::vector<double> values{1.0};

    static PiecewiseDensity constant(double v) { return PiecewiseDensity{{0.0}, {v}}; }
    void validate(double edge_length) const;
    double value_at(double offset) const;
    /// integral of value^power over [a, b] within the edge
    double integral_pow(double a, double b, double power) const;
    double sup_on(double a, double b) const;
};

/// Per-edge function on the metric tree, indexed by the edge's child vertex.
using EdgeFunction = std::vector<PiecewiseDensity>;

/// Metric tree (T, Delta): combinatorial skeleton plus a segment per edge,
/// carrying piecewise-constant weight densities g and v.  An edge is named
/// by its deeper endpoint; offsets run from the parent end.
class MetricTree {
public:
    MetricTree(RootedTree skeleton, std::vector<double> edge_length, EdgeFunction g, EdgeFunction v);

    struct Point {
        Vertex edge = 0;     // child endpoint of the carrying edge; root = root point
        double offset = 0.0; // distance from the parent end of that edge
    };

    const RootedTree& skeleton() const { return skel_; }
    double edge_length(Vertex child) const { return len_[static_cast<size_t>(child)]; }
    const PiecewiseDensity& g(Vertex child) const { return g_[static_cast<size_t>(child)]; }
    const PiecewiseDensity& v(Vertex child) const { return v_[static_cast<size_t>(child)]; }
    double total_length() const;

    Point root_point() const { return Point{skel_.root(), 0.0}; }
    Point vertex_point(Vertex v) const;
    bool point_leq(const Point& a, const Point& b) const;
    double distance_from_root(const Point& x) const;

private:
    RootedTree skel_;
    std::vector<double> len_;
    EdgeFunction g_, v_;
};

/// Exact integral of a piecewise-constant f over the order segment [a, b].
/// Throws std::invalid_argument when a and b are incomparable.
double integrate_path(const MetricTree& mtree, const EdgeFunction& f, const MetricTree::Point& a,
                      const MetricTree::Point& b);

/// I_{g,v,x0} f (x) = v(x) * integral over [x0, x] of g f; x0 = root point.
double apply_hardy(const MetricTree& mtree, const EdgeFunction& f, const MetricTree::Point& x);

/// Regular tiling of the metric tree generated from skeleton levels:
/// tile (k, i) = child edges of the i-th level-k vertex.  Vertices at the
/// deepest level carry no edges and get no tile.
struct LevelTiling {
    int tile_levels = 0;  // tiles exist for levels 0 .. tile_levels-1
};

LevelTiling level_tiling(const MetricTree& mtree);

/// Target power laws for per-tile norms: u_k <= c* 2^{(beta_g - 1/p')k} Psi_g(2^{-k}),
/// w_k <= c* 2^{(beta_v - 1/q)k} Psi_v(2^{-k}).
struct TileLawParams {
    double beta_g = 0.0;
    double beta_v = 0.0;
    SlowFactor psi_g = SlowFactor::constant(1.0);
    SlowFactor psi_v = SlowFactor::constant(1.0);
};

struct TileNorms {
    std::vector<double> u;  // per level k: max over tiles of ||g||_{L_p'}
    std::vector<double> w;  // per level k: max over tiles of ||v||_{L_q}
    double c_star_g = 0.0;  // fitted constants against the law
    double c_star_w = 0.0;
    bool law_violated = false;  // per-level constants spread by > factor 4
};

struct DiscretizeResult {
    RootedTree tile_tree;       // tiles as vertices (skeleton truncated one level)
    std::vector<double> u, w;   // per tile
    TileNorms norms;
};

/// Computes exact per-tile norms ||g||_{L_p'(tile)}, ||v||_{L_q(tile)} and
/// emits the combinatorial summation operator weights of the reduction.
DiscretizeResult discretize_to_summation(const MetricTree& mtree, const LevelTiling& tiling,
                                         double p, double q,
                                         const std::optional<TileLawParams>& law = {});

/// Largest singular value of the discretized I_{g,v,x0} on a uniform grid
/// of `resolution` cells per edge (Galerkin with piecewise constants, exact
/// entries for piecewise-constant g, v).  resolution < 16 raises an error.
double volterra_norm_l2(const MetricTree& mtree, int resolution);

/// Metric tree file format: breadth-first lines
///   id parent_id length g_spec v_spec
/// where a density spec is either a single value or a ';'-joined list of
/// value@offset pairs ("2.0@0;1.0@0.5").  The root line is "0 -1".
void write_metric_tree(std::ostream& os, const MetricTree& mtree);
MetricTree read_metric_tree(std::istream& is);
void write_metric_tree_file(const std::string& path, const MetricTree& mtree);
MetricTree read_metric_tree_file(const std::string& path);

}  // namespace nwidths
