#include "nwidths/tree_partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

void VertexCost::validate(const RootedTree& tree) const {
    if (static_cast<int>(weight.size()) != tree.vertex_count())
        throw std::invalid_argument("VertexCost: weight size must match vertex count");
    double s = 0.0;
    for (double w : weight) {
        if (!(w >= 0.0)) throw std::invalid_argument("VertexCost: weights must be >= 0");
        s += w;
    }
    if (!(s > 0.0)) throw std::invalid_argument("VertexCost: total weight must be > 0");
}

double VertexCost::total() const { return std::accumulate(weight.begin(), weight.end(), 0.0); }

namespace {

int ceil_log2(long long k) {
    int j = 0;
    while ((1LL << j) < k) ++j;
    return j;
}

double phi_value(const std::vector<double>& acc, const std::vector<double>& alpha) {
    if (alpha.size() == 1) return acc[0];
    double lg = 0.0;
    for (size_t j = 0; j < alpha.size(); ++j) {
        if (acc[j] <= 0.0) return 0.0;
        lg += alpha[j] * std::log2(acc[j]);
    }
    return std::exp2(lg);
}

struct Component {
    std::vector<double> acc;
    std::vector<Vertex> members;
};

// One bottom-up greedy pass over `piece` with threshold B.  Open components
// always satisfy Phi <= B.  On overshoot at v: with `bundle` (additive costs)
// the whole accumulated subtree {v} + open children closes as one part (cost
// <= w(v) + k B); otherwise the children components close individually and v
// starts fresh, so every closed part keeps Phi <= B.
std::vector<std::vector<Vertex>> greedy_split(const RootedTree& tree, const std::vector<Vertex>& piece,
                                              const std::vector<std::vector<double>>& vcost,
                                              const std::vector<double>& alpha, double B,
                                              bool bundle) {
    const size_t l = alpha.size();
    std::vector<std::vector<Vertex>> parts;
    if (piece.size() == 1) {
        parts.push_back(piece);
        return parts;
    }
    std::vector<Vertex> order = piece;
    std::sort(order.begin(), order.end(), [&tree](Vertex a, Vertex b) {
        const int la = tree.level(a), lb = tree.level(b);
        return la != lb ? la > lb : a < b;
    });
    std::vector<int> comp_of(static_cast<size_t>(tree.vertex_count()), -1);
    std::vector<char> in_piece(static_cast<size_t>(tree.vertex_count()), 0);
    for (Vertex v : piece) in_piece[static_cast<size_t>(v)] = 1;
    std::vector<Component> comps;
    std::vector<char> open;

    auto close_comp = [&](int ci) {
        std::sort(comps[static_cast<size_t>(ci)].members.begin(), comps[static_cast<size_t>(ci)].members.end());
        parts.push_back(std::move(comps[static_cast<size_t>(ci)].members));
        open[static_cast<size_t>(ci)] = 0;
    };

    for (Vertex v : order) {
        std::vector<int> child_comps;
        for (Vertex c : tree.children(v))
            if (in_piece[static_cast<size_t>(c)] && comp_of[static_cast<size_t>(c)] >= 0 &&
                open[static_cast<size_t>(comp_of[static_cast<size_t>(c)])])
                child_comps.push_back(comp_of[static_cast<size_t>(c)]);
        std::vector<double> merged = vcost[static_cast<size_t>(v)];
        for (int ci : child_comps)
            for (size_t j = 0; j < l; ++j) merged[j] += comps[static_cast<size_t>(ci)].acc[j];
        const double phi_merged = phi_value(merged, alpha);
        const double phi_self = phi_value(vcost[static_cast<size_t>(v)], alpha);
        if (phi_merged <= B) {
            Component nc;
            nc.acc = std::move(merged);
            nc.members.push_back(v);
            for (int ci : child_comps) {
                auto& mm = comps[static_cast<size_t>(ci)].members;
                nc.members.insert(nc.members.end(), mm.begin(), mm.end());
                open[static_cast<size_t>(ci)] = 0;
            }
            comp_of[static_cast<size_t>(v)] = static_cast<int>(comps.size());
            comps.push_back(std::move(nc));
            open.push_back(1);
            continue;
        }
        if (bundle && phi_self <= B) {
            std::vector<Vertex> part{v};
            for (int ci : child_comps) {
                auto& mm = comps[static_cast<size_t>(ci)].members;
                part.insert(part.end(), mm.begin(), mm.end());
                open[static_cast<size_t>(ci)] = 0;
            }
            std::sort(part.begin(), part.end());
            parts.push_back(std::move(part));
            comp_of[static_cast<size_t>(v)] = -1;
            continue;
        }
        for (int ci : child_comps) close_comp(ci);
        if (phi_self > B) {
            parts.push_back({v});
            comp_of[static_cast<size_t>(v)] = -1;
        } else {
            Component nc;
            nc.acc = vcost[static_cast<size_t>(v)];
            nc.members.push_back(v);
            comp_of[static_cast<size_t>(v)] = static_cast<int>(comps.size());
            comps.push_back(std::move(nc));
            open.push_back(1);
        }
    }
    for (size_t ci = 0; ci < comps.size(); ++ci)
        if (open[ci]) close_comp(static_cast<int>(ci));
    return parts;
}

// Dyadic hierarchy: level j re-splits every part with threshold Phi_total/2^j,
// so partitions for different budgets are nested by construction.
std::vector<std::vector<Vertex>> hierarchical_parts(const RootedTree& tree,
                                                    const std::vector<std::vector<double>>& vcost,
                                                    const std::vector<double>& alpha, long long target,
                                                    bool bundle) {
    std::vector<double> total(alpha.size(), 0.0);
    for (const auto& w : vcost)
        for (size_t j = 0; j < alpha.size(); ++j) total[j] += w[j];
    const double phi_total = phi_value(total, alpha);
    const int J = ceil_log2(target);
    std::vector<std::vector<Vertex>> parts;
    {
        std::vector<Vertex> all(static_cast<size_t>(tree.vertex_count()));
        std::iota(all.begin(), all.end(), 0);
        parts.push_back(std::move(all));
    }
    for (int j = 1; j <= J; ++j) {
        const double B = phi_total / std::exp2(j);
        std::vector<std::vector<Vertex>> next;
        for (auto& part : parts) {
            auto pieces = greedy_split(tree, part, vcost, alpha, B, bundle);
            for (auto& p : pieces) next.push_back(std::move(p));
        }
        parts = std::move(next);
    }
    return parts;
}

}  // namespace

SubtreePartition partition_tree(const RootedTree& tree, const VertexCost& cost, int n, int k) {
    if (n < 1) throw std::invalid_argument("partition_tree: n must be >= 1");
    cost.validate(tree);
    if (tree.max_branching() > k)
        throw std::invalid_argument("partition_tree: branching bound violated (card V_1 > k)");
    std::vector<std::vector<double>> vcost(static_cast<size_t>(tree.vertex_count()));
    for (Vertex v = 0; v < tree.vertex_count(); ++v) vcost[static_cast<size_t>(v)] = {cost.weight[static_cast<size_t>(v)]};
    auto parts = hierarchical_parts(tree, vcost, {1.0}, n, /*bundle=*/true);
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    SubtreePartition out;
    out.parts = std::move(parts);
    out.part_of.assign(static_cast<size_t>(tree.vertex_count()), -1);
    for (size_t pi = 0; pi < out.parts.size(); ++pi)
        for (Vertex v : out.parts[pi]) out.part_of[static_cast<size_t>(v)] = static_cast<int>(pi);
    return out;
}

RefinementReport check_refinement(const RootedTree& tree, const VertexCost& cost, int n, int m) {
    const int k = std::max(1, tree.max_branching());
    const auto pn = partition_tree(tree, cost, n, k);
    const auto pm = partition_tree(tree, cost, m, k);
    RefinementReport rep;
    rep.bound = partition_constant(k);
    std::vector<std::vector<char>> hit(pn.parts.size(), std::vector<char>(pm.parts.size(), 0));
    for (Vertex v = 0; v < tree.vertex_count(); ++v)
        hit[static_cast<size_t>(pn.part_of[static_cast<size_t>(v)])]
           [static_cast<size_t>(pm.part_of[static_cast<size_t>(v)])] = 1;
    for (const auto& row : hit) {
        int c = 0;
        for (char h : row) c += h;
        rep.max_overlap = std::max(rep.max_overlap, c);
    }
    rep.within_bound = rep.max_overlap <= rep.bound;
    return rep;
}

MetricPartition partition_metric_tree(const MetricTree& mtree, const MetricCost& cost, int m, int n) {
    if (n < 1 || m < 0) throw std::invalid_argument("partition_metric_tree: need n >= 1, m >= 0");
    const size_t l = cost.exponents.size();
    if (l == 0 || cost.densities.size() != l)
        throw std::invalid_argument("partition_metric_tree: measures/exponents mismatch");
    double asum = 0.0;
    for (double a : cost.exponents) {
        if (!(a > 0.0)) throw std::invalid_argument("partition_metric_tree: exponents must be > 0");
        asum += a;
    }
    if (std::abs(asum - 1.0) > 1e-12)
        throw std::invalid_argument("partition_metric_tree: exponents must sum to 1");
    const long long target = (1LL << m) * n;
    if (target > 1024) throw capacity_error("partition_metric_tree: 2^m * n beyond the slicing budget");

    const auto& skel = mtree.skeleton();
    // per-measure totals, for the slicing quantum
    std::vector<double> totals(l, 0.0);
    for (Vertex c = 0; c < skel.vertex_count(); ++c) {
        if (c == skel.root()) continue;
        for (size_t j = 0; j < l; ++j)
            totals[j] += cost.densities[j][static_cast<size_t>(c)].integral_pow(0.0, mtree.edge_length(c), 1.0);
    }
    for (double t : totals)
        if (!(t > 0.0)) throw std::invalid_argument("partition_metric_tree: each measure must be positive");

    // Slice the edges into segments so fine that every segment carries at most
    // 2^-14 of each measure; slicing is independent of (m, n), which keeps the
    // dyadic hierarchies for different budgets nested in one laminar family.
    constexpr double kQuantum = 1.0 / 16384.0;
    struct Seg {
        Vertex edge;
        double t0, t1;
    };
    std::vector<Seg> segs;          // index 0 reserved for the virtual root
    std::vector<Vertex> seg_parent; // segment-tree parent ids
    std::vector<std::vector<double>> seg_cost;
    segs.push_back(Seg{kNoVertex, 0.0, 0.0});
    seg_parent.push_back(kNoVertex);
    seg_cost.push_back(std::vector<double>(l, 0.0));
    std::vector<int> last_seg(static_cast<size_t>(skel.vertex_count()), 0);  // deepest segment id of the edge into v

    for (Vertex c = 0; c < skel.vertex_count(); ++c) {  // BFS ids: parents first
        if (c == skel.root()) continue;
        const double len = mtree.edge_length(c);
        std::vector<double> cuts{0.0, len};
        for (size_t j = 0; j < l; ++j)
            for (double b : cost.densities[j][static_cast<size_t>(c)].breaks)
                if (b > 0.0 && b < len) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        int prev = last_seg[static_cast<size_t>(skel.parent(c))];
        for (size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double a = cuts[s], b = cuts[s + 1];
            int pieces = 1;
            for (size_t j = 0; j < l; ++j) {
                const double mass = cost.densities[j][static_cast<size_t>(c)].integral_pow(a, b, 1.0);
                pieces = std::max(pieces, static_cast<int>(std::ceil(mass / (totals[j] * kQuantum))));
            }
            for (int i = 0; i < pieces; ++i) {
                const double t0 = a + (b - a) * i / pieces;
                const double t1 = a + (b - a) * (i + 1) / pieces;
                std::vector<double> w(l, 0.0);
                for (size_t j = 0; j < l; ++j)
                    w[j] = cost.densities[j][static_cast<size_t>(c)].integral_pow(t0, t1, 1.0);
                segs.push_back(Seg{c, t0, t1});
                seg_parent.push_back(prev);
                seg_cost.push_back(std::move(w));
                prev = static_cast<int>(segs.size()) - 1;
            }
        }
        last_seg[static_cast<size_t>(c)] = prev;
    }

    RootedTree seg_tree = RootedTree::from_parents(seg_parent);
    auto parts = hierarchical_parts(seg_tree, seg_cost, cost.exponents, target, /*bundle=*/false);

    MetricPartition out;
    std::vector<double> tot(l, 0.0);
    for (const auto& w : seg_cost)
        for (size_t j = 0; j < l; ++j) tot[j] += w[j];
    out.phi_total = phi_value(tot, cost.exponents);
    out.budget = out.phi_total / std::exp2(ceil_log2(target));
    for (const auto& part : parts) {
        MetricPart mp;
        std::vector<double> acc(l, 0.0);
        for (Vertex sv : part) {
            if (sv == 0) continue;  // virtual root carries no segment
            const auto& s = segs[static_cast<size_t>(sv)];
            if (!mp.segments.empty() && mp.segments.back().edge == s.edge &&
                mp.segments.back().t1 == s.t0) {
                mp.segments.back().t1 = s.t1;
            } else {
                mp.segments.push_back(MetricSegment{s.edge, s.t0, s.t1});
            }
            for (size_t j = 0; j < l; ++j) acc[j] += seg_cost[static_cast<size_t>(sv)][j];
        }
        if (mp.segments.empty()) continue;
        out.max_phi = std::max(out.max_phi, phi_value(acc, cost.exponents));
        out.parts.push_back(std::move(mp));
    }
    out.recorded_constant = out.max_phi * static_cast<double>(target) / out.phi_total;
    return out;
}

void write_partition(std::ostream& os, const SubtreePartition& partition) {
    for (size_t v = 0; v < partition.part_of.size(); ++v)
        os << v << ' ' << partition.part_of[v] << '\n';
}

}  // namespace nwidths
