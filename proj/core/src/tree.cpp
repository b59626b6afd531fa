#include "nwidths/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

void RootedTree::check_vertex(Vertex v) const {
    if (v < 0 || v >= vertex_count())
        throw std::invalid_argument("unknown vertex id " + std::to_string(v));
}

RootedTree RootedTree::from_parents(std::vector<Vertex> parent) {
    const int n = static_cast<int>(parent.size());
    if (n == 0) throw std::invalid_argument("tree must have at least one vertex");
    RootedTree t;
    t.parent_ = std::move(parent);
    t.children_.assign(static_cast<size_t>(n), {});
    t.level_.assign(static_cast<size_t>(n), 0);
    int roots = 0;
    for (Vertex v = 0; v < n; ++v) {
        const Vertex p = t.parent_[static_cast<size_t>(v)];
        if (p == kNoVertex) {
            ++roots;
            t.root_ = v;
            continue;
        }
        if (p < 0 || p >= n) throw std::invalid_argument("parent id out of range");
        if (p >= v)
            throw std::invalid_argument("vertex ids must be breadth-first (parent < child)");
        t.children_[static_cast<size_t>(p)].push_back(v);
    }
    if (roots != 1) throw std::invalid_argument("tree must have exactly one root");
    if (t.root_ != 0) throw std::invalid_argument("root must have id 0 in breadth-first order");
    t.depth_ = 0;
    t.max_branching_ = 0;
    for (Vertex v = 0; v < n; ++v) {
        if (v != t.root_) {
            t.level_[static_cast<size_t>(v)] = t.level_[static_cast<size_t>(t.parent_[static_cast<size_t>(v)])] + 1;
            t.depth_ = std::max(t.depth_, t.level_[static_cast<size_t>(v)]);
        }
        t.max_branching_ = std::max(t.max_branching_, static_cast<int>(t.children_[static_cast<size_t>(v)].size()));
    }
    t.levels_.assign(static_cast<size_t>(t.depth_) + 1, {});
    for (Vertex v = 0; v < n; ++v) t.levels_[static_cast<size_t>(t.level_[static_cast<size_t>(v)])].push_back(v);
    // Euler tour for O(1) ancestor queries.
    t.tin_.assign(static_cast<size_t>(n), 0);
    t.tout_.assign(static_cast<size_t>(n), 0);
    std::vector<std::pair<Vertex, size_t>> stack;
    stack.reserve(static_cast<size_t>(n));
    int clock = 0;
    stack.emplace_back(t.root_, 0);
    t.tin_[static_cast<size_t>(t.root_)] = clock++;
    while (!stack.empty()) {
        auto& [v, ci] = stack.back();
        const auto& ch = t.children_[static_cast<size_t>(v)];
        if (ci < ch.size()) {
            Vertex c = ch[ci++];
            t.tin_[static_cast<size_t>(c)] = clock++;
            stack.emplace_back(c, 0);
        } else {
            t.tout_[static_cast<size_t>(v)] = clock++;
            stack.pop_back();
        }
    }
    return t;
}

const std::vector<Vertex>& RootedTree::level_vertices(int j) const {
    static const std::vector<Vertex> empty;
    if (j < 0 || j > depth_) return empty;
    return levels_[static_cast<size_t>(j)];
}

std::vector<Vertex> RootedTree::subtree_vertices(Vertex v) const {
    check_vertex(v);
    std::vector<Vertex> out;
    std::vector<Vertex> queue{v};
    size_t head = 0;
    while (head < queue.size()) {
        Vertex x = queue[head++];
        out.push_back(x);
        for (Vertex c : children(x)) queue.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Vertex> level_set(const RootedTree& tree, Vertex xi, int j) {
    tree.check_vertex(xi);
    if (j < 0) throw std::invalid_argument("level_set: j must be >= 0");
    std::vector<Vertex> frontier{xi};
    for (int step = 0; step < j; ++step) {
        std::vector<Vertex> next;
        for (Vertex v : frontier)
            for (Vertex c : tree.children(v)) next.push_back(c);
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    std::sort(frontier.begin(), frontier.end());
    return frontier;
}

bool is_valid_partition(const RootedTree& tree, const SubtreePartition& partition) {
    const int n = tree.vertex_count();
    if (static_cast<int>(partition.part_of.size()) != n) return false;
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (size_t pi = 0; pi < partition.parts.size(); ++pi) {
        const auto& part = partition.parts[pi];
        if (part.empty()) return false;
        int mins = 0;
        for (Vertex v : part) {
            if (v < 0 || v >= n || seen[static_cast<size_t>(v)]) return false;
            seen[static_cast<size_t>(v)] = 1;
            if (partition.part_of[static_cast<size_t>(v)] != static_cast<int>(pi)) return false;
            const Vertex p = tree.parent(v);
            const bool parent_inside =
                p != kNoVertex && partition.part_of[static_cast<size_t>(p)] == static_cast<int>(pi);
            if (!parent_inside) ++mins;
        }
        // connected subtree <=> exactly one vertex whose parent is outside
        if (mins != 1) return false;
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

double h_tree_level_target(const HTreeSpec& spec, int k) {
    const double l0 = log2_eval_h(spec.theta, spec.lambda, 0.0);
    const double lk = log2_eval_h(spec.theta, spec.lambda, -static_cast<double>(spec.m_star) * k);
    return std::exp2(l0 - lk);
}

RootedTree generate_h_tree(const HTreeSpec& spec) {
    if (spec.theta < 0.0) throw std::invalid_argument("generate_h_tree: theta must be >= 0");
    if (spec.depth < 1) throw std::invalid_argument("generate_h_tree: depth must be >= 1");
    if (spec.m_star < 1) throw std::invalid_argument("generate_h_tree: m_star must be >= 1");
    {
        const double total_target = h_tree_level_target(spec, spec.depth);
        if (!(total_target * (spec.depth + 1.0) < static_cast<double>(spec.max_vertices)))
            throw capacity_error("generate_h_tree: 1/h exceeds the representable budget at this depth");
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<Vertex> parent{kNoVertex};
    std::vector<Vertex> level_ids{0};
    double carry = 0.0;
    for (int k = 0; k < spec.depth; ++k) {
        const double lk = log2_eval_h(spec.theta, spec.lambda, -static_cast<double>(spec.m_star) * k);
        const double lk1 = log2_eval_h(spec.theta, spec.lambda, -static_cast<double>(spec.m_star) * (k + 1));
        const double ratio = std::max(1.0, std::exp2(lk - lk1));
        // seed-dependent order in which vertices draw from the budget
        std::vector<size_t> order(level_ids.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> child_count(level_ids.size(), 0);
        for (size_t idx : order) {
            carry += ratio;
            const int c = static_cast<int>(std::floor(carry));
            carry -= c;
            child_count[idx] = c;
        }
        std::vector<Vertex> next;
        for (size_t i = 0; i < level_ids.size(); ++i) {
            for (int c = 0; c < child_count[i]; ++c) {
                if (static_cast<int>(parent.size()) >= spec.max_vertices)
                    throw capacity_error("generate_h_tree: vertex budget exceeded");
                next.push_back(static_cast<Vertex>(parent.size()));
                parent.push_back(level_ids[i]);
            }
        }
        level_ids = std::move(next);
    }
    return RootedTree::from_parents(std::move(parent));
}

void write_tree(std::ostream& os, const RootedTree& tree) {
    for (Vertex v = 0; v < tree.vertex_count(); ++v) os << v << ' ' << tree.parent(v) << '\n';
}

RootedTree read_tree(std::istream& is) {
    std::vector<Vertex> parent;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long id = 0, p = 0;
        if (!(ls >> id >> p)) throw std::invalid_argument("tree file: malformed line '" + line + "'");
        if (id != static_cast<long>(parent.size()))
            throw std::invalid_argument("tree file: ids must be consecutive from 0");
        parent.push_back(static_cast<Vertex>(p));
    }
    return RootedTree::from_parents(std::move(parent));
}

void write_tree_file(const std::string& path, const RootedTree& tree) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open for writing: " + path);
    write_tree(os, tree);
}

RootedTree read_tree_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open for reading: " + path);
    return read_tree(is);
}

}  // namespace nwidths
