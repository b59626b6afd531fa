#include "nwidths/metric_tree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

void PiecewiseDensity::validate(double edge_length) const {
    if (breaks.empty() || breaks.size() != values.size())
        throw std::invalid_argument("PiecewiseDensity: breaks/values size mismatch");
    if (breaks.front() != 0.0) throw std::invalid_argument("PiecewiseDensity: first break must be 0");
    for (size_t i = 0; i < breaks.size(); ++i) {
        if (i > 0 && breaks[i] <= breaks[i - 1])
            throw std::invalid_argument("PiecewiseDensity: breaks must be ascending");
        if (breaks[i] >= edge_length && i > 0)
            throw std::invalid_argument("PiecewiseDensity: break beyond edge length");
        if (!(values[i] >= 0.0)) throw std::invalid_argument("PiecewiseDensity: values must be >= 0");
    }
}

double PiecewiseDensity::value_at(double offset) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), offset);
    const size_t i = static_cast<size_t>(it - breaks.begin());
    return values[i == 0 ? 0 : i - 1];
}

double PiecewiseDensity::integral_pow(double a, double b, double power) const {
    if (b <= a) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < breaks.size(); ++i) {
        const double s0 = breaks[i];
        const double s1 = i + 1 < breaks.size() ? breaks[i + 1] : std::numeric_limits<double>::infinity();
        const double lo = std::max(a, s0), hi = std::min(b, s1);
        if (hi > lo) total += std::pow(values[i], power) * (hi - lo);
    }
    return total;
}

double PiecewiseDensity::sup_on(double a, double b) const {
    double m = 0.0;
    for (size_t i = 0; i < breaks.size(); ++i) {
        const double s0 = breaks[i];
        const double s1 = i + 1 < breaks.size() ? breaks[i + 1] : std::numeric_limits<double>::infinity();
        if (std::min(b, s1) > std::max(a, s0)) m = std::max(m, values[i]);
    }
    return m;
}

MetricTree::MetricTree(RootedTree skeleton, std::vector<double> edge_length, EdgeFunction g,
                       EdgeFunction v)
    : skel_(std::move(skeleton)), len_(std::move(edge_length)), g_(std::move(g)), v_(std::move(v)) {
    const size_t n = static_cast<size_t>(skel_.vertex_count());
    if (len_.size() != n || g_.size() != n || v_.size() != n)
        throw std::invalid_argument("MetricTree: per-edge arrays must match vertex count");
    for (Vertex c = 0; c < skel_.vertex_count(); ++c) {
        if (c == skel_.root()) continue;
        if (!(len_[static_cast<size_t>(c)] > 0.0))
            throw std::invalid_argument("MetricTree: edge lengths must be > 0");
        g_[static_cast<size_t>(c)].validate(len_[static_cast<size_t>(c)]);
        v_[static_cast<size_t>(c)].validate(len_[static_cast<size_t>(c)]);
    }
}

double MetricTree::total_length() const {
    double s = 0.0;
    for (Vertex c = 0; c < skel_.vertex_count(); ++c)
        if (c != skel_.root()) s += len_[static_cast<size_t>(c)];
    return s;
}

MetricTree::Point MetricTree::vertex_point(Vertex v) const {
    skel_.check_vertex(v);
    if (v == skel_.root()) return root_point();
    return Point{v, len_[static_cast<size_t>(v)]};
}

bool MetricTree::point_leq(const Point& a, const Point& b) const {
    if (a.edge == b.edge) return a.offset <= b.offset;
    return skel_.is_ancestor_or_equal(a.edge, b.edge);
}

double MetricTree::distance_from_root(const Point& x) const {
    double d = x.offset;
    for (Vertex v = x.edge; v != skel_.root();) {
        v = skel_.parent(v);
        if (v != skel_.root()) d += len_[static_cast<size_t>(v)];
    }
    return d;
}

namespace {

// Edges (deeper endpoints) strictly between a.edge and b.edge on the path,
// plus the handling of the partially covered end edges.
double integrate_pow_path(const MetricTree& mt, const EdgeFunction& f, const MetricTree::Point& a,
                          const MetricTree::Point& b, double power) {
    const auto& skel = mt.skeleton();
    if (!mt.point_leq(a, b)) {
        if (mt.point_leq(b, a)) return 0.0;
        throw std::invalid_argument("integrate_path: points are incomparable");
    }
    if (a.edge == b.edge)
        return f[static_cast<size_t>(b.edge)].integral_pow(a.offset, b.offset, power);
    double total = f[static_cast<size_t>(b.edge)].integral_pow(0.0, b.offset, power);
    Vertex v = skel.parent(b.edge);
    while (v != a.edge && v != kNoVertex) {
        total += f[static_cast<size_t>(v)].integral_pow(0.0, mt.edge_length(v), power);
        v = skel.parent(v);
    }
    if (v == a.edge && a.edge != skel.root())
        total += f[static_cast<size_t>(a.edge)].integral_pow(a.offset, mt.edge_length(a.edge), power);
    return total;
}

}  // namespace

double integrate_path(const MetricTree& mtree, const EdgeFunction& f, const MetricTree::Point& a,
                      const MetricTree::Point& b) {
    if (!mtree.point_leq(a, b)) throw std::invalid_argument("integrate_path: requires a <= b");
    return integrate_pow_path(mtree, f, a, b, 1.0);
}

double apply_hardy(const MetricTree& mtree, const EdgeFunction& f, const MetricTree::Point& x) {
    const auto& skel = mtree.skeleton();
    // g*f as a merged piecewise product along the path
    EdgeFunction gf(static_cast<size_t>(skel.vertex_count()));
    for (Vertex c = 0; c < skel.vertex_count(); ++c) {
        if (c == skel.root()) continue;
        const auto& gd = mtree.g(c);
        const auto& fd = f[static_cast<size_t>(c)];
        PiecewiseDensity prod;
        prod.breaks.clear();
        prod.values.clear();
        std::vector<double> cuts;
        cuts.insert(cuts.end(), gd.breaks.begin(), gd.breaks.end());
        cuts.insert(cuts.end(), fd.breaks.begin(), fd.breaks.end());
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (double s : cuts) {
            prod.breaks.push_back(s);
            prod.values.push_back(gd.value_at(s) * fd.value_at(s));
        }
        gf[static_cast<size_t>(c)] = std::move(prod);
    }
    const double integral = integrate_pow_path(mtree, gf, mtree.root_point(), x, 1.0);
    const double vx = x.edge == skel.root() ? 0.0 : mtree.v(x.edge).value_at(std::min(x.offset, mtree.edge_length(x.edge) * (1 - 1e-12)));
    return vx * integral;
}

LevelTiling level_tiling(const MetricTree& mtree) {
    LevelTiling t;
    t.tile_levels = mtree.skeleton().depth();  // levels 0 .. depth-1 carry edges below them
    return t;
}

DiscretizeResult discretize_to_summation(const MetricTree& mtree, const LevelTiling& tiling,
                                         double p, double q,
                                         const std::optional<TileLawParams>& law) {
    const auto& skel = mtree.skeleton();
    if (tiling.tile_levels < 1 || tiling.tile_levels > skel.depth())
        throw std::invalid_argument("discretize_to_summation: tiling does not match the skeleton");
    const double pd = p == 1.0 ? std::numeric_limits<double>::infinity()
                               : (std::isinf(p) ? 1.0 : p / (p - 1.0));
    // tile tree = skeleton truncated to levels < tile_levels
    std::vector<Vertex> parent;
    std::vector<Vertex> keep;
    for (Vertex v = 0; v < skel.vertex_count(); ++v)
        if (skel.level(v) < tiling.tile_levels) keep.push_back(v);
    std::vector<int> new_id(static_cast<size_t>(skel.vertex_count()), -1);
    for (size_t i = 0; i < keep.size(); ++i) new_id[static_cast<size_t>(keep[i])] = static_cast<int>(i);
    parent.resize(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        const Vertex pv = skel.parent(keep[i]);
        parent[i] = pv == kNoVertex ? kNoVertex : new_id[static_cast<size_t>(pv)];
    }
    DiscretizeResult res{RootedTree::from_parents(std::move(parent)), {}, {}, {}};
    res.u.assign(keep.size(), 0.0);
    res.w.assign(keep.size(), 0.0);
    res.norms.u.assign(static_cast<size_t>(tiling.tile_levels), 0.0);
    res.norms.w.assign(static_cast<size_t>(tiling.tile_levels), 0.0);

    for (size_t i = 0; i < keep.size(); ++i) {
        const Vertex v = keep[i];
        double su = 0.0, sw = 0.0, su_inf = 0.0, sw_inf = 0.0;
        for (Vertex c : skel.children(v)) {
            const double len = mtree.edge_length(c);
            if (std::isinf(pd))
                su_inf = std::max(su_inf, mtree.g(c).sup_on(0.0, len));
            else
                su += mtree.g(c).integral_pow(0.0, len, pd);
            if (std::isinf(q))
                sw_inf = std::max(sw_inf, mtree.v(c).sup_on(0.0, len));
            else
                sw += mtree.v(c).integral_pow(0.0, len, q);
        }
        res.u[i] = std::isinf(pd) ? su_inf : std::pow(su, 1.0 / pd);
        res.w[i] = std::isinf(q) ? sw_inf : std::pow(sw, 1.0 / q);
        const int k = skel.level(v);
        res.norms.u[static_cast<size_t>(k)] = std::max(res.norms.u[static_cast<size_t>(k)], res.u[i]);
        res.norms.w[static_cast<size_t>(k)] = std::max(res.norms.w[static_cast<size_t>(k)], res.w[i]);
    }

    if (law) {
        double cg_min = std::numeric_limits<double>::infinity(), cg_max = 0.0;
        double cw_min = std::numeric_limits<double>::infinity(), cw_max = 0.0;
        for (int k = 0; k < tiling.tile_levels; ++k) {
            const double law_u =
                std::exp2((law->beta_g - (std::isinf(pd) ? 0.0 : 1.0 / pd)) * k) * law->psi_g(std::exp2(-static_cast<double>(k)));
            const double law_w =
                std::exp2((law->beta_v - (std::isinf(q) ? 0.0 : 1.0 / q)) * k) * law->psi_v(std::exp2(-static_cast<double>(k)));
            if (res.norms.u[static_cast<size_t>(k)] > 0.0) {
                const double cg = res.norms.u[static_cast<size_t>(k)] / law_u;
                cg_min = std::min(cg_min, cg);
                cg_max = std::max(cg_max, cg);
            }
            if (res.norms.w[static_cast<size_t>(k)] > 0.0) {
                const double cw = res.norms.w[static_cast<size_t>(k)] / law_w;
                cw_min = std::min(cw_min, cw);
                cw_max = std::max(cw_max, cw);
            }
        }
        res.norms.c_star_g = cg_max;
        res.norms.c_star_w = cw_max;
        res.norms.law_violated = (cg_max > 4.0 * cg_min) || (cw_max > 4.0 * cw_min);
    }
    return res;
}

double volterra_norm_l2(const MetricTree& mtree, int resolution) {
    if (resolution < 16)
        throw std::invalid_argument("volterra_norm_l2: resolution must be >= 16 cells per edge");
    const auto& skel = mtree.skeleton();
    struct Cell {
        Vertex edge;
        double t0, t1;
        double g, v;  // averages over the cell (exact for piecewise-constant within the cell)
    };
    std::vector<Cell> cells;
    std::vector<int> first_cell(static_cast<size_t>(skel.vertex_count()), -1);
    for (Vertex c = 0; c < skel.vertex_count(); ++c) {
        if (c == skel.root()) continue;
        first_cell[static_cast<size_t>(c)] = static_cast<int>(cells.size());
        const double len = mtree.edge_length(c);
        // cut at density breakpoints so cell averages are exact values
        std::vector<double> cuts{0.0, len};
        for (double b : mtree.g(c).breaks)
            if (b > 0.0 && b < len) cuts.push_back(b);
        for (double b : mtree.v(c).breaks)
            if (b > 0.0 && b < len) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double seg = cuts[s + 1] - cuts[s];
            const int m = std::max(1, static_cast<int>(std::round(resolution * seg / len)));
            for (int i = 0; i < m; ++i) {
                const double a = cuts[s] + seg * i / m;
                const double b = cuts[s] + seg * (i + 1) / m;
                cells.push_back(Cell{c, a, b, mtree.g(c).value_at(0.5 * (a + b)),
                                     mtree.v(c).value_at(0.5 * (a + b))});
            }
        }
    }
    const int n = static_cast<int>(cells.size());
    if (n == 0) throw std::invalid_argument("volterra_norm_l2: metric tree has no edges");
    if (n > 20000) throw capacity_error("volterra_norm_l2: grid too large");

    // K[i][j] = <chi_i/sqrt(h_i), I(chi_j/sqrt(h_j))>; for cell j strictly
    // before cell i the inner integral is constant, the diagonal carries the
    // triangular half-cell.
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    // ancestor chain per cell: cells fully contained in [x0, start of cell i]
    for (int i = 0; i < n; ++i) {
        const double hi = cells[static_cast<size_t>(i)].t1 - cells[static_cast<size_t>(i)].t0;
        // same-edge earlier cells
        for (int j = first_cell[static_cast<size_t>(cells[static_cast<size_t>(i)].edge)]; j < i; ++j) {
            if (cells[static_cast<size_t>(j)].edge != cells[static_cast<size_t>(i)].edge) break;
            const double hj = cells[static_cast<size_t>(j)].t1 - cells[static_cast<size_t>(j)].t0;
            K(i, j) = std::sqrt(hi * hj) * cells[static_cast<size_t>(i)].v * cells[static_cast<size_t>(j)].g;
        }
        // cells on strictly higher edges of the path
        for (Vertex a = skel.parent(cells[static_cast<size_t>(i)].edge); a != kNoVertex && a != skel.root();
             a = skel.parent(a)) {
            for (int j = first_cell[static_cast<size_t>(a)];
                 j >= 0 && j < n && cells[static_cast<size_t>(j)].edge == a; ++j) {
                const double hj = cells[static_cast<size_t>(j)].t1 - cells[static_cast<size_t>(j)].t0;
                K(i, j) = std::sqrt(hi * hj) * cells[static_cast<size_t>(i)].v * cells[static_cast<size_t>(j)].g;
            }
        }
        K(i, i) = cells[static_cast<size_t>(i)].v * cells[static_cast<size_t>(i)].g * hi / 2.0;
    }
    // power iteration on K^T K
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) x(i) += 1e-3 * std::sin(1.0 + i);
    x.normalize();
    double sigma = 0.0;
    for (int it = 0; it < 600; ++it) {
        Eigen::VectorXd y = K * x;
        Eigen::VectorXd z = K.transpose() * y;
        const double nz = z.norm();
        if (nz == 0.0) return 0.0;
        z /= nz;
        const double s = (K * z).norm();
        if (it > 10 && std::abs(s - sigma) <= 1e-12 * std::max(1.0, s)) {
            sigma = s;
            break;
        }
        sigma = s;
        x = z;
    }
    return sigma;
}

namespace {

std::string density_to_spec(const PiecewiseDensity& d) {
    std::ostringstream os;
    os.precision(17);
    if (d.breaks.size() == 1) {
        os << d.values[0];
        return os.str();
    }
    for (size_t i = 0; i < d.breaks.size(); ++i) {
        if (i) os << ';';
        os << d.values[i] << '@' << d.breaks[i];
    }
    return os.str();
}

PiecewiseDensity density_from_spec(const std::string& spec) {
    PiecewiseDensity d;
    d.breaks.clear();
    d.values.clear();
    if (spec.find('@') == std::string::npos) {
        d.breaks.push_back(0.0);
        d.values.push_back(std::stod(spec));
        return d;
    }
    std::istringstream ss(spec);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        const auto at = piece.find('@');
        if (at == std::string::npos) throw std::invalid_argument("bad density spec: " + spec);
        d.values.push_back(std::stod(piece.substr(0, at)));
        d.breaks.push_back(std::stod(piece.substr(at + 1)));
    }
    return d;
}

}  // namespace

void write_metric_tree(std::ostream& os, const MetricTree& mtree) {
    const auto& skel = mtree.skeleton();
    for (Vertex v = 0; v < skel.vertex_count(); ++v) {
        if (v == skel.root()) {
            os << v << " -1\n";
            continue;
        }
        os << v << ' ' << skel.parent(v) << ' ';
        std::ostringstream num;
        num.precision(17);
        num << mtree.edge_length(v);
        os << num.str() << ' ' << density_to_spec(mtree.g(v)) << ' ' << density_to_spec(mtree.v(v))
           << '\n';
    }
}

MetricTree read_metric_tree(std::istream& is) {
    std::vector<Vertex> parent;
    std::vector<double> len;
    EdgeFunction g, v;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long id = 0, p = 0;
        if (!(ls >> id >> p)) throw std::invalid_argument("metric tree file: malformed line");
        if (id != static_cast<long>(parent.size()))
            throw std::invalid_argument("metric tree file: ids must be consecutive from 0");
        parent.push_back(static_cast<Vertex>(p));
        if (p == -1) {
            len.push_back(0.0);
            g.push_back(PiecewiseDensity::constant(1.0));
            v.push_back(PiecewiseDensity::constant(1.0));
            continue;
        }
        double l = 0.0;
        std::string gs, vs;
        if (!(ls >> l >> gs >> vs))
            throw std::invalid_argument("metric tree file: edge line needs length and densities");
        len.push_back(l);
        g.push_back(density_from_spec(gs));
        v.push_back(density_from_spec(vs));
    }
    return MetricTree(RootedTree::from_parents(std::move(parent)), std::move(len), std::move(g),
                      std::move(v));
}

void write_metric_tree_file(const std::string& path, const MetricTree& mtree) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open for writing: " + path);
    write_metric_tree(os, mtree);
}

MetricTree read_metric_tree_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open for reading: " + path);
    return read_metric_tree(is);
}

}  // namespace nwidths
