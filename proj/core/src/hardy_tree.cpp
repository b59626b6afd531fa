#include "nwidths/hardy_tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nwidths/errors.hpp"

namespace nwidths {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
double pos(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace

double WeightLaw::u_at(int level) const {
    const double u = -static_cast<double>(m_star) * level;
    return std::exp2(-kappa_u * static_cast<double>(m_star) * level + psi_g.log2_eval(u));
}

double WeightLaw::w_at(int level) const {
    const double u = -static_cast<double>(m_star) * level;
    return std::exp2(-kappa_w * static_cast<double>(m_star) * level + psi_v.log2_eval(u));
}

namespace {

std::vector<int> make_layers(const RootedTree& tree, LayerScheme scheme) {
    std::vector<int> layer(static_cast<size_t>(tree.vertex_count()), 0);
    for (Vertex v = 0; v < tree.vertex_count(); ++v) {
        const int j = tree.level(v);
        layer[static_cast<size_t>(v)] =
            scheme == LayerScheme::per_level ? j : static_cast<int>(std::floor(std::log2(j + 1)));
    }
    return layer;
}

}  // namespace

WeightedTreeOperator WeightedTreeOperator::from_law(RootedTree tree, const WeightLaw& law,
                                                    LayerScheme scheme) {
    WeightedTreeOperator op;
    op.u_.resize(static_cast<size_t>(tree.vertex_count()));
    op.w_.resize(static_cast<size_t>(tree.vertex_count()));
    for (Vertex v = 0; v < tree.vertex_count(); ++v) {
        op.u_[static_cast<size_t>(v)] = law.u_at(tree.level(v));
        op.w_[static_cast<size_t>(v)] = law.w_at(tree.level(v));
    }
    op.layer_ = make_layers(tree, scheme);
    op.layer_count_ = 1 + *std::max_element(op.layer_.begin(), op.layer_.end());
    op.tree_ = std::move(tree);
    op.law_ = law;
    return op;
}

WeightedTreeOperator WeightedTreeOperator::from_values(RootedTree tree, std::vector<double> u,
                                                       std::vector<double> w, LayerScheme scheme) {
    if (static_cast<int>(u.size()) != tree.vertex_count() ||
        static_cast<int>(w.size()) != tree.vertex_count())
        throw std::invalid_argument("WeightedTreeOperator: u/w size mismatch");
    for (double x : u)
        if (!(x > 0.0)) throw std::invalid_argument("WeightedTreeOperator: u must be positive");
    for (double x : w)
        if (!(x > 0.0)) throw std::invalid_argument("WeightedTreeOperator: w must be positive");
    WeightedTreeOperator op;
    op.u_ = std::move(u);
    op.w_ = std::move(w);
    op.layer_ = make_layers(tree, scheme);
    op.layer_count_ = 1 + *std::max_element(op.layer_.begin(), op.layer_.end());
    op.tree_ = std::move(tree);
    return op;
}

void WeightedTreeOperator::apply(const std::vector<double>& f, std::vector<double>& out) const {
    const int n = tree_.vertex_count();
    out.assign(static_cast<size_t>(n), 0.0);
    // prefix[v] = sum_{xi' <= v} u f ; ids are breadth-first so parents come first
    for (Vertex v = 0; v < n; ++v) {
        const Vertex p = tree_.parent(v);
        out[static_cast<size_t>(v)] =
            (p == kNoVertex ? 0.0 : out[static_cast<size_t>(p)]) + u_[static_cast<size_t>(v)] * f[static_cast<size_t>(v)];
    }
    for (Vertex v = 0; v < n; ++v) out[static_cast<size_t>(v)] *= w_[static_cast<size_t>(v)];
}

void WeightedTreeOperator::apply_adjoint(const std::vector<double>& g, std::vector<double>& out) const {
    const int n = tree_.vertex_count();
    out.assign(static_cast<size_t>(n), 0.0);
    for (Vertex v = n - 1; v >= 0; --v) {
        out[static_cast<size_t>(v)] += w_[static_cast<size_t>(v)] * g[static_cast<size_t>(v)];
        const Vertex p = tree_.parent(v);
        if (p != kNoVertex) out[static_cast<size_t>(p)] += out[static_cast<size_t>(v)];
    }
    for (Vertex v = 0; v < n; ++v) out[static_cast<size_t>(v)] *= u_[static_cast<size_t>(v)];
}

Eigen::MatrixXd assemble_matrix(const WeightedTreeOperator& op, int dense_limit) {
    const int n = op.tree().vertex_count();
    if (n > dense_limit)
        throw capacity_error("assemble_matrix: instance exceeds the dense limit of " +
                             std::to_string(dense_limit));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Vertex v = 0; v < n; ++v) {
        // walk the ancestor chain; ids only decrease, so M is lower-triangular
        for (Vertex a = v; a != kNoVertex; a = op.tree().parent(a))
            M(v, a) = op.w(v) * op.u(a);
    }
    return M;
}

double hardy_constant(const WeightLaw& law, double p, double q, int j0, double theta,
                      const std::optional<CriticalFactors>& critical) {
    if (j0 < 0) throw std::invalid_argument("hardy_constant: j0 must be >= 0");
    const double gap = pos(inv(q) - inv(p));
    const double kappa = law.kappa();
    const double threshold = -theta * gap;
    if (kappa < threshold - 1e-12)
        throw std::domain_error("hardy_constant: kappa below -theta(1/q - 1/p)_+");
    if (std::abs(kappa - threshold) <= 1e-12) {
        // critical coupling kappa = -theta (1/q - 1/p)_+
        if (!critical)
            throw std::domain_error("hardy_constant: critical coupling needs the slow-factor data");
        const double alpha = critical->alpha();
        if (!(alpha > (1.0 - critical->gamma) * gap))
            throw std::domain_error("hardy_constant: condition alpha > (1-gamma)(1/q-1/p)_+ fails");
        if (j0 == 0) return 1.0;  // log scale clamped at the root
        const double rho =
            critical->rho_g(static_cast<double>(j0)) * critical->rho_v(static_cast<double>(j0));
        return std::exp2(-static_cast<double>(law.m_star) * theta * gap * j0) *
               std::pow(static_cast<double>(j0), -alpha + gap) * rho;
    }
    const double t = -static_cast<double>(law.m_star) * j0;
    return std::exp2(-kappa * static_cast<double>(law.m_star) * j0 + law.psi_g.log2_eval(t) +
                     law.psi_v.log2_eval(t));
}

double operator_norm_corner(const Eigen::MatrixXd& M, double p, double q) {
    if (p == 2.0 && q == 2.0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
        return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
    }
    if (p == 1.0) {
        // extreme points of B_1 are the signed coordinate vectors
        double best = 0.0;
        for (int j = 0; j < M.cols(); ++j) {
            double nrm;
            if (std::isinf(q))
                nrm = M.col(j).cwiseAbs().maxCoeff();
            else
                nrm = std::pow(M.col(j).cwiseAbs().array().pow(q).sum(), 1.0 / q);
            best = std::max(best, nrm);
        }
        return best;
    }
    if (std::isinf(q)) {
        const double pd = p == 1.0 ? kInf : (std::isinf(p) ? 1.0 : p / (p - 1.0));
        double best = 0.0;
        for (int i = 0; i < M.rows(); ++i) {
            double nrm;
            if (std::isinf(pd))
                nrm = M.row(i).cwiseAbs().maxCoeff();
            else if (pd == 1.0)
                nrm = M.row(i).cwiseAbs().sum();
            else
                nrm = std::pow(M.row(i).cwiseAbs().array().pow(pd).sum(), 1.0 / pd);
            best = std::max(best, nrm);
        }
        return best;
    }
    throw unsupported_corner_error("operator_norm_corner: exact norm known only for p=q=2, p=1, or q=inf");
}

double operator_norm_l2(const WeightedTreeOperator& op) {
    const int n = op.tree().vertex_count();
    std::vector<double> x(static_cast<size_t>(n)), y, z;
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = 1.0 + 1e-3 * std::sin(1.0 + i);
    double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (auto& v : x) v /= nx;
    double sigma = 0.0;
    for (int it = 0; it < 2000; ++it) {
        op.apply(x, y);
        op.apply_adjoint(y, z);
        const double nz = std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
        if (nz == 0.0) return 0.0;
        for (auto& v : z) v /= nz;
        op.apply(z, y);
        const double s = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        if (it > 20 && std::abs(s - sigma) <= 1e-13 * std::max(1.0, s)) {
            sigma = s;
            break;
        }
        sigma = s;
        x.swap(z);
    }
    return sigma;
}

std::vector<double> linear_widths_l2(const Eigen::MatrixXd& M) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    return std::vector<double>(sv.data(), sv.data() + sv.size());
}

BudgetPlan make_budget_plan(double n, const BudgetParams& params, const BudgetConfig& config) {
    if (!(n >= config.n_min))
        throw std::domain_error("make_budget_plan: n below the configured minimum");
    if (!(params.gamma_star > 0.0))
        throw std::invalid_argument("make_budget_plan: gamma_star must be > 0");
    const double N = std::log2(n);
    const double k = params.k_star;
    auto log2_nu_bar = [&](int t) {
        return k * params.gamma_star * t + params.psi_star.log2_eval(k * t);
    };
    BudgetPlan plan;
    int t = 1;
    while (t < config.t_max && log2_nu_bar(t) < N) ++t;
    if (t >= config.t_max) throw numeric_error("make_budget_plan: layer cut not found");
    plan.t_star = t;
    const bool discrete = std::isinf(params.delta_star);
    if (discrete) {
        plan.epsilon = config.epsilon0;
        plan.t_hat = plan.t_star;  // delta_star = +inf > lambda_star beta_star
    } else {
        plan.epsilon = std::abs(-params.lambda_star + params.delta_star * params.gamma_star) /
                       (2.0 * params.delta_star);
        plan.t_hat = params.delta_star < params.lambda_star * params.beta_star ? 1 : plan.t_star;
    }
    plan.n_t.resize(static_cast<size_t>(plan.t_star));
    plan.m_t_star.resize(static_cast<size_t>(plan.t_star));
    plan.rank_total = 0;
    for (int tt = 1; tt <= plan.t_star; ++tt) {
        const double expo = N - params.gamma_star * k * tt - plan.epsilon * std::abs(tt - plan.t_hat) -
                            params.psi_star.log2_eval(k * tt);
        const double raw = std::exp2(expo);
        const long long nt = static_cast<long long>(std::ceil(raw - 1e-12));
        plan.n_t[static_cast<size_t>(tt - 1)] = std::max(1LL, nt);
        int m = 0;
        while (expo + m < 0.0 && m < 64) ++m;
        plan.m_t_star[static_cast<size_t>(tt - 1)] = m;
        plan.rank_total += plan.n_t[static_cast<size_t>(tt - 1)];
    }
    return plan;
}

namespace {

// Tail structure of the scheme at a given cut: exact rows + one rank-1 part
// per subtree rooted in the first tail layer.
struct CutInfo {
    long long exact_rows = 0;
    std::vector<Vertex> tail_roots;
};

CutInfo cut_info(const WeightedTreeOperator& op, int cut) {
    CutInfo info;
    const auto& tree = op.tree();
    for (Vertex v = 0; v < tree.vertex_count(); ++v) {
        const int t = op.layer_of(v);
        if (t <= cut)
            ++info.exact_rows;
        else if (t == cut + 1 && (v == tree.root() || op.layer_of(tree.parent(v)) <= cut))
            info.tail_roots.push_back(v);
    }
    // a vertex whose parent jumps layers still roots a tail part
    for (Vertex v = 0; v < tree.vertex_count(); ++v) {
        const int t = op.layer_of(v);
        if (t > cut + 1 && v != tree.root() && op.layer_of(tree.parent(v)) <= cut)
            info.tail_roots.push_back(v);
    }
    std::sort(info.tail_roots.begin(), info.tail_roots.end());
    return info;
}

}  // namespace

UpperSchemeResult discrete_upper_scheme(const WeightedTreeOperator& op, double p, double q,
                                        long long budget, int dense_limit) {
    if (budget < 1) throw std::domain_error("discrete_upper_scheme: rank budget must be >= 1");
    const auto& tree = op.tree();
    const int n = tree.vertex_count();
    const int max_layer = op.layer_count() - 1;

    int cut = -1;
    CutInfo chosen = cut_info(op, -1);
    for (int c = 0; c <= max_layer; ++c) {
        CutInfo info = cut_info(op, c);
        const long long rank = info.exact_rows + static_cast<long long>(info.tail_roots.size());
        if (rank <= budget) {
            cut = c;
            chosen = std::move(info);
        } else {
            break;
        }
    }
    UpperSchemeResult res;
    res.cut_layer = cut;
    res.rank = chosen.exact_rows + static_cast<long long>(chosen.tail_roots.size());
    res.tail_parts = static_cast<int>(chosen.tail_roots.size());
    if (res.rank > budget) {
        // even the coarsest scheme (single root part) must fit
        res.rank = 1;
        res.tail_parts = 1;
    }

    if (cut >= max_layer) {
        res.achieved_error = 0.0;
        res.error_is_exact = true;
        return res;
    }

    const bool corner = (p == 2.0 && q == 2.0) || p == 1.0 || std::isinf(q);
    if (corner && n <= dense_limit) {
        // residual matrix: zero rows in the exact region, within-part Hardy
        // remainder below
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
        std::vector<Vertex> part_root(static_cast<size_t>(n), kNoVertex);
        for (Vertex r : chosen.tail_roots)
            for (Vertex v : tree.subtree_vertices(r)) part_root[static_cast<size_t>(v)] = r;
        for (Vertex v = 0; v < n; ++v) {
            const Vertex r = part_root[static_cast<size_t>(v)];
            if (r == kNoVertex || v == r) continue;  // exact region or matched root
            for (Vertex a = v; a != r; a = tree.parent(a)) R(v, a) = op.w(v) * op.u(a);
        }
        res.achieved_error = operator_norm_corner(R, p, q);
        res.error_is_exact = true;
        return res;
    }

    // theoretical bound: per-part Hardy constants combined in the
    // block-diagonal norm exponent
    if (!op.law())
        throw std::invalid_argument("discrete_upper_scheme: non-corner bound needs a WeightLaw");
    const double gap = pos(inv(q) - inv(p));
    double bound;
    if (gap == 0.0) {
        bound = 0.0;
        for (Vertex r : chosen.tail_roots)
            bound = std::max(bound, hardy_constant(*op.law(), p, q, tree.level(r), 0.0));
    } else {
        double s = 0.0;
        for (Vertex r : chosen.tail_roots)
            s += std::pow(hardy_constant(*op.law(), p, q, tree.level(r), 0.0), 1.0 / gap);
        bound = std::pow(s, gap);
    }
    res.achieved_error = bound;
    res.error_is_exact = false;
    return res;
}

LowerBoundResult lower_bound_disjoint(const WeightedTreeOperator& op, double p, double q,
                                      WidthKind kind, int n) {
    if (n < 0) throw std::invalid_argument("lower_bound_disjoint: n must be >= 0");
    const auto& tree = op.tree();
    LowerBoundResult best;

    // subtree l_q norms of w, bottom-up: ||w||_{l_q(T_v)}
    const int V = tree.vertex_count();
    std::vector<double> wq(static_cast<size_t>(V), 0.0);
    const bool qinf = std::isinf(q);
    for (Vertex v = V - 1; v >= 0; --v) {
        if (qinf) {
            double m = op.w(v);
            for (Vertex c : tree.children(v)) m = std::max(m, wq[static_cast<size_t>(c)]);
            wq[static_cast<size_t>(v)] = m;
        } else {
            double s = std::pow(op.w(v), q);
            for (Vertex c : tree.children(v)) s += wq[static_cast<size_t>(c)];
            wq[static_cast<size_t>(v)] = s;  // q-th powers; root pass converts below
        }
    }

    for (int k = 0; k <= tree.depth(); ++k) {
        const auto& verts = tree.level_vertices(k);
        const int m = static_cast<int>(verts.size());
        if (m < n + 1) continue;
        std::vector<double> M;
        M.reserve(verts.size());
        for (Vertex v : verts) {
            const double nw = qinf ? wq[static_cast<size_t>(v)] : std::pow(wq[static_cast<size_t>(v)], 1.0 / q);
            M.push_back(op.u(v) * nw);
        }
        std::sort(M.rbegin(), M.rend());
        double bound = 0.0;
        if (p > q) {
            // diagonal tail-sum form over all m parts
            DiagonalSpec spec;
            spec.c = M;
            spec.p = p;
            spec.q = q;
            bound = diag_width(spec, n);
        }
        if (m >= 2 * n && n >= 1) {
            const int take = 2 * n;
            const double Mmin = M[static_cast<size_t>(take - 1)];
            bound = std::max(bound, Mmin * ball_width_order(kind, n, take, p, q));
        } else if (p <= q) {
            // common-M form with the m available parts
            const double Mmin = M.back();
            bound = std::max(bound, Mmin * ball_width_order(kind, n, m, p, q));
        }
        if (bound > best.value) {
            best.value = bound;
            best.layer = k;
            best.parts_used = m;
            best.feasible = true;
        }
    }
    return best;
}

void write_operator(std::ostream& os, const WeightedTreeOperator& op) {
    std::ostringstream num;
    num.precision(17);
    for (Vertex v = 0; v < op.tree().vertex_count(); ++v) {
        num.str("");
        num << v << ' ' << op.tree().parent(v) << ' ' << op.u(v) << ' ' << op.w(v);
        os << num.str() << '\n';
    }
}

WeightedTreeOperator read_operator(std::istream& is) {
    std::vector<Vertex> parent;
    std::vector<double> u, w;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        long id = 0, p = 0;
        double uu = 0.0, ww = 0.0;
        if (!(ls >> id >> p >> uu >> ww))
            throw std::invalid_argument("operator file: malformed line '" + line + "'");
        if (id != static_cast<long>(parent.size()))
            throw std::invalid_argument("operator file: ids must be consecutive from 0");
        parent.push_back(static_cast<Vertex>(p));
        u.push_back(uu);
        w.push_back(ww);
    }
    return WeightedTreeOperator::from_values(RootedTree::from_parents(std::move(parent)), std::move(u),
                                             std::move(w));
}

void write_operator_file(const std::string& path, const WeightedTreeOperator& op) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open for writing: " + path);
    write_operator(os, op);
}

WeightedTreeOperator read_operator_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open for reading: " + path);
    return read_operator(is);
}

}  // namespace nwidths
