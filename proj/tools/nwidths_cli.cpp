// Command-line harness: h-tree instance generation, width sweeps, exponent
// tables, decay fitting, partition verification and metric discretization.
// Exit codes: 0 pass, 1 assertion fail, 2 input error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "nwidths/asymptotics.hpp"
#include "nwidths/errors.hpp"
#include "nwidths/experiments.hpp"
#include "nwidths/hardy_tree.hpp"
#include "nwidths/metric_tree.hpp"
#include "nwidths/tree.hpp"
#include "nwidths/tree_partition.hpp"

using namespace nwidths;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertFail = 1;
constexpr int kExitInputError = 2;

SlowFactor parse_factor_arg(const std::string& spec) {
    return slow_factor_from_json(json::parse(spec));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot open for writing: " + path);
    os << text;
}

int run(int argc, char** argv) {
    CLI::App app{"widths of weighted summation operator classes on trees"};
    app.require_subcommand(1);

    // ---- generate-tree ----
    auto* gen = app.add_subcommand("generate-tree", "generate an h-regular tree (optionally with weights)");
    double g_theta = 1.0;
    int g_mstar = 1, g_depth = 5;
    std::uint64_t g_seed = 0;
    std::string g_lambda = R"({"kind":"constant","value":1.0})";
    std::string g_out;
    double g_ku = 0.0, g_kw = 0.0;
    bool g_with_weights = false;
    gen->add_option("--theta", g_theta, "mass-law exponent theta in h(t) = t^theta Lambda(t)");
    gen->add_option("--m-star", g_mstar, "dyadic scale step");
    gen->add_option("--depth", g_depth, "tree depth");
    gen->add_option("--seed", g_seed, "seed for deterministic tie-breaking");
    gen->add_option("--lambda", g_lambda, "Lambda as a SlowFactor JSON object");
    gen->add_option("--out", g_out, "output path")->required();
    gen->add_option("--kappa-u", g_ku, "weight law exponent kappa_u (with --with-weights)");
    gen->add_option("--kappa-w", g_kw, "weight law exponent kappa_w (with --with-weights)");
    gen->add_flag("--with-weights", g_with_weights, "emit an operator file (id parent u w)");

    // ---- widths ----
    auto* widths = app.add_subcommand("widths", "width sweep over a dyadic n-grid");
    std::string w_config, w_out;
    widths->add_option("--config", w_config, "experiment config JSON file")->required();
    widths->add_option("--out", w_out, "output CSV path");

    // ---- exponent ----
    auto* expo = app.add_subcommand("exponent", "exponent report for a parameter regime");
    std::string e_params;
    std::string e_model = "tree";
    expo->add_option("--params", e_params, "regime JSON file")->required();
    expo->add_option("--model", e_model, "tree | sobolev | metric | cube");

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "fit a decay exponent to a sweep CSV");
    std::string f_csv;
    double f_lo = 0.25, f_hi = 0.75, f_tol = 0.15, f_predicted = 1.0;
    fit->add_option("--csv", f_csv, "sweep CSV path")->required();
    fit->add_option("--window-lo", f_lo, "fit window lower fraction");
    fit->add_option("--window-hi", f_hi, "fit window upper fraction");
    fit->add_option("--tolerance", f_tol, "pass tolerance on the slope");
    fit->add_option("--predicted", f_predicted, "predicted decay exponent theta (slope -theta)");

    // ---- verify-partition ----
    auto* vp = app.add_subcommand("verify-partition", "run the balanced tree partition and check the bounds");
    std::string vp_tree, vp_out;
    int vp_n = 4, vp_m = 0;
    vp->add_option("--tree", vp_tree, "tree file")->required();
    vp->add_option("--n", vp_n, "target part budget");
    vp->add_option("--m", vp_m, "second budget for the overlap check (0 = skip)");
    vp->add_option("--out", vp_out, "partition output path (vertex_id part_id)");

    // ---- metric-discretize ----
    auto* md = app.add_subcommand("metric-discretize", "reduce a metric tree to a summation operator");
    std::string md_in, md_out;
    double md_p = 2.0, md_q = 2.0;
    md->add_option("--metric", md_in, "metric tree file")->required();
    md->add_option("--p", md_p, "source exponent p");
    md->add_option("--q", md_q, "target exponent q");
    md->add_option("--out", md_out, "operator file output path");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        HTreeSpec spec;
        spec.theta = g_theta;
        spec.m_star = g_mstar;
        spec.depth = g_depth;
        spec.seed = g_seed;
        spec.lambda = parse_factor_arg(g_lambda);
        RootedTree tree = generate_h_tree(spec);
        if (g_with_weights) {
            WeightLaw law;
            law.kappa_u = g_ku;
            law.kappa_w = g_kw;
            law.m_star = g_mstar;
            write_operator_file(g_out, WeightedTreeOperator::from_law(std::move(tree), law));
        } else {
            write_tree_file(g_out, tree);
        }
        std::printf("generated %s: depth %d\n", g_out.c_str(), spec.depth);
        return kExitPass;
    }

    if (widths->parsed()) {
        ExperimentConfig config = load_config_file(w_config);
        SweepResult result = run_width_sweep(config);
        const std::string csv = rows_to_csv(result.rows);
        if (!w_out.empty())
            write_text_file(w_out, csv);
        else
            std::fwrite(csv.data(), 1, csv.size(), stdout);
        std::fprintf(stderr, "sweep: %zu rows on %lld vertices\n", result.rows.size(),
                     result.vertex_count);
        return kExitPass;
    }

    if (expo->parsed()) {
        std::ifstream is(e_params);
        if (!is) throw std::invalid_argument("cannot open params: " + e_params);
        json j;
        is >> j;
        if (e_model == "cube") {
            const auto r = cube_exponent(j.at("p").get<double>(), j.at("q").get<double>(),
                                         j.at("r").get<int>(), j.at("d").get<int>(),
                                         width_kind_from_string(j.value("kind", "kolmogorov")));
            std::printf("theta_pqrd: %.12g\ndegenerate: %s\n", r.theta,
                        r.degenerate ? "true" : "false");
            return kExitPass;
        }
        if (e_model == "tree") {
            TreeRegime regime;
            regime.p = j.value("p", 2.0);
            regime.q = j.value("q", 2.0);
            regime.kappa = j.value("kappa", 1.0);
            regime.theta = j.value("theta", 1.0);
            regime.gamma = j.value("gamma", 0.0);
            regime.alpha = j.value("alpha", 0.0);
            if (j.contains("kind")) regime.kind = width_kind_from_string(j.at("kind").get<std::string>());
            if (j.contains("lambda")) regime.lambda = slow_factor_from_json(j.at("lambda"));
            if (j.contains("psi")) regime.psi = slow_factor_from_json(j.at("psi"));
            if (j.contains("rho")) regime.rho = slow_factor_from_json(j.at("rho"));
            if (j.contains("tau")) regime.tau = slow_factor_from_json(j.at("tau"));
            std::fputs(tree_exponent(regime).serialize().c_str(), stdout);
            return kExitPass;
        }
        RegimeParams params;
        params.p = j.value("p", 2.0);
        params.q = j.value("q", 2.0);
        params.r = j.value("r", 1);
        params.d = j.value("d", 1);
        params.theta = j.value("theta", 0.0);
        params.beta_g = j.value("beta_g", 0.0);
        params.beta_v = j.value("beta_v", 0.0);
        params.alpha_g = j.value("alpha_g", 0.0);
        params.alpha_v = j.value("alpha_v", 0.0);
        params.gamma = j.value("gamma", 0.0);
        if (j.contains("kind")) params.kind = width_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("tau")) params.tau = slow_factor_from_json(j.at("tau"));
        if (j.contains("rho_g")) params.rho_g = slow_factor_from_json(j.at("rho_g"));
        if (j.contains("rho_v")) params.rho_v = slow_factor_from_json(j.at("rho_v"));
        const auto rep = e_model == "metric" ? metric_tree_exponent(params) : sobolev_exponent(params);
        std::fputs(rep.serialize().c_str(), stdout);
        return kExitPass;
    }

    if (fit->parsed()) {
        std::ifstream is(f_csv, std::ios::binary);
        if (!is) throw std::invalid_argument("cannot open csv: " + f_csv);
        std::stringstream buf;
        buf << is.rdbuf();
        const auto rows = rows_from_csv(buf.str());
        ExponentReport predicted;
        predicted.theta = {f_predicted};
        predicted.sigma.push_back({"1", {}});
        predicted.j_star = 1;
        const auto res = fit_decay(rows, f_lo, f_hi, predicted, f_tol);
        std::printf("slope: %.12g\nintercept: %.12g\nr2: %.12g\npredicted: %.12g\npass: %s\n",
                    res.slope, res.intercept, res.r2, -res.predicted_exponent,
                    res.pass ? "true" : "false");
        return res.pass ? kExitPass : kExitAssertFail;
    }

    if (vp->parsed()) {
        RootedTree tree = read_tree_file(vp_tree);
        VertexCost cost;
        cost.weight.assign(static_cast<size_t>(tree.vertex_count()), 1.0);
        const int k = std::max(1, tree.max_branching());
        const auto part = partition_tree(tree, cost, vp_n, k);
        if (!vp_out.empty()) {
            std::ofstream os(vp_out);
            write_partition(os, part);
        }
        const double bound = (k + 2) * cost.total() / vp_n;
        bool ok = is_valid_partition(tree, part);
        double worst = 0.0;
        for (const auto& pp : part.parts) {
            if (pp.size() < 2) continue;
            double phi = 0.0;
            for (Vertex v : pp) phi += cost.weight[static_cast<size_t>(v)];
            worst = std::max(worst, phi);
            if (phi > bound + 1e-9) ok = false;
        }
        if (static_cast<int>(part.parts.size()) > partition_constant(k) * vp_n) ok = false;
        std::printf("parts: %zu (budget %d, C(k)=%d)\nworst multi-vertex cost: %.12g (bound %.12g)\n",
                    part.parts.size(), vp_n, partition_constant(k), worst, bound);
        if (vp_m > 0) {
            const auto rep = check_refinement(tree, cost, vp_n, vp_m);
            std::printf("overlap(%d -> %d): %d (bound %d)\n", vp_n, vp_m, rep.max_overlap, rep.bound);
            if (!rep.within_bound) ok = false;
        }
        std::printf("%s\n", ok ? "PASS" : "FAIL");
        return ok ? kExitPass : kExitAssertFail;
    }

    if (md->parsed()) {
        MetricTree mtree = read_metric_tree_file(md_in);
        const auto res = discretize_to_summation(mtree, level_tiling(mtree), md_p, md_q);
        auto op = WeightedTreeOperator::from_values(res.tile_tree, res.u, res.w);
        if (!md_out.empty()) write_operator_file(md_out, op);
        std::printf("tiles: %d levels, %d vertices\n", static_cast<int>(res.norms.u.size()),
                    res.tile_tree.vertex_count());
        for (size_t k = 0; k < res.norms.u.size(); ++k)
            std::printf("level %zu: u=%.12g w=%.12g\n", k, res.norms.u[k], res.norms.w[k]);
        return kExitPass;
    }

    return kExitInputError;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const nwidths::capacity_error& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return kExitInputError;
    } catch (const nwidths::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitAssertFail;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAssertFail;
    }
}
