#include "nwidths/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nwidths/errors.hpp"

namespace nwidths {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (n_grid.empty()) throw std::invalid_argument("config: n_grid must be non-empty");
    for (size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be strictly increasing");
    if (n_grid.front() < 1) throw std::invalid_argument("config: n_grid entries must be >= 1");
    if (!(window_lo >= 0.0 && window_lo < window_hi && window_hi <= 1.0))
        throw std::invalid_argument("config: fit window must satisfy 0 <= lo < hi <= 1");
}

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// RFC 4180: quote only when the field contains comma, quote or newline.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

SweepResult run_width_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;

    WeightedTreeOperator op = [&] {
        if (config.operator_file) return read_operator_file(*config.operator_file);
        HTreeSpec spec = config.instance;
        spec.seed = config.seed;
        RootedTree tree = generate_h_tree(spec);
        const LayerScheme scheme =
            spec.theta > 0.0 ? LayerScheme::per_level : LayerScheme::dyadic_levels;
        return WeightedTreeOperator::from_law(std::move(tree), config.law, scheme);
    }();
    result.vertex_count = op.tree().vertex_count();

    TreeRegime regime;
    regime.p = config.p;
    regime.q = config.q;
    regime.kappa = config.law.kappa();
    regime.theta = config.instance.theta;
    regime.kind = config.kind;
    regime.lambda = config.instance.lambda;
    regime.psi = SlowFactor::product({config.law.psi_g, config.law.psi_v});
    result.predicted = tree_exponent(regime);

    const bool corner_exact = (config.p == 2.0 && config.q == 2.0);
    std::vector<double> sv;
    if (corner_exact) {
        sv = linear_widths_l2(assemble_matrix(op, config.dense_limit));
    }

    for (int n : config.n_grid) {
        SweepRow row;
        row.n = n;
        row.kind = to_string(config.kind);
        if (corner_exact) {
            row.width = n < static_cast<int>(sv.size()) ? sv[static_cast<size_t>(n)] : 0.0;
        } else {
            row.width = std::numeric_limits<double>::quiet_NaN();  // order-only mode
        }
        row.lower_bound = lower_bound_disjoint(op, config.p, config.q, config.kind, n).value;
        row.upper_bound =
            discrete_upper_scheme(op, config.p, config.q, n, config.dense_limit).achieved_error;
        row.predicted = result.predicted.rate ? result.predicted.rate(static_cast<double>(n))
                                              : std::numeric_limits<double>::quiet_NaN();
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "n,width,lower_bound,upper_bound,kind,predicted\r\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += csv_field(format_double(r.width));
        out += ',';
        out += csv_field(format_double(r.lower_bound));
        out += ',';
        out += csv_field(format_double(r.upper_bound));
        out += ',';
        out += csv_field(r.kind);
        out += ',';
        out += csv_field(format_double(r.predicted));
        out += "\r\n";
    }
    return out;
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
    std::vector<SweepRow> rows;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        SweepRow r;
        std::getline(ls, field, ',');
        r.n = std::stoi(field);
        std::getline(ls, field, ',');
        r.width = std::stod(field);
        std::getline(ls, field, ',');
        r.lower_bound = std::stod(field);
        std::getline(ls, field, ',');
        r.upper_bound = std::stod(field);
        std::getline(ls, r.kind, ',');
        if (std::getline(ls, field, ',')) r.predicted = std::stod(field);
        rows.push_back(std::move(r));
    }
    return rows;
}

FitResult fit_decay(const std::vector<SweepRow>& rows, double window_lo, double window_hi,
                    const ExponentReport& predicted, double tolerance) {
    FitResult fit;
    fit.predicted_exponent = predicted.selected_theta();
    std::vector<std::pair<double, double>> pts;
    const double N = static_cast<double>(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        const double frac = (static_cast<double>(i) + 0.5) / N;
        if (frac < window_lo || frac > window_hi) continue;
        double w = rows[i].width;
        if (!(w > 0.0) || !std::isfinite(w)) continue;
        double sigma = predicted.sigma_at(static_cast<double>(rows[i].n));
        if (!(sigma > 0.0) || !std::isfinite(sigma)) sigma = 1.0;
        if (sigma != 1.0) fit.sigma_correction = true;
        pts.emplace_back(std::log2(static_cast<double>(rows[i].n)), std::log2(w / sigma));
    }
    fit.rows_used = static_cast<int>(pts.size());
    if (pts.size() < 5) throw numeric_error("fit_decay: need >= 5 rows in the fit window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(pts.size());
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) throw numeric_error("fit_decay: degenerate window");
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / m;
    for (auto [x, y] : pts) {
        const double e = y - (fit.intercept + fit.slope * x);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
    fit.pass = std::abs(fit.slope - (-fit.predicted_exponent)) <= tolerance;
    return fit;
}

SlowFactor slow_factor_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return SlowFactor::constant(j.at("value").get<double>());
    if (kind == "power_of_log") return SlowFactor::power_of_log(j.at("exponent").get<double>());
    if (kind == "product") {
        std::vector<SlowFactor> fs;
        for (const auto& e : j.at("factors")) fs.push_back(slow_factor_from_json(e));
        return SlowFactor::product(std::move(fs));
    }
    if (kind == "user_table") {
        return SlowFactor::user_table(j.at("log2_y").get<std::vector<double>>(),
                                      j.at("log2_value").get<std::vector<double>>());
    }
    throw std::invalid_argument("unknown SlowFactor kind: " + kind);
}

json slow_factor_to_json(const SlowFactor& f) {
    json j;
    switch (f.kind()) {
        case SlowFactor::Kind::constant:
            j["kind"] = "constant";
            j["value"] = f.constant_value();
            break;
        case SlowFactor::Kind::power_of_log:
            j["kind"] = "power_of_log";
            j["exponent"] = f.exponent();
            break;
        case SlowFactor::Kind::product: {
            j["kind"] = "product";
            json fs = json::array();
            for (const auto& g : f.factors()) fs.push_back(slow_factor_to_json(g));
            j["factors"] = std::move(fs);
            break;
        }
        case SlowFactor::Kind::user_table:
            j["kind"] = "user_table";
            j["log2_y"] = f.table_log2_y();
            j["log2_value"] = f.table_log2_value();
            break;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("instance")) {
        const auto& inst = j.at("instance");
        c.instance.theta = inst.value("theta", 0.0);
        c.instance.m_star = inst.value("m_star", 1);
        c.instance.depth = inst.value("depth", 1);
        if (inst.contains("lambda")) c.instance.lambda = slow_factor_from_json(inst.at("lambda"));
        c.instance.seed = inst.value("seed", 0ULL);
    }
    if (j.contains("operator_file")) c.operator_file = j.at("operator_file").get<std::string>();
    if (j.contains("law")) {
        const auto& law = j.at("law");
        c.law.kappa_u = law.value("kappa_u", 0.0);
        c.law.kappa_w = law.value("kappa_w", 0.0);
        c.law.m_star = law.value("m_star", 1);
        if (law.contains("psi_g")) c.law.psi_g = slow_factor_from_json(law.at("psi_g"));
        if (law.contains("psi_v")) c.law.psi_v = slow_factor_from_json(law.at("psi_v"));
    }
    c.p = j.value("p", 2.0);
    c.q = j.value("q", 2.0);
    if (j.contains("kind")) c.kind = width_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("n_grid")) {
        c.n_grid = j.at("n_grid").get<std::vector<int>>();
    } else if (j.contains("n_grid_dyadic_max")) {
        for (int n = 2; n <= j.at("n_grid_dyadic_max").get<int>(); n *= 2) c.n_grid.push_back(n);
    }
    if (j.contains("fit_window")) {
        c.window_lo = j.at("fit_window").at(0).get<double>();
        c.window_hi = j.at("fit_window").at(1).get<double>();
    }
    c.tolerance = j.value("tolerance", 0.15);
    c.seed = j.value("seed", c.instance.seed);
    c.dense_limit = j.value("dense_limit", 8192);
    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config: " + path);
    json j;
    is >> j;
    return config_from_json(j);
}

}  // namespace nwidths
