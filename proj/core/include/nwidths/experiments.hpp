#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nwidths/asymptotics.hpp"
#include "nwidths/hardy_tree.hpp"
#include "nwidths/tree.hpp"

namespace nwidths {

/// One width-sweep configuration: instance, weight law, norm pair, width
/// kind, the dyadic n-grid and the fit window.
struct ExperimentConfig {
    HTreeSpec instance;
    std::optional<std::string> operator_file;  // overrides the generated instance
    WeightLaw law;
    double p = 2.0, q = 2.0;
    WidthKind kind = WidthKind::linear;
    std::vector<int> n_grid;          // strictly increasing
    double window_lo = 0.25, window_hi = 0.75;
    double tolerance = 0.15;
    std::uint64_t seed = 0;
    int dense_limit = 8192;

    void validate() const;
};

struct SweepRow {
    int n = 0;
    double width = 0.0;        // exact corner width
    double lower_bound = 0.0;  // disjoint-subtree harness
    double upper_bound = 0.0;  // discrete scheme achieved error at budget n
    double predicted = 0.0;    // rate(n) of the exponent report
    std::string kind;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    ExponentReport predicted;
    long long vertex_count = 0;
};

/// Builds (or loads) the operator, computes per-n exact widths at the
/// corner, lower bounds, scheme upper values and the predicted rate.
SweepResult run_width_sweep(const ExperimentConfig& config);

/// CSV with header n,width,lower_bound,upper_bound,kind,predicted
/// (RFC 4180; numeric fields never need quoting).
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_csv(const std::string& text);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double predicted_exponent = 0.0;
    bool sigma_correction = false;
    bool pass = false;
    int rows_used = 0;
};

/// Least-squares slope of log2(width / sigma(n)) against log2 n over the
/// window (a fraction of the grid); pass iff |slope + predicted_exponent|
/// <= tolerance.  Requires >= 5 rows in the window.
FitResult fit_decay(const std::vector<SweepRow>& rows, double window_lo, double window_hi,
                    const ExponentReport& predicted, double tolerance);

/// JSON (de)serialization of configs and slow factors; schema in README.
SlowFactor slow_factor_from_json(const nlohmann::json& j);
nlohmann::json slow_factor_to_json(const SlowFactor& f);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace nwidths
