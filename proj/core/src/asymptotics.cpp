#include "nwidths/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "nwidths/errors.hpp"
#include "nwidths/implicit_inverse.hpp"

namespace nwidths {

namespace {
constexpr double kTieTol = 1e-12;
double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
}  // namespace

double RegimeParams::delta() const { return r + d * (inv(q) - inv(p)); }

double RegimeParams::gap() const { return std::max(0.0, inv(q) - inv(p)); }

bool RegimeParams::critical_case() const {
    return std::abs(beta() - (delta() - theta * gap())) <= kTieTol;
}

double TreeRegime::gap() const { return std::max(0.0, inv(q) - inv(p)); }

double ExponentReport::sigma_at(double n) const {
    if (j_star >= 1 && static_cast<size_t>(j_star) <= sigma.size() && sigma[static_cast<size_t>(j_star - 1)].eval)
        return sigma[static_cast<size_t>(j_star - 1)].eval(n);
    return 1.0;
}

std::string ExponentReport::serialize() const {
    std::ostringstream os;
    os.precision(12);
    os << "case: " << case_label << '\n';
    for (size_t j = 0; j < theta.size(); ++j) {
        os << "theta_" << (j + 1) << ": " << theta[j];
        if (j < sigma.size() && !sigma[j].label.empty()) os << "   sigma_" << (j + 1) << ": " << sigma[j].label;
        os << '\n';
    }
    if (degenerate)
        os << "j_star: degenerate\n";
    else if (log_rate)
        os << "j_star: none (logarithmic rate)\n";
    else if (geometric)
        os << "j_star: none (geometric decay)\n";
    else
        os << "j_star: " << j_star << '\n';
    if (rate) {
        os << "rate(2^10): " << rate(1024.0) << '\n';
        os << "rate(2^20): " << rate(1048576.0) << '\n';
    }
    for (const auto& c : validity)
        os << "condition " << c.name << ": " << (c.satisfied ? "ok" : "VIOLATED")
           << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    return os.str();
}

namespace {

// log2 Psi(2^{-uy}) for Psi(t) = |log2 t|^{-alpha} rho(|log2 t|).
double log2_psi_of_scale(double alpha, const SlowFactor& rho_prod, double uy) {
    const double L = std::max(std::abs(uy), 1.0);
    return -alpha * std::log2(L) + rho_prod.log2_eval(std::log2(L));
}

struct Selection {
    int j_star = 0;
    bool degenerate = false;
};

// smallest theta wins; the printed theorems require a strict minimum
Selection select_strict_min(const std::vector<double>& thetas) {
    Selection s;
    size_t best = 0;
    for (size_t j = 1; j < thetas.size(); ++j)
        if (thetas[j] < thetas[best]) best = j;
    for (size_t j = 0; j < thetas.size(); ++j)
        if (j != best && thetas[j] <= thetas[best] + kTieTol) s.degenerate = true;
    s.j_star = static_cast<int>(best) + 1;
    if (s.degenerate) s.j_star = 0;
    return s;
}

std::function<double(double)> power_rate(double theta_sel, std::function<double(double)> sigma) {
    return [theta_sel, sigma = std::move(sigma)](double n) {
        const double s = sigma ? sigma(n) : 1.0;
        return std::pow(n, -theta_sel) * s;
    };
}

void finish_power_report(ExponentReport& rep) {
    const auto sel = select_strict_min(rep.theta);
    rep.j_star = sel.j_star;
    rep.degenerate = sel.degenerate;
    if (!rep.degenerate && rep.j_star >= 1) {
        auto sig = rep.sigma[static_cast<size_t>(rep.j_star - 1)].eval;
        rep.rate = power_rate(rep.theta[static_cast<size_t>(rep.j_star - 1)], sig);
    }
}

void require(std::vector<ConditionCheck>& checks, const std::string& name, bool ok,
             const std::string& detail) {
    checks.push_back(ConditionCheck{name, ok, detail});
    if (!ok) throw regime_error("regime condition failed: " + name + " (" + detail + ")");
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

ExponentReport sobolev_exponent(const RegimeParams& params) {
    ExponentReport rep;
    const double p = params.p, q = params.q;
    const double delta = params.delta();
    const double beta = params.beta();
    const double alpha = params.alpha();
    const double gap = params.gap();
    const double qh = params.q_hat();
    const double theta = params.theta;
    const double d = params.d;

    require(rep.validity, "p in (1, inf]", p > 1.0, "p=" + fmt(p));
    require(rep.validity, "q in [1, inf)", q >= 1.0 && !std::isinf(q), "q=" + fmt(q));
    require(rep.validity, "delta = r + d/q - d/p > 0", delta > 0.0, "delta=" + fmt(delta));
    require(rep.validity, "0 <= theta < d", theta >= 0.0 && theta < d, "theta=" + fmt(theta));
    require(rep.validity, "muck: -beta_v q + d - theta > 0",
            -params.beta_v * q + d - theta > 0.0, "value=" + fmt(-params.beta_v * q + d - theta));
    const double crit_edge = delta - theta * gap;
    require(rep.validity, "beta <= delta - theta (1/q-1/p)_+", beta <= crit_edge + kTieTol,
            "beta=" + fmt(beta) + " edge=" + fmt(crit_edge));
    const bool case_b = params.critical_case();
    if (case_b) {
        require(rep.validity, "g0ag: alpha > (1-gamma)(1/q-1/p)_+",
                alpha > (1.0 - params.gamma) * gap,
                "alpha=" + fmt(alpha) + " bound=" + fmt((1.0 - params.gamma) * gap));
        if (theta == 0.0)
            require(rep.validity, "gamma < 0 when theta = 0", params.gamma < 0.0,
                    "gamma=" + fmt(params.gamma));
    }

    const bool high_branch = p < q && qh > 2.0;
    const double mu = std::min(inv(p) - inv(q), 0.5 - 1.0 / qh);  // only used when p < q
    const SlowFactor rho_prod = SlowFactor::product({params.rho_g, params.rho_v});

    if (theta > 0.0 && !case_b) {
        // sigma of the h-scale branch: Psi(1/y(n)) * phi_{theta,psi_Lambda}^{beta-delta}(n)
        const double gm = params.gamma;
        const SlowFactor tau = params.tau;
        auto inverter = std::make_shared<LogScaleInverter>(theta, [gm, tau](double u) {
            const double L = std::max(std::abs(u), 1.0);
            return -gm * std::log2(L) - tau.log2_eval(std::log2(L));
        });
        const double a = alpha, bd = beta - delta;
        auto sigma_h = [inverter, rho_prod, a, bd, theta](double n) {
            const double x = std::max(n, std::exp2(inverter->log2_x_threshold()));
            const auto r = inverter->invert_log2(std::log2(x));
            return std::exp2(log2_psi_of_scale(a, rho_prod, -r.u) + bd * r.log2_phi);
        };
        if (!high_branch) {
            rep.case_label = "theta>0, case a, q_hat<=2 or p>=q";
            rep.theta = {delta / d - gap, (delta - beta) / theta - gap};
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"Psi(n^{-1/theta} phi^{-1}(n)) phi^{beta-delta}(n)", sigma_h});
        } else {
            rep.case_label = "theta>0, case a, p<q, q_hat>2";
            rep.theta = {delta / d + mu, qh * delta / (2.0 * d), (delta - beta) / theta + mu,
                         qh * (delta - beta) / (2.0 * theta)};
            auto sigma4 = [sigma_h, qh](double n) { return sigma_h(std::pow(n, qh / 2.0)); };
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"Psi(n^{-1/theta} phi^{-1}(n)) phi^{beta-delta}(n)", sigma_h});
            rep.sigma.push_back({"sigma_3(n^{q_hat/2})", sigma4});
        }
        finish_power_report(rep);
        return rep;
    }

    if (theta > 0.0 && case_b) {
        rep.case_label = "theta>0, case b (logarithmic rate)";
        rep.log_rate = true;
        const double e = -alpha + (1.0 - params.gamma) * gap;
        const SlowFactor tau = params.tau;
        rep.rate = [e, rho_prod, tau, gap](double n) {
            const double L = std::max(std::log2(n), 1.0);
            return std::pow(L, e) * rho_prod(L) * std::pow(tau(L), -gap);
        };
        return rep;
    }

    if (theta == 0.0 && case_b) {
        const double og = 1.0 - params.gamma;
        auto inverter = std::make_shared<ImplicitInverse>(og, params.tau.reciprocal());
        const double a = alpha;
        auto sigma_log = [inverter, rho_prod, a](double n) {
            const double x = std::max(n, inverter->x_threshold());
            const auto r = inverter->invert(x);
            return rho_prod(r.y) * std::pow(r.phi_star, -a);
        };
        if (!high_branch) {
            rep.case_label = "theta=0, case b, q_hat<=2 or p>=q";
            rep.theta = {delta / d - gap, alpha / og - gap};
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"rho(n^{1/(1-gamma)} phi(n)) phi^{-alpha}(n)", sigma_log});
        } else {
            rep.case_label = "theta=0, case b, p<q, q_hat>2";
            rep.theta = {delta / d + mu, qh * delta / (2.0 * d), alpha / og + mu,
                         qh * alpha / (2.0 * og)};
            auto sigma4 = [sigma_log, qh](double n) { return sigma_log(std::pow(n, qh / 2.0)); };
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"1", {}});
            rep.sigma.push_back({"rho(n^{1/(1-gamma)} phi(n)) phi^{-alpha}(n)", sigma_log});
            rep.sigma.push_back({"sigma_3(n^{q_hat/2})", sigma4});
        }
        finish_power_report(rep);
        return rep;
    }

    // theta = 0, case a
    if (!high_branch) {
        rep.case_label = "theta=0, case a, q_hat<=2 or p>=q";
        rep.theta = {delta / d - gap};
        rep.sigma.push_back({"1", {}});
        rep.j_star = 1;
        rep.rate = power_rate(rep.theta[0], {});
        return rep;
    }
    rep.case_label = "theta=0, case a, p<q, q_hat>2";
    rep.theta = {delta / d + mu, qh * delta / (2.0 * d)};
    rep.sigma.push_back({"1", {}});
    rep.sigma.push_back({"1", {}});
    finish_power_report(rep);
    return rep;
}

CubeExponent cube_exponent(double p, double q, int r, int d, WidthKind kind) {
    if (!(p > 1.0)) throw std::domain_error("cube_exponent: requires p > 1");
    if (!(q >= 1.0) || std::isinf(q)) throw std::domain_error("cube_exponent: requires 1 <= q < inf");
    if (r < 1 || d < 1) throw std::domain_error("cube_exponent: r, d must be positive integers");
    const double delta = r + d * (inv(q) - inv(p));
    if (!(delta > 0.0)) throw std::domain_error("cube_exponent: requires delta > 0");
    const double qh = hat_q(kind, p, q);
    const double gap = std::max(0.0, inv(q) - inv(p));
    CubeExponent out;
    if (p >= q || qh <= 2.0) {
        out.theta = delta / d - gap;
        return out;
    }
    const double a1 = delta / d + std::min(0.5 - 1.0 / qh, inv(p) - inv(q));
    const double a2 = qh * delta / (2.0 * d);
    out.degenerate = std::abs(a1 - a2) <= kTieTol;
    out.theta = std::min(a1, a2);
    return out;
}

ExponentReport tree_exponent(const TreeRegime& regime) {
    ExponentReport rep;
    const double p = regime.p, q = regime.q;
    const double gap = regime.gap();
    const double qh = regime.q_hat();
    const double theta = regime.theta;
    const double kappa = regime.kappa;

    require(rep.validity, "theta >= 0", theta >= 0.0, "theta=" + fmt(theta));
    const double threshold = -theta * gap;
    require(rep.validity, "kappa >= -theta (1/q-1/p)_+", kappa >= threshold - kTieTol,
            "kappa=" + fmt(kappa) + " threshold=" + fmt(threshold));

    const bool high_branch = p < q && qh > 2.0;
    const double mu = std::min(inv(p) - inv(q), 0.5 - 1.0 / qh);

    if (theta > 0.0 && kappa > threshold + kTieTol) {
        auto inverter =
            std::make_shared<ImplicitInverse>(theta, regime.lambda.reflected().reciprocal());
        const SlowFactor psi = regime.psi;
        auto sigma_h = [inverter, psi, kappa](double n) {
            const double x = std::max(n, inverter->x_threshold());
            const auto r = inverter->invert(x);
            return psi(1.0 / r.y) * std::pow(r.phi_star, -kappa);
        };
        if (!high_branch) {
            rep.case_label = "theta>0, kappa subcritical, q_hat<=2 or p>=q";
            rep.theta = {kappa / theta - gap};
            rep.sigma.push_back({"Psi(n^{-1/theta} phi^{-1}(n)) phi^{-kappa}(n)", sigma_h});
            rep.j_star = 1;
            rep.rate = power_rate(rep.theta[0], sigma_h);
            if (rep.theta[0] <= 0.0)
                rep.validity.push_back(
                    {"decay exponent positive", false, "rate does not decay: exponent=" + fmt(-rep.theta[0])});
            return rep;
        }
        rep.case_label = "theta>0, kappa subcritical, p<q, q_hat>2";
        rep.theta = {kappa / theta + mu, qh * kappa / (2.0 * theta)};
        auto sigma2 = [sigma_h, qh](double n) { return sigma_h(std::pow(n, qh / 2.0)); };
        rep.sigma.push_back({"Psi(n^{-1/theta} phi^{-1}(n)) phi^{-kappa}(n)", sigma_h});
        rep.sigma.push_back({"sigma_1(n^{q_hat/2})", sigma2});
        finish_power_report(rep);
        return rep;
    }

    if (theta > 0.0) {
        // critical coupling: logarithmic rate
        require(rep.validity, "g0ag: alpha > (1-gamma)(1/q-1/p)_+",
                regime.alpha > (1.0 - regime.gamma) * gap,
                "alpha=" + fmt(regime.alpha));
        rep.case_label = "theta>0, kappa critical (logarithmic rate)";
        rep.log_rate = true;
        const double e = -regime.alpha + (1.0 - regime.gamma) * gap;
        const SlowFactor rho = regime.rho, tau = regime.tau;
        rep.rate = [e, rho, tau, gap](double n) {
            const double L = std::max(std::log2(n), 1.0);
            return std::pow(L, e) * rho(L) * std::pow(tau(L), -gap);
        };
        return rep;
    }

    // theta = 0
    if (kappa > kTieTol) {
        rep.case_label = "theta=0, kappa>0: geometric decay";
        rep.geometric = true;
        return rep;
    }
    require(rep.validity, "gamma < 0 when theta = 0", regime.gamma < 0.0, "gamma=" + fmt(regime.gamma));
    require(rep.validity, "g0ag: alpha > (1-gamma)(1/q-1/p)_+",
            regime.alpha > (1.0 - regime.gamma) * gap, "alpha=" + fmt(regime.alpha));
    const double og = 1.0 - regime.gamma;
    auto inverter = std::make_shared<ImplicitInverse>(og, regime.tau.reciprocal());
    const SlowFactor rho = regime.rho;
    const double a = regime.alpha;
    auto sigma_log = [inverter, rho, a](double n) {
        const double x = std::max(n, inverter->x_threshold());
        const auto r = inverter->invert(x);
        return rho(r.y) * std::pow(r.phi_star, -a);
    };
    if (!high_branch) {
        rep.case_label = "theta=0, kappa=0, q_hat<=2 or p>=q";
        rep.theta = {a / og - gap};
        rep.sigma.push_back({"rho(n^{1/(1-gamma)} phi(n)) phi^{-alpha}(n)", sigma_log});
        rep.j_star = 1;
        rep.rate = power_rate(rep.theta[0], sigma_log);
        return rep;
    }
    rep.case_label = "theta=0, kappa=0, p<q, q_hat>2";
    rep.theta = {a / og + mu, qh * a / (2.0 * og)};
    auto sigma2 = [sigma_log, qh](double n) { return sigma_log(std::pow(n, qh / 2.0)); };
    rep.sigma.push_back({"rho(...) phi^{-alpha}", sigma_log});
    rep.sigma.push_back({"sigma_1(n^{q_hat/2})", sigma2});
    finish_power_report(rep);
    return rep;
}

ExponentReport metric_tree_exponent(RegimeParams params) {
    params.r = 1;
    params.d = 1;
    ExponentReport rep = sobolev_exponent(params);
    const bool high_branch = params.p < params.q && params.q_hat() > 2.0;
    if (high_branch && rep.theta.size() == 4) {
        // theta_2 = q_hat delta / 2 exceeds theta_1 for d = 1; the metric
        // theorem selects among {1, 3, 4}
        std::vector<double> th{rep.theta[0], rep.theta[2], rep.theta[3]};
        std::vector<SigmaDescriptor> sg{rep.sigma[0], rep.sigma[2], rep.sigma[3]};
        rep.theta = th;
        rep.sigma = sg;
        rep.case_label += " [metric: j in {1,3,4}]";
        finish_power_report(rep);
    }
    return rep;
}

}  // namespace nwidths
