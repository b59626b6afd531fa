#include "nwidths/slow_factor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nwidths {

SlowFactor::SlowFactor() = default;

SlowFactor SlowFactor::constant(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("SlowFactor::constant: value must be > 0");
    SlowFactor f;
    f.kind_ = Kind::constant;
    f.value_ = value;
    return f;
}

SlowFactor SlowFactor::power_of_log(double exponent) {
    SlowFactor f;
    f.kind_ = Kind::power_of_log;
    f.value_ = exponent;
    return f;
}

SlowFactor SlowFactor::product(std::vector<SlowFactor> factors) {
    SlowFactor f;
    f.kind_ = Kind::product;
    f.factors_ = std::move(factors);
    return f;
}

SlowFactor SlowFactor::user_table(std::vector<double> log2_y, std::vector<double> log2_value) {
    if (log2_y.size() != log2_value.size() || log2_y.size() < 2)
        throw std::invalid_argument("SlowFactor::user_table: need >= 2 samples of equal length");
    if (!std::is_sorted(log2_y.begin(), log2_y.end()))
        throw std::invalid_argument("SlowFactor::user_table: log2_y must be ascending");
    SlowFactor f;
    f.kind_ = Kind::user_table;
    f.table_x_ = std::move(log2_y);
    f.table_v_ = std::move(log2_value);
    return f;
}

double SlowFactor::log2_eval(double u) const {
    switch (kind_) {
        case Kind::constant:
            return std::log2(value_);
        case Kind::power_of_log:
            return value_ * std::log2(std::max(std::abs(u), 1.0));
        case Kind::product: {
            double s = 0.0;
            for (const auto& f : factors_) s += f.log2_eval(u);
            return s;
        }
        case Kind::user_table: {
            if (u <= table_x_.front()) return table_v_.front();
            if (u >= table_x_.back()) return table_v_.back();
            auto it = std::upper_bound(table_x_.begin(), table_x_.end(), u);
            size_t i = static_cast<size_t>(it - table_x_.begin());
            double x0 = table_x_[i - 1], x1 = table_x_[i];
            double w = (u - x0) / (x1 - x0);
            return table_v_[i - 1] * (1.0 - w) + table_v_[i] * w;
        }
    }
    return 0.0;
}

double SlowFactor::operator()(double y) const {
    if (!(y > 0.0)) throw std::domain_error("SlowFactor: argument must be > 0");
    return std::exp2(log2_eval(std::log2(y)));
}

SlowFactor SlowFactor::reciprocal() const {
    switch (kind_) {
        case Kind::constant:
            return constant(1.0 / value_);
        case Kind::power_of_log:
            return power_of_log(-value_);
        case Kind::product: {
            std::vector<SlowFactor> fs;
            fs.reserve(factors_.size());
            for (const auto& f : factors_) fs.push_back(f.reciprocal());
            return product(std::move(fs));
        }
        case Kind::user_table: {
            std::vector<double> v = table_v_;
            for (double& x : v) x = -x;
            return user_table(table_x_, std::move(v));
        }
    }
    return SlowFactor();
}

SlowFactor SlowFactor::reflected() const {
    switch (kind_) {
        case Kind::constant:
            return *this;
        case Kind::power_of_log:
            return *this;  // |log(1/y)| = |log y|
        case Kind::product: {
            std::vector<SlowFactor> fs;
            fs.reserve(factors_.size());
            for (const auto& f : factors_) fs.push_back(f.reflected());
            return product(std::move(fs));
        }
        case Kind::user_table: {
            std::vector<double> x(table_x_.rbegin(), table_x_.rend());
            std::vector<double> v(table_v_.rbegin(), table_v_.rend());
            for (double& t : x) t = -t;
            return user_table(std::move(x), std::move(v));
        }
    }
    return SlowFactor();
}

double SlowFactor::derivative_ratio(double u) const {
    const double h = 1e-4 * std::max(1.0, std::abs(u) * 1e-3);
    return (log2_eval(u + h) - log2_eval(u - h)) / (2.0 * h);
}

std::string SlowFactor::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::constant:
            os << value_;
            break;
        case Kind::power_of_log:
            os << "|log y|^" << value_;
            break;
        case Kind::product: {
            os << "(";
            for (size_t i = 0; i < factors_.size(); ++i) {
                if (i) os << " * ";
                os << factors_[i].describe();
            }
            os << ")";
            break;
        }
        case Kind::user_table:
            os << "table[" << table_x_.size() << "]";
            break;
    }
    return os.str();
}

double eval_h(double theta, const SlowFactor& lam, double t) {
    if (!(t > 0.0)) throw std::domain_error("eval_h: t must be > 0");
    return std::exp2(log2_eval_h(theta, lam, std::log2(t)));
}

double log2_eval_h(double theta, const SlowFactor& lam, double u) {
    return theta * u + lam.log2_eval(u);
}

SlowVariationReport check_slow_variation(const SlowFactor& f, double epsilon, int k_max,
                                         double budget) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("check_slow_variation: epsilon must be > 0");
    SlowVariationReport rep;
    rep.epsilon = epsilon;
    rep.k_max = k_max;
    rep.budget = budget;
    for (int j = 2; j <= 40; j += 2) {
        const double base = f.log2_eval(j);
        for (int i = 1; i <= k_max && j + i <= 60; ++i) {
            const double log2_r = f.log2_eval(j + i) - base;
            // f(ty)/f(y) <= c_upper * t^eps  and  >= (1/c_lower) * t^-eps
            const double need_up = std::exp2(log2_r - epsilon * i);
            const double need_lo = std::exp2(-epsilon * i - log2_r);
            if (need_up > rep.c_upper) {
                rep.c_upper = need_up;
                rep.worst_t = std::exp2(i);
                rep.worst_y = std::exp2(j);
            }
            if (need_lo > rep.c_lower) {
                rep.c_lower = need_lo;
                rep.worst_t = std::exp2(i);
                rep.worst_y = std::exp2(j);
            }
        }
    }
    rep.violated = std::max(rep.c_upper, rep.c_lower) > budget;
    return rep;
}

}  // namespace nwidths
