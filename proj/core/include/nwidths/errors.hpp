#pragma once

#include <stdexcept>
#include <string>

namespace nwidths {

// Instance exceeds a configured size cap (dense matrix limit, tree growth).
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to converge or lost its bracket.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameters fall outside the regime a formula is stated for.
class regime_error : public std::invalid_argument {
public:
    explicit regime_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// (p, q) pair for which no exact norm route exists.
class unsupported_corner_error : public std::invalid_argument {
public:
    explicit unsupported_corner_error(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace nwidths
