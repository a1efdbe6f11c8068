#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aptkit {

// Bad user input: malformed files, inconsistent model data, out-of-range
// parameters, enumeration caps. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed: non-finite objective, iteration breakdown,
// infeasible linear program. Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// A market segment admits arbitrage. Carries the offending strategy.
class ArbitrageError : public SolverError {
public:
    ArbitrageError(const std::string& msg, std::vector<double> witness)
        : SolverError(msg), witness_(std::move(witness)) {}

    const std::vector<double>& witness() const { return witness_; }

private:
    std::vector<double> witness_;
};

}  // namespace aptkit
