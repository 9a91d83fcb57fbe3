#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace srdo {

// Base of every structured error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    RankDeficientError(const std::string& what, double pivot_ratio)
        : Error(what), pivot_ratio_(pivot_ratio) {}

    double pivot_ratio() const noexcept { return pivot_ratio_; }

private:
    double pivot_ratio_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double best_estimate)
        : Error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

// Raised when a coding scheme cannot be built or fails its decode fit.
class SchemeError : public Error {
public:
    SchemeError(const std::string& what, std::vector<std::size_t> subset = {})
        : Error(what), subset_(std::move(subset)) {}

    const std::vector<std::size_t>& subset() const noexcept { return subset_; }

private:
    std::vector<std::size_t> subset_;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace srdo
