#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "srdo/engine.hpp"

namespace srdo {

/// Parsed run configuration. Every field has a default; see README for the
/// file grammar.
struct RunConfig {
    // [problem]
    ProblemShape shape{250, 20, 5, 5, 0.0, 0.0}; // g_scale 0 means 1/sqrt(M)
    std::optional<std::uint64_t> problem_seed;

    // [coding]
    std::vector<std::size_t> stragglers{0}; // s per partition; one value applies to all
    std::optional<std::uint64_t> coding_seed;

    // [topology]
    std::size_t servers = 5;
    std::vector<std::size_t> groups; // partition (1-based) served by each worker group; empty = one per partition
    std::vector<double> gamma;       // p + 1 entries; empty with no assignment = uniform over groups, gamma_0 = 0
    std::optional<std::vector<std::size_t>> assignment;
    std::string graph = "complete";
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    MixingPolicy mixing;
    SourceMode source = SourceMode::uniform;
    bool common_init = false;

    // [stragglers]
    StragglerModel model;

    // [schedule]
    StepSchedule schedule;
    bool cap_auto = false; // alpha cap from mu, gamma_0 and L

    // [control]
    std::size_t max_iters = 1000;
    double tol = 0.0;
    std::vector<std::uint64_t> seeds{1};
    std::string output = "out";
    bool check_bounds = true;
    bool sweep = false;
    double divergence_ae = 1e12;

    std::vector<std::string> warnings;

    double g_scale() const;
    std::size_t group_count() const;
};

/// Parses and validates a config; throws ConfigError carrying the line of
/// the first problem (0 for cross-field errors).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Human-readable echo of the effective configuration.
std::string describe(const RunConfig& config);

} // namespace srdo
