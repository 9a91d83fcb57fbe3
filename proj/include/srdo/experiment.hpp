#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srdo/config.hpp"
#include "srdo/metrics.hpp"

namespace srdo {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitDivergence = 3,
    kExitBoundViolation = 4,
};

/// A ready-to-run simulation for one seed; owns the problem it points at.
struct Experiment {
    std::shared_ptr<const Problem> problem;
    Simulation sim;
};

struct BuildOptions {
    std::optional<Scenario> scenario; // overrides the configured scenario
    bool corrupt_scheme = false;      // zero one encode entry of the first group
};

/// Problem and coding seeds fall back to streams derived from the run seed.
Experiment build_experiment(const RunConfig& config, std::uint64_t seed, const BuildOptions& options = {});

/// Runs one seed; a divergence is caught and returned as a partial trace.
Trace run_seed(const Experiment& experiment);

struct ExperimentOptions {
    std::size_t jobs = 1;
    bool sweep = false;
    bool write_files = true;
    bool corrupt_scheme = false;
};

struct ExperimentResult {
    int exit_code = kExitOk;
    std::vector<Trace> traces; // configured scenario, seed order
    std::optional<OrderingReport> ordering;
    std::array<std::vector<Trace>, 3> sweep;
};

/// Writes trace_<seed>.csv and summary.csv under config.output (one
/// directory per scenario plus ordering.csv when sweeping).
ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options = {});

struct VerifyReport {
    int exit_code = kExitOk;
    double scheme_deviation = 0.0;
    std::size_t r_violations = 0;
    std::size_t r_checks = 0;
    std::size_t diverged = 0;
    std::size_t envelope_exceeded = 0; // diagnostic only
    std::vector<std::string> lines;
};

/// Runs every seed with the R-bound checker on and reports the hard checks:
/// scheme condition AB = 1, zero R-bound violations, no divergence.
VerifyReport verify_bounds(const RunConfig& config, const ExperimentOptions& options = {});

/// Applies SRDO_SEED_OVERRIDE (comma list or a..b range) when set.
void apply_seed_override(RunConfig& config);

} // namespace srdo
