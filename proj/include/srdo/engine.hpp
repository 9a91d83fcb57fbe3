#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srdo/coding.hpp"
#include "srdo/network.hpp"
#include "srdo/problem.hpp"

namespace srdo {

/// alpha_k = c * (k + offset)^(-exponent), with c = min(1, cap / alpha_0)
/// when a cap on the first step is configured.
struct StepSchedule {
    double offset = 300.0;
    double exponent = 0.55;
    std::optional<double> cap;

    double alpha(std::size_t k) const;
    void validate() const;
};

/// Largest admissible first step sqrt(mu (1 - gamma_0)^2 / (8 L^2)).
double step_cap(double mu, double gamma0, double lipschitz);

struct ServerState {
    Vector x; // estimate x_i(k)
    Vector v; // weighted average v_i(k)
};

enum class DecodeMode { full, stale, partial, hold, idle };

const char* to_string(DecodeMode mode);

/// A coded gradient as delivered to a server.
struct Contribution {
    std::size_t worker = 0;
    Vector gradient;
    Vector point;              // evaluation point v_q(k - k')
    std::size_t source = 0;    // server q that pushed the point
    std::size_t eval_time = 0; // k - k'
};

/// Per-server store of the last coded gradient received from each worker
/// of one worker group.
struct WorkerCache {
    std::vector<std::optional<Contribution>> entries;

    explicit WorkerCache(std::size_t workers = 0) : entries(workers) {}
    void evict(std::size_t k, std::size_t max_delay);
};

struct PullResult {
    std::optional<Vector> gradient;
    DecodeMode mode = DecodeMode::hold;
    std::size_t row = 0;
    Subset subset;
    std::vector<Contribution> used;   // in worker order
    std::vector<std::size_t> missing; // subset members that contributed nothing
};

/// Pull step of one server: decode the partition gradient from the fresh
/// contributions of the connected workers, following the scenario's rule
/// for under-connected pulls. Stale entries older than max_delay are
/// evicted from the cache; in the stale scenario fresh contributions are
/// cached afterwards.
PullResult pull_and_decode(std::size_t k, Scenario scenario, const CodingScheme& scheme,
                           const StragglerSet& connected, const std::map<std::size_t, Contribution>& fresh,
                           WorkerCache& cache, std::size_t max_delay);

/// Coded gradient of worker j: sum_l B[j,l] grad f_l(point).
Vector worker_gradient(const Problem& problem, const CodingScheme& scheme, std::size_t partition, std::size_t worker,
                       const Vector& point);

/// v_i(0) uniform on [-1,1]^N, x_i(0) = v_i(0).
std::vector<ServerState> init_states(const Problem& problem, std::size_t servers, std::uint64_t seed,
                                     bool common_init);

enum class SourceMode {
    uniform,  // each worker receives from a uniformly drawn server
    assigned, // workers receive from the server pulling their group
};

struct PushDelivery {
    std::size_t source = 0;
    std::size_t delay = 0; // clamped to k
};

/// Push step for one worker group: source server and staleness per worker.
std::vector<PushDelivery> push(std::size_t k, std::size_t group, std::size_t workers, std::size_t servers,
                               std::optional<std::size_t> pulling_server, SourceMode mode,
                               const StragglerModel& model, std::uint64_t seed);

struct ServerRecord {
    double x_error = 0.0; // ||x_i(k+1) - x0||
    double v_error = 0.0; // ||v_i(k) - x0||
    double r_norm = 0.0;
    double r_bound = 0.0;
    double eps_norm = 0.0;
    std::size_t group = 0; // 1-based, 0 = none
    std::size_t stragglers = 0;
    DecodeMode mode = DecodeMode::idle;
    bool bound_checked = false;
};

struct IterationRecord {
    std::size_t k = 0;
    double alpha = 0.0;
    std::vector<ServerRecord> servers;
    double ae = 0.0;
    double ce = 0.0;
    double objective = 0.0; // f at the mean estimate
    double max_r = 0.0;
    double max_r_bound = 0.0;
    std::size_t stragglers = 0;
    std::size_t decodes = 0;
    std::size_t bound_violations = 0;
    double v_change = 0.0;      // max_i ||v_i(k+1) - v_i(k)||
    double v_dist_sq = 0.0;     // sum_i ||v_i(k+1) - x*||^2
    double max_grad_norm = 0.0; // max_i ||grad f^(i)(v_i(k))|| over pulling servers
    bool converged = false;
};

enum class RunStatus { completed, converged, diverged };

const char* to_string(RunStatus status);

struct Trace {
    std::vector<IterationRecord> records;
    StepSchedule schedule;
    RunStatus status = RunStatus::completed;
    std::uint64_t seed = 0;
    double lipschitz = 0.0;      // max_i L_i
    double scheme_product = 0.0; // max over groups of ||A||_inf ||B||_2,inf
    double max_grad_norm = 0.0;  // observed gradient bound along the run

    std::size_t bound_violations() const;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t k, double ae, Trace partial)
        : Error(what), k_(k), ae_(ae), partial_(std::move(partial)) {}

    std::size_t k() const noexcept { return k_; }
    double ae() const noexcept { return ae_; }
    const Trace& partial() const noexcept { return partial_; }

private:
    std::size_t k_;
    double ae_;
    Trace partial_;
};

/// A worker group runs one coding scheme over the workers of one partition.
/// Several groups may replicate the same partition.
struct WorkerGroup {
    std::size_t partition = 0;
    CodingScheme scheme;
};

struct RunOptions {
    std::size_t max_iters = 1000;
    double tol = 0.0;
    std::uint64_t seed = 1;
    bool common_init = false;
    bool check_bounds = true;
    SourceMode source = SourceMode::uniform;
    double divergence_ae = 1e12;
};

struct Simulation {
    const Problem* problem = nullptr;
    std::vector<WorkerGroup> groups; // topology partitions index these (1-based)
    Topology topology;
    StragglerModel stragglers;
    MixingPolicy mixing;
    StepSchedule schedule;
    RunOptions options;
};

/// Sequential SRDO driver. Each step runs push, worker coded gradients,
/// pull/decode, the gradient update (or hold) and the consensus mix, and
/// records the perturbation R_i(k) and its analytical bound.
class Engine {
public:
    explicit Engine(Simulation sim);

    std::size_t k() const { return k_; }
    const std::vector<ServerState>& states() const { return states_; }
    void set_states(std::vector<ServerState> states);
    const Simulation& simulation() const { return sim_; }
    const Matrix& mixing() const { return w_; }
    /// Pull results of the last step, per server (empty when idle).
    const std::vector<std::optional<PullResult>>& last_pulls() const { return last_pulls_; }

    IterationRecord step();
    Trace run();

private:
    struct HistoryEntry {
        std::vector<Vector> v;
        double dist_star = 0.0;           // max_q ||v_q - x*||
        std::vector<double> dist_minimizer; // per partition max_q ||v_q - x^(i)||
    };

    const Vector& history_point(std::size_t source, std::size_t delay) const;
    double window_max(std::optional<std::size_t> partition) const;
    HistoryEntry make_entry(std::vector<Vector> v) const;

    Simulation sim_;
    Matrix w_;
    std::vector<ServerState> states_;
    std::deque<HistoryEntry> history_; // oldest first, depth H + 1
    std::vector<std::vector<WorkerCache>> caches_; // [server][group]
    std::vector<std::optional<PullResult>> last_pulls_;
    std::vector<Vector> minimizers_;
    std::vector<double> norm_a_;
    std::vector<double> norm_b_;
    double lipschitz_ = 0.0;
    double x0_norm_ = 1.0;
    std::size_t k_ = 0;
};

Trace run(Simulation sim);

} // namespace srdo
