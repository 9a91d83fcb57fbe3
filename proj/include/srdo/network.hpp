#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "srdo/coding.hpp"
#include "srdo/linalg.hpp"

namespace srdo {

/// Undirected server graph.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t nodes) : adj_(nodes) {}

    static Graph complete(std::size_t nodes);
    static Graph path(std::size_t nodes);
    static Graph from_edges(std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

    void add_edge(std::size_t a, std::size_t b);
    std::size_t size() const { return adj_.size(); }
    std::size_t degree(std::size_t node) const { return adj_.at(node).size(); }
    const std::vector<std::size_t>& neighbors(std::size_t node) const { return adj_.at(node); }
    bool has_edge(std::size_t a, std::size_t b) const;
    bool connected() const;

private:
    std::vector<std::vector<std::size_t>> adj_;
};

struct Topology {
    std::size_t servers = 1;
    std::size_t partitions = 1;
    // gamma[0]: no partition; gamma[i]: partition i (1-based). Sums to 1.
    std::vector<double> gamma;
    Graph server_graph;
    // server -> partition (1-based, 0 = none); overrides gamma sampling.
    std::optional<std::vector<std::size_t>> fixed_assignment;

    /// Smallest nonzero gamma over the partitions (gamma[0] excluded).
    double gamma_min() const;
    double gamma_max() const;
    /// Sum of gamma over the partitions.
    double gamma_partitions() const;
    void validate() const;
};

/// One server per partition, server i always pulling partition i + 1.
Topology one_to_one_topology(std::size_t servers, Graph graph);

enum class Scenario {
    exact = 1,         // at most s stragglers, full decode
    received_only = 2, // decode from the fresh gradients that arrived
    stale = 3,         // fill missing workers with cached stale gradients
};

struct StragglerModel {
    std::vector<std::size_t> s_per_partition;
    std::size_t window = 1;    // T: every T-step window has a step with <= s stragglers
    std::size_t max_delay = 0; // H
    Scenario scenario = Scenario::exact;
    double straggle_prob = 0.0;
    bool delay_push = true; // draw push staleness; off forces k' = 0

    void validate() const;
};

enum class MixingKind { metropolis, row_stochastic };

struct MixingPolicy {
    MixingKind kind = MixingKind::metropolis;
    double mu = 0.0; // column-sum slack of the row-stochastic variant
    double nu = 0.0; // floor on positive entries

    void validate() const;
};

/// Per-server partition choice at step k: 1-based partition or 0 for none.
std::vector<std::size_t> sample_assignment(const Topology& topology, std::size_t k, Rng& rng);

/// Straggler realization for one pull of a partition with n_workers workers.
/// Each worker straggles independently with straggle_prob. In the exact
/// scenario, and at the first step of every window of length T otherwise,
/// the straggler set is cut down to a uniformly chosen subset of size s.
StragglerSet sample_stragglers(const StragglerModel& model, std::size_t partition, std::size_t n_workers,
                               std::size_t k, Rng& rng);

/// Staleness k' uniform on {0..H}; 0 when push delays are disabled.
std::size_t sample_delay(const StragglerModel& model, Rng& rng);

/// Mixing matrix at step k. Metropolis weights 1/(1 + max(deg_i, deg_j)) on
/// edges with the self-weight taking the remainder; the row-stochastic
/// variant shrinks off-diagonal mass so every column's off-diagonal sum is
/// at most 1 - mu, then restores unit row sums on the diagonal.
Matrix build_w(const MixingPolicy& policy, const Graph& graph, std::size_t k);

} // namespace srdo
