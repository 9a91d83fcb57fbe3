#include "srdo/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace srdo {

Graph Graph::complete(std::size_t nodes) {
    Graph g(nodes);
    for (std::size_t a = 0; a < nodes; ++a)
        for (std::size_t b = a + 1; b < nodes; ++b) g.add_edge(a, b);
    return g;
}

Graph Graph::path(std::size_t nodes) {
    Graph g(nodes);
    for (std::size_t a = 0; a + 1 < nodes; ++a) g.add_edge(a, a + 1);
    return g;
}

Graph Graph::from_edges(std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    Graph g(nodes);
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    return g;
}

void Graph::add_edge(std::size_t a, std::size_t b) {
    if (a >= size() || b >= size()) throw TopologyError("graph: edge endpoint out of range");
    if (a == b || has_edge(a, b)) return;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    std::sort(adj_[a].begin(), adj_[a].end());
    std::sort(adj_[b].begin(), adj_[b].end());
}

bool Graph::has_edge(std::size_t a, std::size_t b) const {
    const auto& n = adj_.at(a);
    return std::binary_search(n.begin(), n.end(), b);
}

bool Graph::connected() const {
    if (adj_.empty()) return false;
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        for (std::size_t next : adj_[node]) {
            if (!seen[next]) {
                seen[next] = true;
                ++count;
                stack.push_back(next);
            }
        }
    }
    return count == size();
}

double Topology::gamma_min() const {
    double best = 0.0;
    for (std::size_t i = 1; i < gamma.size(); ++i)
        if (gamma[i] > 0.0 && (best == 0.0 || gamma[i] < best)) best = gamma[i];
    return best;
}

double Topology::gamma_max() const {
    double best = 0.0;
    for (std::size_t i = 1; i < gamma.size(); ++i) best = std::max(best, gamma[i]);
    return best;
}

double Topology::gamma_partitions() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < gamma.size(); ++i) sum += gamma[i];
    return sum;
}

void Topology::validate() const {
    if (servers == 0 || partitions == 0) throw TopologyError("topology: need at least one server and partition");
    if (server_graph.size() != servers) throw TopologyError("topology: server graph size mismatch");
    if (!server_graph.connected()) throw TopologyError("topology: server graph is disconnected");
    if (gamma.size() != partitions + 1) throw TopologyError("topology: gamma must have p + 1 entries");
    double sum = 0.0;
    for (double g : gamma) {
        if (!(g >= 0.0)) throw TopologyError("topology: negative gamma entry");
        sum += g;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw TopologyError("topology: gamma does not sum to 1");
    if (fixed_assignment) {
        if (fixed_assignment->size() != servers) throw TopologyError("topology: fixed assignment size mismatch");
        for (std::size_t a : *fixed_assignment)
            if (a > partitions) throw TopologyError("topology: fixed assignment names an unknown partition");
    }
}

Topology one_to_one_topology(std::size_t servers, Graph graph) {
    Topology t;
    t.servers = servers;
    t.partitions = servers;
    t.gamma.assign(servers + 1, 1.0 / static_cast<double>(servers));
    t.gamma[0] = 0.0;
    t.server_graph = std::move(graph);
    std::vector<std::size_t> assignment(servers);
    std::iota(assignment.begin(), assignment.end(), std::size_t{1});
    t.fixed_assignment = std::move(assignment);
    return t;
}

void StragglerModel::validate() const {
    if (!(straggle_prob >= 0.0 && straggle_prob <= 1.0)) {
        throw TopologyError("stragglers: straggle_prob must lie in [0, 1]");
    }
    if (window == 0) throw TopologyError("stragglers: window T must be at least 1");
}

void MixingPolicy::validate() const {
    if (!(mu >= 0.0 && mu < 1.0)) throw TopologyError("mixing: mu must lie in [0, 1)");
    if (!(nu >= 0.0 && nu < 1.0)) throw TopologyError("mixing: nu must lie in [0, 1)");
}

std::vector<std::size_t> sample_assignment(const Topology& topology, std::size_t /*k*/, Rng& rng) {
    if (topology.fixed_assignment) return *topology.fixed_assignment;
    std::vector<std::size_t> out(topology.servers, 0);
    for (std::size_t i = 0; i < topology.servers; ++i) {
        const double u = rng.uniform();
        double cumulative = 0.0;
        std::size_t pick = topology.gamma.size() - 1;
        for (std::size_t c = 0; c < topology.gamma.size(); ++c) {
            cumulative += topology.gamma[c];
            if (u < cumulative) {
                pick = c;
                break;
            }
        }
        // guard against rounding in the cumulative sum landing on a zero-probability tail
        while (pick > 0 && topology.gamma[pick] == 0.0) --pick;
        out[i] = pick;
    }
    return out;
}

StragglerSet sample_stragglers(const StragglerModel& model, std::size_t partition, std::size_t n_workers,
                               std::size_t k, Rng& rng) {
    const std::size_t s = model.s_per_partition.empty() ? 0 : model.s_per_partition.at(partition);
    std::vector<std::size_t> stragglers;
    for (std::size_t j = 0; j < n_workers; ++j)
        if (rng.uniform() < model.straggle_prob) stragglers.push_back(j);

    const bool clamp = model.scenario == Scenario::exact || k % model.window == 0;
    if (clamp && stragglers.size() > s) {
        // partial Fisher-Yates: keep a uniform s-subset of the drawn stragglers
        for (std::size_t t = 0; t < s; ++t) {
            const std::size_t pick = t + static_cast<std::size_t>(rng.below(stragglers.size() - t));
            std::swap(stragglers[t], stragglers[pick]);
        }
        stragglers.resize(s);
        std::sort(stragglers.begin(), stragglers.end());
    }
    return StragglerSet::from_stragglers(n_workers, stragglers);
}

std::size_t sample_delay(const StragglerModel& model, Rng& rng) {
    if (!model.delay_push || model.max_delay == 0) return 0;
    return static_cast<std::size_t>(rng.below(model.max_delay + 1));
}

Matrix build_w(const MixingPolicy& policy, const Graph& graph, std::size_t /*k*/) {
    if (!graph.connected()) throw TopologyError("build_w: server graph is disconnected");
    const auto n = static_cast<Eigen::Index>(graph.size());
    Matrix w = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j : graph.neighbors(static_cast<std::size_t>(i))) {
            const auto di = graph.degree(static_cast<std::size_t>(i));
            const auto dj = graph.degree(j);
            w(i, static_cast<Eigen::Index>(j)) = 1.0 / (1.0 + static_cast<double>(std::max(di, dj)));
        }
    }

    if (policy.kind == MixingKind::row_stochastic) {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) worst = std::max(worst, w.col(j).sum());
        const double budget = 1.0 - policy.mu;
        if (worst > budget) w *= budget / worst;
    }

    for (Eigen::Index i = 0; i < n; ++i) w(i, i) = 1.0 - w.row(i).sum();

    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (w(i, j) > 0.0 && w(i, j) < policy.nu) {
                throw TopologyError("build_w: weight " + std::to_string(w(i, j)) + " below the nu floor");
            }
    return w;
}

} // namespace srdo
