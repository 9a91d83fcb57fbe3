#include "srdo/engine.hpp"

#include <algorithm>
#include <cmath>

#include "srdo/metrics.hpp"

namespace srdo {

namespace {

// Sub-stream tags: a draw depends on (seed, tag, k, index) only, so runs that
// differ in scenario still share assignment, push and straggler realizations.
enum StreamTag : std::uint64_t {
    kStreamInit = 1,
    kStreamAssign = 2,
    kStreamPush = 3,
    kStreamStraggle = 4,
};

bool finite(const std::vector<ServerState>& states) {
    for (const auto& s : states)
        if (!all_finite(s.x) || !all_finite(s.v)) return false;
    return true;
}

} // namespace

double StepSchedule::alpha(std::size_t k) const {
    double scale = 1.0;
    if (cap) {
        const double first = std::pow(offset, -exponent);
        scale = std::min(1.0, *cap / first);
    }
    return scale * std::pow(static_cast<double>(k) + offset, -exponent);
}

void StepSchedule::validate() const {
    if (!(exponent > 0.0 && exponent <= 1.0)) throw Error("schedule: theta must lie in (0, 1]");
    if (!(offset > 0.0)) throw Error("schedule: offset a must be positive");
    if (cap && !(*cap > 0.0)) throw Error("schedule: alpha cap must be positive");
}

double step_cap(double mu, double gamma0, double lipschitz) {
    return std::sqrt(mu * (1.0 - gamma0) * (1.0 - gamma0) / (8.0 * lipschitz * lipschitz));
}

const char* to_string(DecodeMode mode) {
    switch (mode) {
    case DecodeMode::full: return "full";
    case DecodeMode::stale: return "stale";
    case DecodeMode::partial: return "partial";
    case DecodeMode::hold: return "hold";
    case DecodeMode::idle: return "idle";
    }
    return "?";
}

const char* to_string(RunStatus status) {
    switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::converged: return "converged";
    case RunStatus::diverged: return "diverged";
    }
    return "?";
}

std::size_t Trace::bound_violations() const {
    std::size_t total = 0;
    for (const auto& r : records) total += r.bound_violations;
    return total;
}

void WorkerCache::evict(std::size_t k, std::size_t max_delay) {
    for (auto& entry : entries)
        if (entry && k - entry->eval_time > max_delay) entry.reset();
}

PullResult pull_and_decode(std::size_t k, Scenario scenario, const CodingScheme& scheme,
                           const StragglerSet& connected, const std::map<std::size_t, Contribution>& fresh,
                           WorkerCache& cache, std::size_t max_delay) {
    cache.evict(k, max_delay);

    PullResult result;
    const DecodeSelection sel = select_decode_row(scheme, connected);
    result.row = sel.row;
    result.subset = sel.subset;

    const bool enough = connected.connected.size() >= scheme.subset_size();
    if (scenario == Scenario::exact && !enough) {
        throw Error("pull_and_decode: exact scenario with more than s stragglers");
    }

    for (std::size_t j : sel.subset) {
        if (connected.contains(j)) {
            const auto it = fresh.find(j);
            if (it == fresh.end()) throw Error("pull_and_decode: missing fresh gradient of worker " + std::to_string(j));
            result.used.push_back(it->second);
        } else if (scenario == Scenario::stale && cache.entries.at(j)) {
            result.used.push_back(*cache.entries[j]);
        } else {
            result.missing.push_back(j);
        }
    }

    if (scenario == Scenario::stale) {
        for (const auto& [j, c] : fresh) cache.entries.at(j) = c;
    }

    if (result.used.empty()) {
        result.mode = DecodeMode::hold;
        return result;
    }
    if (!result.missing.empty()) {
        result.mode = DecodeMode::partial;
    } else if (!enough) {
        result.mode = DecodeMode::stale;
    } else {
        result.mode = DecodeMode::full;
    }

    Vector sum = Vector::Zero(result.used.front().gradient.size());
    for (const auto& c : result.used)
        sum += scheme.decode(static_cast<Eigen::Index>(result.row), static_cast<Eigen::Index>(c.worker)) * c.gradient;
    result.gradient = std::move(sum);
    return result;
}

Vector worker_gradient(const Problem& problem, const CodingScheme& scheme, std::size_t partition, std::size_t worker,
                       const Vector& point) {
    Vector sum = Vector::Zero(problem.dim());
    const auto row = static_cast<Eigen::Index>(worker);
    for (Eigen::Index l = 0; l < scheme.encode.cols(); ++l) {
        const double b = scheme.encode(row, l);
        if (b != 0.0) sum += b * sub_gradient(problem, partition, static_cast<std::size_t>(l), point);
    }
    return sum;
}

std::vector<ServerState> init_states(const Problem& problem, std::size_t servers, std::uint64_t seed,
                                     bool common_init) {
    std::vector<ServerState> states(servers);
    for (std::size_t i = 0; i < servers; ++i) {
        Rng rng = Rng::derive(seed, {kStreamInit, common_init ? 0 : i});
        states[i].v = uniform_vector(problem.dim(), -1.0, 1.0, rng);
        states[i].x = states[i].v;
    }
    return states;
}

std::vector<PushDelivery> push(std::size_t k, std::size_t group, std::size_t workers, std::size_t servers,
                               std::optional<std::size_t> pulling_server, SourceMode mode,
                               const StragglerModel& model, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, {kStreamPush, k, group});
    std::vector<PushDelivery> out(workers);
    for (auto& d : out) {
        const auto drawn = static_cast<std::size_t>(rng.below(servers));
        d.source = (mode == SourceMode::assigned && pulling_server) ? *pulling_server : drawn;
        d.delay = std::min(sample_delay(model, rng), k);
    }
    return out;
}

Engine::Engine(Simulation sim) : sim_(std::move(sim)) {
    if (!sim_.problem) throw Error("engine: no problem");
    const Problem& problem = *sim_.problem;
    sim_.topology.validate();
    sim_.stragglers.validate();
    sim_.mixing.validate();
    sim_.schedule.validate();
    if (sim_.groups.size() != sim_.topology.partitions) {
        throw Error("engine: topology names " + std::to_string(sim_.topology.partitions) + " partitions but " +
                    std::to_string(sim_.groups.size()) + " worker groups are configured");
    }
    for (const auto& g : sim_.groups) {
        if (g.partition >= problem.partitions.size()) throw Error("engine: worker group names an unknown partition");
        if (g.scheme.n_workers != problem.workers(g.partition)) {
            throw Error("engine: scheme size does not match the partition's worker count");
        }
        norm_a_.push_back(norm_inf_rows(g.scheme.decode));
        norm_b_.push_back(norm_2inf_rows(g.scheme.encode));
    }
    for (const auto& part : problem.partitions) lipschitz_ = std::max(lipschitz_, part.lipschitz);
    if (sim_.options.check_bounds) {
        for (std::size_t i = 0; i < problem.partitions.size(); ++i) minimizers_.push_back(partition_minimizer(problem, i));
    }
    x0_norm_ = problem.x0.norm();
    if (!(x0_norm_ > 0.0)) throw Error("engine: planted solution has zero norm");

    w_ = build_w(sim_.mixing, sim_.topology.server_graph, 0);
    states_ = init_states(problem, sim_.topology.servers, sim_.options.seed, sim_.options.common_init);
    set_states(states_);
}

void Engine::set_states(std::vector<ServerState> states) {
    if (states.size() != sim_.topology.servers) throw Error("engine: state count mismatch");
    states_ = std::move(states);
    history_.clear();
    std::vector<Vector> v;
    for (const auto& s : states_) v.push_back(s.v);
    history_.push_back(make_entry(std::move(v)));
    caches_.assign(sim_.topology.servers, {});
    for (auto& per_server : caches_)
        for (const auto& g : sim_.groups) per_server.emplace_back(g.scheme.n_workers);
    last_pulls_.assign(sim_.topology.servers, std::nullopt);
}

Engine::HistoryEntry Engine::make_entry(std::vector<Vector> v) const {
    HistoryEntry e;
    const Problem& problem = *sim_.problem;
    for (const auto& vq : v) e.dist_star = std::max(e.dist_star, (vq - problem.x_star).norm());
    e.dist_minimizer.assign(minimizers_.size(), 0.0);
    for (std::size_t i = 0; i < minimizers_.size(); ++i)
        for (const auto& vq : v) e.dist_minimizer[i] = std::max(e.dist_minimizer[i], (vq - minimizers_[i]).norm());
    e.v = std::move(v);
    return e;
}

const Vector& Engine::history_point(std::size_t source, std::size_t delay) const {
    const std::size_t d = std::min(delay, history_.size() - 1);
    return history_[history_.size() - 1 - d].v.at(source);
}

double Engine::window_max(std::optional<std::size_t> partition) const {
    double best = 0.0;
    for (const auto& e : history_) best = std::max(best, partition ? e.dist_minimizer.at(*partition) : e.dist_star);
    return best;
}

IterationRecord Engine::step() {
    const Problem& problem = *sim_.problem;
    const std::size_t n = sim_.topology.servers;
    const std::size_t k = k_;
    const std::uint64_t seed = sim_.options.seed;
    const StragglerModel& model = sim_.stragglers;

    IterationRecord rec;
    rec.k = k;
    rec.alpha = sim_.schedule.alpha(k);
    rec.servers.resize(n);

    Rng assign_rng = Rng::derive(seed, {kStreamAssign, k});
    const std::vector<std::size_t> assignment = sample_assignment(sim_.topology, k, assign_rng);

    // push: one delivery per worker of every group
    std::vector<std::vector<PushDelivery>> deliveries(sim_.groups.size());
    for (std::size_t g = 0; g < sim_.groups.size(); ++g) {
        std::optional<std::size_t> puller;
        for (std::size_t i = 0; i < n; ++i)
            if (assignment[i] == g + 1) {
                puller = i;
                break;
            }
        deliveries[g] = push(k, g, sim_.groups[g].scheme.n_workers, n, puller, sim_.options.source, model, seed);
    }

    // each worker computes one coded gradient per step, shared by every puller
    std::vector<std::map<std::size_t, Contribution>> computed(sim_.groups.size());
    auto contribution = [&](std::size_t g, std::size_t j) -> const Contribution& {
        auto it = computed[g].find(j);
        if (it != computed[g].end()) return it->second;
        const PushDelivery& d = deliveries[g][j];
        Contribution c;
        c.worker = j;
        c.point = history_point(d.source, d.delay);
        c.source = d.source;
        c.eval_time = k - d.delay;
        c.gradient = worker_gradient(problem, sim_.groups[g].scheme, sim_.groups[g].partition, j, c.point);
        return computed[g].emplace(j, std::move(c)).first->second;
    };

    std::vector<Vector> next_x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ServerState& s = states_[i];
        ServerRecord& sr = rec.servers[i];
        sr.v_error = (s.v - problem.x0).norm();
        sr.group = assignment[i];
        last_pulls_[i].reset();
        if (assignment[i] == 0) {
            next_x[i] = s.v;
            sr.mode = DecodeMode::idle;
            continue;
        }
        const std::size_t g = assignment[i] - 1;
        const WorkerGroup& group = sim_.groups[g];

        Rng straggle_rng = Rng::derive(seed, {kStreamStraggle, k, i});
        const StragglerSet connected =
            sample_stragglers(model, group.partition, group.scheme.n_workers, k, straggle_rng);
        sr.stragglers = connected.straggler_count();

        std::map<std::size_t, Contribution> fresh;
        for (std::size_t j : connected.connected) fresh.emplace(j, contribution(g, j));

        PullResult pull = pull_and_decode(k, model.scenario, group.scheme, connected, fresh, caches_[i][g],
                                          model.max_delay);
        sr.mode = pull.mode;
        if (!pull.gradient) {
            next_x[i] = s.v;
            last_pulls_[i] = std::move(pull);
            continue;
        }
        ++rec.decodes;
        next_x[i] = s.v - rec.alpha * *pull.gradient;

        const Vector exact = partition_gradient(problem, group.partition, s.v);
        rec.max_grad_norm = std::max(rec.max_grad_norm, exact.norm());
        const Vector r = next_x[i] - (s.v - rec.alpha * exact);
        sr.r_norm = r.norm();
        sr.eps_norm = (next_x[i] - s.v).norm();

        if (sim_.options.check_bounds) {
            const double b = norm_b_[g];
            const bool two_term = model.scenario == Scenario::received_only || pull.mode == DecodeMode::partial;
            if (two_term) {
                std::vector<std::size_t> active;
                for (const auto& c : pull.used) active.push_back(c.worker);
                const double a_active = decode_row_l1(group.scheme, pull.row, active);
                const double a_missing = decode_row_l1(group.scheme, pull.row, pull.missing);
                double own = 0.0;
                for (const auto& st : states_) own = std::max(own, (st.v - minimizers_[group.partition]).norm());
                sr.r_bound = 2.0 * lipschitz_ * rec.alpha * a_active * b * window_max(group.partition) +
                             lipschitz_ * rec.alpha * a_missing * b * own;
            } else {
                sr.r_bound = rec.alpha * norm_a_[g] * b * 2.0 * lipschitz_ * window_max(std::nullopt);
            }
            sr.bound_checked = true;
            // relative slack absorbs rounding when R and its bound both vanish
            if (sr.r_norm > sr.r_bound * (1.0 + 1e-9) + 1e-300) ++rec.bound_violations;
            rec.max_r = std::max(rec.max_r, sr.r_norm);
            rec.max_r_bound = std::max(rec.max_r_bound, sr.r_bound);
        } else {
            rec.max_r = std::max(rec.max_r, sr.r_norm);
        }
        last_pulls_[i] = std::move(pull);
    }

    // consensus
    std::vector<ServerState> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i].x = next_x[i];
        next[i].v = Vector::Zero(problem.dim());
        for (std::size_t j = 0; j < n; ++j) {
            const double w = w_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w != 0.0) next[i].v += w * next_x[j];
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        rec.servers[i].x_error = (next[i].x - problem.x0).norm();
        rec.v_change = std::max(rec.v_change, (next[i].v - states_[i].v).norm());
        rec.v_dist_sq += (next[i].v - problem.x_star).squaredNorm();
        rec.stragglers += rec.servers[i].stragglers;
    }

    const bool ok = finite(next);
    rec.ae = ok ? ae(next, problem.x0) : std::numeric_limits<double>::infinity();
    rec.ce = ok ? ce(next, problem.x0) : std::numeric_limits<double>::infinity();
    if (ok) {
        Vector mean = Vector::Zero(problem.dim());
        for (const auto& s : next) mean += s.x;
        mean /= static_cast<double>(n);
        rec.objective = objective(problem, mean);
    } else {
        rec.objective = std::numeric_limits<double>::infinity();
    }

    states_ = std::move(next);
    std::vector<Vector> v;
    for (const auto& s : states_) v.push_back(s.v);
    if (ok) history_.push_back(make_entry(std::move(v)));
    while (history_.size() > model.max_delay + 1) history_.pop_front();
    ++k_;
    return rec;
}

Trace Engine::run() {
    Trace trace;
    trace.schedule = sim_.schedule;
    trace.seed = sim_.options.seed;
    trace.lipschitz = lipschitz_;
    for (std::size_t g = 0; g < sim_.groups.size(); ++g)
        trace.scheme_product = std::max(trace.scheme_product, norm_a_[g] * norm_b_[g]);

    const RunOptions& opt = sim_.options;
    while (trace.records.size() < opt.max_iters) {
        IterationRecord rec = step();
        trace.max_grad_norm = std::max(trace.max_grad_norm, rec.max_grad_norm);
        const bool diverged = !std::isfinite(rec.ae) || rec.ae > opt.divergence_ae;
        const bool converged = !diverged && rec.v_change <= opt.tol;
        rec.converged = converged;
        const std::size_t k = rec.k;
        const double err = rec.ae;
        trace.records.push_back(std::move(rec));
        if (diverged) {
            trace.status = RunStatus::diverged;
            throw DivergenceError("run diverged at k=" + std::to_string(k), k, err, std::move(trace));
        }
        if (converged) {
            trace.status = RunStatus::converged;
            break;
        }
    }
    return trace;
}

Trace run(Simulation sim) { return Engine(std::move(sim)).run(); }

} // namespace srdo
