#include "srdo/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace srdo {

namespace {

namespace fs = std::filesystem;

enum SeedTag : std::uint64_t {
    kSeedProblem = 101,
    kSeedCoding = 102,
};

Graph make_graph(const RunConfig& config) {
    if (config.graph == "complete") return Graph::complete(config.servers);
    if (config.graph == "path") return Graph::path(config.servers);
    return Graph::from_edges(config.servers, config.edges);
}

template <class Fn>
void for_each_seed(std::size_t count, std::size_t jobs, Fn fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex lock;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> guard(lock);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
}

std::vector<Trace> run_all(const RunConfig& config, const ExperimentOptions& options, const BuildOptions& build,
                           const std::optional<fs::path>& dir) {
    std::vector<Trace> traces(config.seeds.size());
    for_each_seed(config.seeds.size(), options.jobs, [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        traces[i] = run_seed(build_experiment(config, seed, build));
        if (dir) {
            write_file(*dir / ("trace_" + std::to_string(seed) + ".csv"),
                       [&](std::ostream& out) { write_trace_csv(out, traces[i]); });
        }
    });
    if (dir) write_file(*dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(out, traces); });
    return traces;
}

} // namespace

Experiment build_experiment(const RunConfig& config, std::uint64_t seed, const BuildOptions& options) {
    ProblemShape shape = config.shape;
    shape.g_scale = config.g_scale();
    Rng problem_rng = config.problem_seed ? Rng(*config.problem_seed) : Rng::derive(seed, {kSeedProblem});
    auto problem = std::make_shared<const Problem>(generate(shape, problem_rng));

    Experiment ex;
    ex.problem = problem;
    Simulation& sim = ex.sim;
    sim.problem = problem.get();

    Rng coding_rng = config.coding_seed ? Rng(*config.coding_seed) : Rng::derive(seed, {kSeedCoding});
    for (std::size_t g = 0; g < config.groups.size(); ++g) {
        const std::size_t partition = config.groups[g] - 1;
        WorkerGroup group;
        group.partition = partition;
        group.scheme = make_scheme(config.shape.workers_per_partition, config.stragglers.at(partition), coding_rng);
        if (options.corrupt_scheme && g == 0) {
            Matrix b = group.scheme.encode;
            const Matrix a = group.scheme.decode;
            b(0, 0) = 0.0;
            group.scheme.encode = b;
            group.scheme.decode = a;
        }
        sim.groups.push_back(std::move(group));
    }

    sim.topology.servers = config.servers;
    sim.topology.partitions = config.groups.size();
    sim.topology.gamma = config.gamma;
    sim.topology.server_graph = make_graph(config);
    sim.topology.fixed_assignment = config.assignment;

    sim.stragglers = config.model;
    sim.stragglers.s_per_partition = config.stragglers;
    if (options.scenario) sim.stragglers.scenario = *options.scenario;
    sim.mixing = config.mixing;

    sim.schedule = config.schedule;
    if (config.cap_auto) {
        double l = 0.0;
        for (const auto& part : problem->partitions) l = std::max(l, part.lipschitz);
        sim.schedule.cap = step_cap(config.mixing.mu, config.gamma.front(), l);
    }

    sim.options.max_iters = config.max_iters;
    sim.options.tol = config.tol;
    sim.options.seed = seed;
    sim.options.common_init = config.common_init;
    sim.options.check_bounds = config.check_bounds;
    sim.options.source = config.source;
    sim.options.divergence_ae = config.divergence_ae;
    return ex;
}

Trace run_seed(const Experiment& experiment) {
    try {
        return run(experiment.sim);
    } catch (const DivergenceError& e) {
        return e.partial();
    }
}

ExperimentResult run_experiment(const RunConfig& config, const ExperimentOptions& options) {
    ExperimentResult result;
    const bool sweep = options.sweep || config.sweep;
    std::optional<fs::path> root;
    if (options.write_files) {
        root = fs::path(config.output);
        fs::create_directories(*root);
    }

    if (!sweep) {
        BuildOptions build;
        build.corrupt_scheme = options.corrupt_scheme;
        result.traces = run_all(config, options, build, root);
    } else {
        for (int s = 1; s <= 3; ++s) {
            BuildOptions build;
            build.scenario = static_cast<Scenario>(s);
            build.corrupt_scheme = options.corrupt_scheme;
            std::optional<fs::path> dir;
            if (root) {
                dir = *root / ("scenario" + std::to_string(s));
                fs::create_directories(*dir);
            }
            result.sweep[static_cast<std::size_t>(s - 1)] = run_all(config, options, build, dir);
        }
        result.ordering = scenario_residual_compare(result.sweep, config.seeds);
        if (root) write_file(*root / "ordering.csv", [&](std::ostream& out) { write_ordering_csv(out, *result.ordering); });
        result.traces = result.sweep[static_cast<std::size_t>(config.model.scenario) - 1];
    }

    auto any_diverged = [](const std::vector<Trace>& ts) {
        for (const auto& t : ts)
            if (t.status == RunStatus::diverged) return true;
        return false;
    };
    bool diverged = any_diverged(result.traces);
    if (sweep)
        for (const auto& ts : result.sweep) diverged = diverged || any_diverged(ts);
    if (diverged) result.exit_code = kExitDivergence;
    return result;
}

VerifyReport verify_bounds(const RunConfig& config_in, const ExperimentOptions& options) {
    RunConfig config = config_in;
    config.check_bounds = true;
    VerifyReport report;

    std::vector<Trace> traces(config.seeds.size());
    std::vector<double> deviation(config.seeds.size(), 0.0);
    std::vector<std::size_t> exceeded(config.seeds.size(), 0);
    std::vector<std::size_t> checks(config.seeds.size(), 0);
    BuildOptions build;
    build.corrupt_scheme = options.corrupt_scheme;
    for_each_seed(config.seeds.size(), options.jobs, [&](std::size_t i) {
        const Experiment ex = build_experiment(config, config.seeds[i], build);
        for (const auto& g : ex.sim.groups) deviation[i] = std::max(deviation[i], verify_scheme(g.scheme));
        traces[i] = run_seed(ex);
        for (const auto& r : traces[i].records)
            for (const auto& s : r.servers) checks[i] += s.bound_checked ? 1 : 0;
        double gamma_sum = 0.0;
        for (std::size_t g = 1; g < config.gamma.size(); ++g) gamma_sum += config.gamma[g];
        const RateEnvelope env = rate_envelope_type1(traces[i], traces[i].lipschitz, config.mixing.mu, gamma_sum,
                                                     traces[i].scheme_product);
        exceeded[i] = env.exceeded.size();
    });

    for (std::size_t i = 0; i < traces.size(); ++i) {
        const Trace& t = traces[i];
        report.scheme_deviation = std::max(report.scheme_deviation, deviation[i]);
        report.r_violations += t.bound_violations();
        report.r_checks += checks[i];
        report.envelope_exceeded += exceeded[i];
        if (t.status == RunStatus::diverged) ++report.diverged;
        char line[200];
        std::snprintf(line, sizeof line,
                      "seed %llu: status %s, AB deviation %.3g, R-bound checks %zu, violations %zu, envelope exceeded %zu",
                      static_cast<unsigned long long>(t.seed), to_string(t.status), deviation[i], checks[i],
                      t.bound_violations(), exceeded[i]);
        report.lines.emplace_back(line);
    }

    const bool scheme_ok = report.scheme_deviation <= kSchemeTolerance;
    report.lines.push_back(std::string(scheme_ok ? "PASS" : "FAIL") + " scheme condition AB = 1 (max deviation " +
                           format_real(report.scheme_deviation) + ")");
    report.lines.push_back(std::string(report.r_violations == 0 ? "PASS" : "FAIL") + " R-bound: " +
                           std::to_string(report.r_violations) + " violations in " + std::to_string(report.r_checks) +
                           " checks");
    report.lines.push_back(std::string(report.diverged == 0 ? "PASS" : "FAIL") + " no divergence (" +
                           std::to_string(report.diverged) + " diverged)");
    report.lines.push_back("INFO rate envelope exceeded at " + std::to_string(report.envelope_exceeded) +
                           " iterations (diagnostic)");

    if (!scheme_ok || report.r_violations > 0) report.exit_code = kExitBoundViolation;
    else if (report.diverged > 0) report.exit_code = kExitDivergence;
    return report;
}

void apply_seed_override(RunConfig& config) {
    const char* env = std::getenv("SRDO_SEED_OVERRIDE");
    if (!env || !*env) return;
    const RunConfig parsed = parse_config(std::string("[control]\nseeds = ") + env + "\n");
    config.seeds = parsed.seeds;
}

} // namespace srdo
