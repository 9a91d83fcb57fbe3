#include "srdo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "srdo/metrics.hpp"

namespace srdo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

std::uint64_t to_u64(const std::string& s, int line) {
    std::uint64_t value = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc() || ptr != end) throw ConfigError("expected a non-negative integer, got '" + s + "'", line);
    return value;
}

std::size_t to_size(const std::string& s, int line) { return static_cast<std::size_t>(to_u64(s, line)); }

double to_real(const std::string& s, int line) {
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(value)) {
        throw ConfigError("expected a number, got '" + s + "'", line);
    }
    return value;
}

bool to_bool(const std::string& s, int line) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError("expected true or false, got '" + s + "'", line);
}

std::vector<std::size_t> to_sizes(const std::string& s, int line) {
    std::vector<std::size_t> out;
    for (const auto& item : split(s, ',')) out.push_back(to_size(item, line));
    return out;
}

std::vector<double> to_reals(const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(to_real(item, line));
    return out;
}

// "1,2,5..8" -> 1 2 5 6 7 8
std::vector<std::uint64_t> to_seeds(const std::string& s, int line) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split(s, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_u64(item, line));
            continue;
        }
        const std::uint64_t lo = to_u64(trim(item.substr(0, dots)), line);
        const std::uint64_t hi = to_u64(trim(item.substr(dots + 2)), line);
        if (hi < lo || hi - lo >= 1'000'000) throw ConfigError("bad seed range '" + item + "'", line);
        for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> to_edges(const std::string& s, int line) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& item : split(s, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw ConfigError("edge '" + item + "' is not of the form a-b", line);
        out.emplace_back(to_size(trim(item.substr(0, dash)), line), to_size(trim(item.substr(dash + 1)), line));
    }
    return out;
}

using Handler = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"problem.rows", [](RunConfig& c, const std::string& v, int l) { c.shape.rows = static_cast<Eigen::Index>(to_size(v, l)); }},
        {"problem.cols", [](RunConfig& c, const std::string& v, int l) { c.shape.cols = static_cast<Eigen::Index>(to_size(v, l)); }},
        {"problem.partitions", [](RunConfig& c, const std::string& v, int l) { c.shape.partitions = to_size(v, l); }},
        {"problem.workers_per_partition", [](RunConfig& c, const std::string& v, int l) { c.shape.workers_per_partition = to_size(v, l); }},
        {"problem.seed", [](RunConfig& c, const std::string& v, int l) { c.problem_seed = to_u64(v, l); }},
        {"problem.g_scale", [](RunConfig& c, const std::string& v, int l) {
             if (v == "inv_sqrt_m") {
                 c.shape.g_scale = 0.0;
                 return;
             }
             c.shape.g_scale = to_real(v, l);
             if (!(c.shape.g_scale > 0.0)) throw ConfigError("g_scale must be positive", l);
         }},
        {"problem.noise_std", [](RunConfig& c, const std::string& v, int l) {
             c.shape.noise_std = to_real(v, l);
             if (c.shape.noise_std < 0.0) throw ConfigError("noise_std must be non-negative", l);
         }},
        {"coding.stragglers", [](RunConfig& c, const std::string& v, int l) { c.stragglers = to_sizes(v, l); }},
        {"coding.seed", [](RunConfig& c, const std::string& v, int l) { c.coding_seed = to_u64(v, l); }},
        {"topology.servers", [](RunConfig& c, const std::string& v, int l) { c.servers = to_size(v, l); }},
        {"topology.groups", [](RunConfig& c, const std::string& v, int l) { c.groups = to_sizes(v, l); }},
        {"topology.gamma", [](RunConfig& c, const std::string& v, int l) { c.gamma = to_reals(v, l); }},
        {"topology.assignment", [](RunConfig& c, const std::string& v, int l) {
             if (v == "none") c.assignment.reset();
             else if (v == "one_to_one") c.assignment = std::vector<std::size_t>{};
             else c.assignment = to_sizes(v, l);
         }},
        {"topology.graph", [](RunConfig& c, const std::string& v, int l) {
             if (v == "complete" || v == "path") {
                 c.graph = v;
                 c.edges.clear();
             } else {
                 c.graph = "edges";
                 c.edges = to_edges(v, l);
             }
         }},
        {"topology.mixing", [](RunConfig& c, const std::string& v, int l) {
             if (v == "metropolis") c.mixing.kind = MixingKind::metropolis;
             else if (v == "row_stochastic") c.mixing.kind = MixingKind::row_stochastic;
             else throw ConfigError("mixing must be metropolis or row_stochastic", l);
         }},
        {"topology.mu", [](RunConfig& c, const std::string& v, int l) { c.mixing.mu = to_real(v, l); }},
        {"topology.nu", [](RunConfig& c, const std::string& v, int l) { c.mixing.nu = to_real(v, l); }},
        {"topology.source", [](RunConfig& c, const std::string& v, int l) {
             if (v == "uniform") c.source = SourceMode::uniform;
             else if (v == "assigned") c.source = SourceMode::assigned;
             else throw ConfigError("source must be uniform or assigned", l);
         }},
        {"topology.common_init", [](RunConfig& c, const std::string& v, int l) { c.common_init = to_bool(v, l); }},
        {"stragglers.scenario", [](RunConfig& c, const std::string& v, int l) {
             const std::size_t s = to_size(v, l);
             if (s < 1 || s > 3) throw ConfigError("scenario must be 1, 2 or 3", l);
             c.model.scenario = static_cast<Scenario>(s);
         }},
        {"stragglers.window", [](RunConfig& c, const std::string& v, int l) { c.model.window = to_size(v, l); }},
        {"stragglers.max_delay", [](RunConfig& c, const std::string& v, int l) { c.model.max_delay = to_size(v, l); }},
        {"stragglers.straggle_prob", [](RunConfig& c, const std::string& v, int l) { c.model.straggle_prob = to_real(v, l); }},
        {"stragglers.delay_push", [](RunConfig& c, const std::string& v, int l) { c.model.delay_push = to_bool(v, l); }},
        {"schedule.a", [](RunConfig& c, const std::string& v, int l) { c.schedule.offset = to_real(v, l); }},
        {"schedule.theta", [](RunConfig& c, const std::string& v, int l) {
             c.schedule.exponent = to_real(v, l);
             if (!(c.schedule.exponent > 0.0 && c.schedule.exponent <= 1.0)) throw ConfigError("theta must lie in (0, 1]", l);
         }},
        {"schedule.alpha_cap", [](RunConfig& c, const std::string& v, int l) {
             c.cap_auto = false;
             if (v == "none") c.schedule.cap.reset();
             else if (v == "auto") c.cap_auto = true;
             else c.schedule.cap = to_real(v, l);
         }},
        {"control.max_iters", [](RunConfig& c, const std::string& v, int l) { c.max_iters = to_size(v, l); }},
        {"control.tol", [](RunConfig& c, const std::string& v, int l) { c.tol = to_real(v, l); }},
        {"control.seeds", [](RunConfig& c, const std::string& v, int l) { c.seeds = to_seeds(v, l); }},
        {"control.output", [](RunConfig& c, const std::string& v, int) { c.output = v; }},
        {"control.check_bounds", [](RunConfig& c, const std::string& v, int l) { c.check_bounds = to_bool(v, l); }},
        {"control.sweep", [](RunConfig& c, const std::string& v, int l) { c.sweep = to_bool(v, l); }},
        {"control.divergence_ae", [](RunConfig& c, const std::string& v, int l) { c.divergence_ae = to_real(v, l); }},
    };
    return table;
}

void validate(RunConfig& c, const std::map<std::string, int>& lines) {
    auto line_of = [&](const std::string& key) {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    };
    const ProblemShape& sh = c.shape;
    if (sh.rows <= sh.cols) throw ConfigError("rows must exceed cols", line_of("problem.rows"));
    if (sh.partitions == 0 || sh.workers_per_partition == 0) {
        throw ConfigError("partitions and workers_per_partition must be positive", line_of("problem.partitions"));
    }
    if (static_cast<std::size_t>(sh.rows) % (sh.partitions * sh.workers_per_partition) != 0) {
        throw ConfigError("rows must be divisible by partitions * workers_per_partition", line_of("problem.rows"));
    }

    if (c.stragglers.size() == 1) c.stragglers.assign(sh.partitions, c.stragglers.front());
    if (c.stragglers.size() != sh.partitions) {
        throw ConfigError("stragglers needs one value or one per partition", line_of("coding.stragglers"));
    }
    for (std::size_t s : c.stragglers)
        if (s >= sh.workers_per_partition) {
            throw ConfigError("stragglers must be below workers_per_partition", line_of("coding.stragglers"));
        }

    if (c.groups.empty())
        for (std::size_t i = 1; i <= sh.partitions; ++i) c.groups.push_back(i);
    for (std::size_t g : c.groups)
        if (g == 0 || g > sh.partitions) throw ConfigError("groups entries must name partitions 1..p", line_of("topology.groups"));
    const std::size_t groups = c.groups.size();

    if (c.servers == 0) throw ConfigError("servers must be positive", line_of("topology.servers"));
    if (c.assignment && c.assignment->empty()) {
        if (c.servers != groups) {
            throw ConfigError("one_to_one assignment needs as many servers as worker groups", line_of("topology.assignment"));
        }
        for (std::size_t i = 1; i <= groups; ++i) c.assignment->push_back(i);
    }
    if (c.assignment) {
        if (c.assignment->size() != c.servers) throw ConfigError("assignment needs one entry per server", line_of("topology.assignment"));
        for (std::size_t a : *c.assignment)
            if (a > groups) throw ConfigError("assignment names an unknown worker group", line_of("topology.assignment"));
    }
    if (c.gamma.empty()) {
        c.gamma.assign(groups + 1, 1.0 / static_cast<double>(groups));
        c.gamma[0] = 0.0;
    }
    if (c.gamma.size() != groups + 1) throw ConfigError("gamma needs one entry per worker group plus gamma_0", line_of("topology.gamma"));
    double sum = 0.0;
    for (double g : c.gamma) {
        if (g < 0.0) throw ConfigError("gamma entries must be non-negative", line_of("topology.gamma"));
        sum += g;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("gamma must sum to 1", line_of("topology.gamma"));

    for (const auto& [a, b] : c.edges)
        if (a >= c.servers || b >= c.servers) throw ConfigError("edge endpoint out of range", line_of("topology.graph"));
    if (!(c.mixing.mu >= 0.0 && c.mixing.mu < 1.0)) throw ConfigError("mu must lie in [0, 1)", line_of("topology.mu"));
    if (!(c.mixing.nu >= 0.0 && c.mixing.nu < 1.0)) throw ConfigError("nu must lie in [0, 1)", line_of("topology.nu"));

    if (c.model.window == 0) throw ConfigError("window must be at least 1", line_of("stragglers.window"));
    if (!(c.model.straggle_prob >= 0.0 && c.model.straggle_prob <= 1.0)) {
        throw ConfigError("straggle_prob must lie in [0, 1]", line_of("stragglers.straggle_prob"));
    }
    if (!(c.schedule.offset > 0.0)) throw ConfigError("a must be positive", line_of("schedule.a"));
    if (c.schedule.cap && !(*c.schedule.cap > 0.0)) throw ConfigError("alpha_cap must be positive", line_of("schedule.alpha_cap"));
    if (c.cap_auto && !(c.mixing.mu > 0.0)) throw ConfigError("alpha_cap = auto needs mu > 0", line_of("schedule.alpha_cap"));
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty", line_of("control.seeds"));
    if (c.tol < 0.0) throw ConfigError("tol must be non-negative", line_of("control.tol"));
    if (!(c.divergence_ae > 0.0)) throw ConfigError("divergence_ae must be positive", line_of("control.divergence_ae"));

    double gmin = 0.0;
    for (std::size_t i = 1; i < c.gamma.size(); ++i)
        if (c.gamma[i] > 0.0 && (gmin == 0.0 || c.gamma[i] < gmin)) gmin = c.gamma[i];
    if (!c.assignment && gmin > 0.0 && static_cast<double>(groups) >= 1.0 / gmin) {
        c.warnings.push_back("p >= 1/gamma_min (p = " + std::to_string(groups) + ", gamma_min = " + format_real(gmin) +
                             "); the rate condition for random assignment does not hold");
    }
}

} // namespace

double RunConfig::g_scale() const {
    return shape.g_scale > 0.0 ? shape.g_scale : 1.0 / std::sqrt(static_cast<double>(shape.rows));
}

std::size_t RunConfig::group_count() const { return groups.empty() ? shape.partitions : groups.size(); }

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::map<std::string, int> lines;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            static const std::set<std::string> known{"problem", "coding", "topology", "stragglers", "schedule", "control"};
            if (!known.count(section)) throw ConfigError("unknown section [" + section + "]", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line);
        if (section.empty()) throw ConfigError("key outside of a section", line);
        const std::string key = section + "." + trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto it = handlers().find(key);
        if (it == handlers().end()) throw ConfigError("unknown key '" + trim(s.substr(0, eq)) + "' in [" + section + "]", line);
        if (lines.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
        lines[key] = line;
        it->second(config, value, line);
    }
    validate(config, lines);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string describe(const RunConfig& c) {
    std::ostringstream out;
    out << "problem: M=" << c.shape.rows << " N=" << c.shape.cols << " p=" << c.shape.partitions
        << " workers=" << c.shape.workers_per_partition << " g_scale=" << format_real(c.g_scale()) << '\n';
    out << "coding: s=";
    for (std::size_t i = 0; i < c.stragglers.size(); ++i) out << (i ? "," : "") << c.stragglers[i];
    out << '\n';
    out << "topology: servers=" << c.servers << " groups=" << c.group_count() << " graph=" << c.graph
        << " mixing=" << (c.mixing.kind == MixingKind::metropolis ? "metropolis" : "row_stochastic") << '\n';
    out << "stragglers: scenario=" << static_cast<int>(c.model.scenario) << " T=" << c.model.window
        << " H=" << c.model.max_delay << " straggle_prob=" << format_real(c.model.straggle_prob) << '\n';
    out << "schedule: a=" << format_real(c.schedule.offset) << " theta=" << format_real(c.schedule.exponent) << '\n';
    out << "control: max_iters=" << c.max_iters << " seeds=" << c.seeds.size() << '\n';
    return out.str();
}

} // namespace srdo
