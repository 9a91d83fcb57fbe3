#include "srdo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace srdo {

namespace {

double x0_norm(const Vector& x0) {
    const double n = x0.norm();
    if (!(n > 0.0)) throw Error("metrics: x0 has zero norm");
    return n;
}

bool within(double lhs, double rhs) {
    return lhs <= rhs + kMartingaleSlack * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

} // namespace

double ae(const std::vector<ServerState>& states, const Vector& x0) {
    const double scale = x0_norm(x0);
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, (s.x - x0).norm());
    return worst / scale;
}

double ce(const std::vector<ServerState>& states, const Vector& x0) {
    const double scale = x0_norm(x0);
    if (states.empty()) return 0.0;
    Vector mean = Vector::Zero(states.front().x.size());
    for (const auto& s : states) mean += s.x;
    mean /= static_cast<double>(states.size());
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, (s.x - mean).norm());
    return worst / scale;
}

double MartingaleParams::a2_at(std::size_t k) const {
    if (a2.empty()) return 0.0;
    const std::size_t at = k < k_star ? 0 : k - k_star;
    return a2[std::min(at, a2.size() - 1)];
}

double MartingaleParams::rho() const {
    return std::pow(a1 + a2_at(k_star), 1.0 / static_cast<double>(window + 1));
}

double MartingaleParams::eta() const {
    if (a3 == 0.0) return 0.0;
    return a3 / (1.0 - a1 - a2_at(k_star));
}

void MartingaleParams::validate() const {
    if (!(a1 >= 0.0) || !(a3 >= 0.0)) throw Error("martingale: a1 and a3 must be non-negative");
    for (std::size_t i = 0; i < a2.size(); ++i) {
        if (!(a2[i] >= 0.0)) throw Error("martingale: a2 must be non-negative");
        if (i > 0 && a2[i] > a2[i - 1]) throw Error("martingale: a2 must be non-increasing");
    }
    const double c = a1 + a2_at(k_star);
    if (c > 1.0) throw Error("martingale: a1 + a2 exceeds 1");
    if (a3 > 0.0 && c >= 1.0) throw Error("martingale: a3 > 0 needs a1 + a2 < 1");
}

MartingaleReport check_martingale_decay(const std::vector<double>& v, const std::vector<double>& u_in,
                                        const MartingaleParams& params) {
    params.validate();
    const std::vector<double>& u = u_in.empty() ? v : u_in;
    if (u.size() < v.size()) throw DimensionError("martingale: u shorter than v");

    MartingaleReport report;
    report.rho = params.rho();
    report.eta = params.eta();
    if (v.size() <= params.k_star) return report;

    for (std::size_t k = params.k_star; k + 1 < v.size(); ++k) {
        const std::size_t lo = k >= params.window ? k - params.window : 0;
        const double umax = *std::max_element(u.begin() + static_cast<std::ptrdiff_t>(lo),
                                              u.begin() + static_cast<std::ptrdiff_t>(k) + 1);
        const double rhs = params.a1 * v[k] + params.a2_at(k) * umax + params.a3;
        if (!within(v[k + 1], rhs)) {
            report.hypothesis_violation = k;
            return report;
        }
    }

    const std::size_t k0 = params.k_star;
    const std::size_t base_end = std::min(v.size() - 1, k0 + params.window);
    double v0 = 0.0;
    for (std::size_t k = k0; k <= base_end; ++k) {
        const double excess = std::max(v[k], u[k]) - report.eta;
        if (excess <= 0.0) continue;
        const double decay = std::pow(report.rho, static_cast<double>(k - k0));
        v0 = std::max(v0, decay > 0.0 ? excess / decay : std::numeric_limits<double>::infinity());
    }
    report.v0 = v0;

    for (std::size_t k = k0; k < v.size(); ++k) {
        ++report.checked;
        const double decay = std::pow(report.rho, static_cast<double>(k - k0));
        const double bound = (v0 > 0.0 ? decay * v0 : 0.0) + report.eta;
        if (!within(v[k], bound)) {
            report.envelope_violation = k;
            break;
        }
    }
    return report;
}

double rate_factor_type1(double alpha, double lipschitz, double mu, double gamma_sum, double scheme_product) {
    const double t = 2.0 * lipschitz * alpha * scheme_product;
    return 1.0 - mu + 2.0 * t * (1.0 + t) / (gamma_sum * gamma_sum);
}

RateEnvelope rate_envelope_type1(const Trace& trace, double lipschitz, double mu, double gamma_sum,
                                 double scheme_product, std::size_t k0) {
    RateEnvelope env;
    env.k0 = k0;
    const std::size_t n = trace.records.size();
    env.factor.resize(n);
    env.measured.resize(n);
    env.envelope.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < n; ++k) {
        env.factor[k] = rate_factor_type1(trace.records[k].alpha, lipschitz, mu, gamma_sum, scheme_product);
        env.measured[k] = trace.records[k].v_dist_sq;
    }
    if (k0 >= n) return env;
    env.v0 = env.measured[k0];
    double level = env.v0;
    for (std::size_t k = k0; k < n; ++k) {
        if (k > k0) level *= env.factor[k - 1];
        env.envelope[k] = level;
        if (!within(env.measured[k], level)) env.exceeded.push_back(k);
    }
    return env;
}

double eta_estimate(const EtaInputs& in) {
    const double n = static_cast<double>(in.servers);
    const double p = static_cast<double>(in.partitions);
    const double g2 = in.gamma_sum * in.gamma_sum;
    const double a = in.alpha;
    const double l = in.lipschitz;
    const double c = in.scheme_product;

    const double denom = in.mu - 4.0 * l * a * c * (1.0 + 2.0 * l * a * c) / g2;
    if (!(denom > 0.0)) {
        throw Error("eta_estimate: non-positive denominator " + format_real(denom) +
                    " (mu too small for this step size)");
    }
    const double numer =
        (2.0 * n * a * l * std::min(static_cast<double>(in.index_set) * in.gamma_max, 1.0) +
         a * p * in.gamma_min * n * in.sigma_max + 2.0 * l * n * std::min(p * in.gamma_max, 1.0) * a * a / g2) *
        in.max_minimizer_dist * in.max_minimizer_dist;
    return numer / denom;
}

double final_ae(const Trace& trace) {
    if (trace.status == RunStatus::diverged) return std::numeric_limits<double>::infinity();
    if (trace.records.empty()) return std::numeric_limits<double>::quiet_NaN();
    return trace.records.back().ae;
}

OrderingReport scenario_residual_compare(const std::array<std::vector<Trace>, 3>& traces,
                                         const std::vector<std::uint64_t>& seeds) {
    OrderingReport report;
    report.seeds = seeds;
    for (const auto& t : traces)
        if (t.size() != seeds.size()) throw DimensionError("scenario_residual_compare: trace count mismatch");

    for (std::size_t j = 0; j < seeds.size(); ++j) {
        std::array<double, 3> row{};
        for (std::size_t s = 0; s < 3; ++s) {
            row[s] = final_ae(traces[s][j]);
            if (!std::isfinite(row[s])) ++report.diverged[s];
            report.mean_ae[s] += row[s];
        }
        report.per_seed.push_back(row);
        report.seed_ordered.push_back(row[0] <= row[2] && row[2] <= row[1]);
    }
    if (!seeds.empty())
        for (double& m : report.mean_ae) m /= static_cast<double>(seeds.size());
    report.ordered = report.mean_ae[0] <= report.mean_ae[2] && report.mean_ae[2] <= report.mean_ae[1];
    return report;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "k,alpha,ae,ce,objective,max_r,max_r_bound,stragglers,decodes\n";
    for (const auto& r : trace.records) {
        out << r.k << ',' << format_real(r.alpha) << ',' << format_real(r.ae) << ',' << format_real(r.ce) << ','
            << format_real(r.objective) << ',' << format_real(r.max_r) << ',' << format_real(r.max_r_bound) << ','
            << r.stragglers << ',' << r.decodes << '\n';
    }
    out << "status," << to_string(trace.status) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<Trace>& traces) {
    out << "seed,final_ae,final_ce,iterations,status\n";
    std::vector<double> aes, ces;
    for (const auto& t : traces) {
        const double a = final_ae(t);
        const double c = t.records.empty() ? std::numeric_limits<double>::quiet_NaN() : t.records.back().ce;
        aes.push_back(a);
        ces.push_back(c);
        out << t.seed << ',' << format_real(a) << ',' << format_real(c) << ',' << t.records.size() << ','
            << to_string(t.status) << '\n';
    }
    auto mean = [](const std::vector<double>& xs) {
        double s = 0.0;
        for (double x : xs) s += x;
        return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
    };
    auto stddev = [&](const std::vector<double>& xs) {
        if (xs.size() < 2) return 0.0;
        const double m = mean(xs);
        double s = 0.0;
        for (double x : xs) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(xs.size() - 1));
    };
    out << "mean," << format_real(mean(aes)) << ',' << format_real(mean(ces)) << ",,\n";
    out << "stddev," << format_real(stddev(aes)) << ',' << format_real(stddev(ces)) << ",,\n";
}

void write_ordering_csv(std::ostream& out, const OrderingReport& report) {
    out << "seed,ae_scenario1,ae_scenario2,ae_scenario3,ordered\n";
    for (std::size_t j = 0; j < report.seeds.size(); ++j) {
        const auto& r = report.per_seed[j];
        out << report.seeds[j] << ',' << format_real(r[0]) << ',' << format_real(r[1]) << ',' << format_real(r[2])
            << ',' << (report.seed_ordered[j] ? 1 : 0) << '\n';
    }
    out << "mean," << format_real(report.mean_ae[0]) << ',' << format_real(report.mean_ae[1]) << ','
        << format_real(report.mean_ae[2]) << ',' << (report.ordered ? 1 : 0) << '\n';
}

void write_summary_text(std::ostream& out, const std::vector<Trace>& traces) {
    for (const auto& t : traces) {
        char line[160];
        std::snprintf(line, sizeof line, "seed %llu: %s after %zu iterations, AE %.6g, bound violations %zu\n",
                      static_cast<unsigned long long>(t.seed), to_string(t.status), t.records.size(), final_ae(t),
                      t.bound_violations());
        out << line;
    }
}

} // namespace srdo
