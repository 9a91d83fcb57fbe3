#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "srdo/engine.hpp"

namespace srdo {

/// max_i ||x_i - x0|| / ||x0||
double ae(const std::vector<ServerState>& states, const Vector& x0);
/// max_i ||x_i - mean(x)|| / ||x0||
double ce(const std::vector<ServerState>& states, const Vector& x0);

/// Recursion v_{k+1} <= a1 v_k + a2_k max_{k-B <= j <= k} u_j + a3, k >= k_star.
struct MartingaleParams {
    double a1 = 0.0;
    std::vector<double> a2; // a2[k - k_star]; the last entry repeats
    double a3 = 0.0;
    std::size_t window = 0; // B
    std::size_t k_star = 0;

    double a2_at(std::size_t k) const;
    /// (a1 + a2_first)^(1/(B+1))
    double rho() const;
    /// a3 / (1 - a1 - a2_first); zero when a3 is zero
    double eta() const;
    void validate() const;
};

struct MartingaleReport {
    double rho = 0.0;
    double eta = 0.0;
    double v0 = 0.0;
    std::optional<std::size_t> hypothesis_violation; // first k whose step breaks the recursion
    std::optional<std::size_t> envelope_violation;   // first k with v_k above the envelope
    std::size_t checked = 0;

    bool ok() const { return !hypothesis_violation && !envelope_violation; }
};

/// Relative slack used by the recursion and envelope comparisons.
inline constexpr double kMartingaleSlack = 1e-9;

/// Checks the recursion first, then fits V0 on the base window
/// [k_star, k_star + B] and verifies v_k <= rho^(k - k_star) V0 + eta for
/// every k >= k_star. An empty u means u = v.
MartingaleReport check_martingale_decay(const std::vector<double>& v, const std::vector<double>& u,
                                        const MartingaleParams& params);

struct RateEnvelope {
    std::size_t k0 = 0;
    double v0 = 0.0;
    std::vector<double> factor;   // per-step factor, indexed like the trace
    std::vector<double> envelope; // v0 * prod_{k0 <= j < k} factor_j for k >= k0
    std::vector<double> measured; // sum_i ||v_i(k+1) - x*||^2
    std::vector<std::size_t> exceeded;
};

/// 1 - mu + 4 L alpha c (1 + 2 L alpha c) / gamma_sum^2 with c = max ||A||_inf ||B||_2,inf.
double rate_factor_type1(double alpha, double lipschitz, double mu, double gamma_sum, double scheme_product);

RateEnvelope rate_envelope_type1(const Trace& trace, double lipschitz, double mu, double gamma_sum,
                                 double scheme_product, std::size_t k0 = 0);

struct EtaInputs {
    std::size_t servers = 1;    // n
    std::size_t partitions = 1; // p
    std::size_t index_set = 1;  // |I|
    double alpha = 0.0;
    double lipschitz = 0.0;
    double sigma_max = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double gamma_sum = 1.0; // 1 - gamma_0
    double mu = 0.0;
    double scheme_product = 0.0;
    double max_minimizer_dist = 0.0; // max_i ||x^(i) - x*||
};

/// Closed-form limit bound on sum_i ||v_i - x*||^2 for strongly convex runs.
/// Throws when the denominator is not positive.
double eta_estimate(const EtaInputs& in);

/// Final AE of a run; +inf for a diverged run.
double final_ae(const Trace& trace);

struct OrderingReport {
    std::array<double, 3> mean_ae{};
    std::array<std::size_t, 3> diverged{};
    std::vector<std::uint64_t> seeds;
    std::vector<std::array<double, 3>> per_seed;
    std::vector<bool> seed_ordered; // AE1 <= AE3 <= AE2 for that seed
    bool ordered = false;           // on the means
};

/// traces[s][j]: scenario s + 1 on seed j.
OrderingReport scenario_residual_compare(const std::array<std::vector<Trace>, 3>& traces,
                                         const std::vector<std::uint64_t>& seeds);

/// %.17g
std::string format_real(double value);

/// Header k,alpha,ae,ce,objective,max_r,max_r_bound,stragglers,decodes then one
/// row per record and a status trailer.
void write_trace_csv(std::ostream& out, const Trace& trace);
/// Per-seed final AE/CE followed by mean and stddev rows.
void write_summary_csv(std::ostream& out, const std::vector<Trace>& traces);
void write_ordering_csv(std::ostream& out, const OrderingReport& report);
void write_summary_text(std::ostream& out, const std::vector<Trace>& traces);

} // namespace srdo
