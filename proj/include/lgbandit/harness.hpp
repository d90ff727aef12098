#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgbandit/analysis.hpp"
#include "lgbandit/environment.hpp"
#include "lgbandit/policies.hpp"

namespace lgb {

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

struct RoundRecord {
    std::size_t t = 0;
    std::size_t action = 0;
    double reward = 0.0;
    std::size_t oracle_action = 0;
    double inst_regret = 0.0;
    double err_norm = 0.0;  // NaN for policies without a state estimate
};

struct RunRecord {
    std::size_t env = 0;
    std::size_t run = 0;
    PolicyId policy = PolicyId::kalman_oracle;
    std::vector<RoundRecord> rounds;  // empty unless requested
    double cumulative_regret = 0.0;
};

/// Everything visible at round t just before the environment steps.
struct RoundView {
    std::size_t t;
    const Vector& z;
    const Policy& policy;
    const PolicyDecision& decision;
    double inst_regret;
};

using RoundHook = std::function<void(const RoundView&)>;

struct EpisodeOptions {
    std::size_t warmup = 10000;
    bool keep_rounds = true;
    RoundHook hook;  // optional
};

/// `truth` drives the state and the rewards; `perceived` is what the policy
/// believes. The environment noise depends only on `seed`, so every policy
/// run with the same seed faces the same state path and noise table. The
/// policy's own randomness uses a stream derived from (seed, policy).
RunRecord run_episode(const LgdsSpec& truth, const LgdsSpec& perceived, PolicyId policy,
                      const PolicyParams& params, std::size_t horizon, std::uint64_t seed,
                      const EpisodeOptions& options = {});

inline RunRecord run_episode(const LgdsSpec& spec, PolicyId policy, const PolicyParams& params,
                             std::size_t horizon, std::uint64_t seed, const EpisodeOptions& options = {})
{
    return run_episode(spec, spec, policy, params, horizon, seed, options);
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantile_linear(const std::vector<double>& sorted, double p);

/// Element at index (n - 1) / 2 of the sorted data.
double lower_median(const std::vector<double>& sorted);

struct SummaryStats {
    std::size_t count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double whisker_low = 0.0;   // most extreme values within 1.5 IQR of the box
    double whisker_high = 0.0;
    double mean = 0.0;
};

/// Empty when there are no finite values.
std::optional<SummaryStats> summarize_values(std::vector<double> values);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class PerturbTarget { gamma, actions, q };

std::string_view to_string(PerturbTarget target);
PerturbTarget parse_perturb_target(std::string_view name);

struct ExperimentConfig {
    std::vector<Distribution> distributions{Distribution::gaussian};
    Eigen::Index d = 10;
    Eigen::Index k = 10;
    double rho = 0.9;
    std::size_t envs = 100;
    std::size_t runs = 3;
    std::size_t horizon = 1000;
    std::size_t warmup = 10000;
    std::vector<PolicyId> policies = all_policies();
    PolicyParams params;
    std::uint64_t seed = 1;
    std::string out = "results";
    std::size_t jobs = 1;
    bool keep_rounds = false;  // per-round traces for bench/robust (large)
    std::vector<double> nus{0.1, 1.0, 10.0};
    std::vector<PerturbTarget> perturb{PerturbTarget::gamma, PerturbTarget::actions, PerturbTarget::q};
    std::size_t bound_samples = 20000;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing fields keep their defaults; throws ParameterError on bad values.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Throws ParameterError when counts are zero, the policy list is empty, etc.
void validate_config(const ExperimentConfig& c);

/// Seeds are pure functions of (master, distribution, env[, run]).
std::uint64_t env_seed(std::uint64_t master, Distribution dist, std::size_t env);
std::uint64_t episode_seed(std::uint64_t master, Distribution dist, std::size_t env, std::size_t run);

struct EpisodeResult {
    Distribution dist = Distribution::gaussian;
    std::size_t env = 0;
    std::size_t run = 0;
    PolicyId policy = PolicyId::kalman_oracle;
    PerturbTarget target = PerturbTarget::gamma;  // robustness only
    double nu = 0.0;                              // robustness only
    bool excluded = false;
    std::string error;
    double regret = 0.0;
    double oracle_regret = 0.0;
    std::optional<double> normalized;
};

struct CellSummary {
    Distribution dist = Distribution::gaussian;
    PolicyId policy = PolicyId::kalman_oracle;
    PerturbTarget target = PerturbTarget::gamma;
    double nu = 0.0;
    std::size_t completed = 0;
    std::size_t excluded = 0;
    std::size_t undefined_normalization = 0;
    std::optional<SummaryStats> stats;  // of normalized regret
};

struct BenchmarkResult {
    ExperimentConfig config;
    std::vector<EpisodeResult> episodes;  // ordered by (dist, env, run, policy)
    std::vector<CellSummary> summary;     // ordered by (dist, policy)
    std::vector<RunRecord> traces;        // only with keep_rounds
    std::size_t excluded() const;
    double excluded_fraction() const;
};

/// Runs every (distribution, env, run, policy). The kalman_oracle baseline is
/// always simulated for normalization, and reported only if requested.
BenchmarkResult run_benchmark(const ExperimentConfig& config);

/// Groups episodes into cells keyed by (dist, target, nu, policy) in order
/// of first appearance.
std::vector<CellSummary> summarize(const std::vector<EpisodeResult>& episodes);

struct PerturbedSpecs {
    LgdsSpec perceived;
    LgdsSpec truth;
};

/// Similarity-transform perturbation of one matrix with T = I + nu Xi,
/// ||Xi||_F = 1. nu = 0 returns perceived == truth exactly.
PerturbedSpecs perturb_spec(const LgdsSpec& spec, double nu, std::uint64_t seed, PerturbTarget target);

struct RobustnessResult {
    ExperimentConfig config;
    std::vector<EpisodeResult> baseline;   // nu = 0
    std::vector<EpisodeResult> episodes;   // perturbed
    std::vector<CellSummary> baseline_summary;
    std::vector<CellSummary> summary;
    std::size_t excluded() const;
    double excluded_fraction() const;

    /// Median normalized regret at (target, nu) minus the unperturbed median.
    std::optional<double> degradation(Distribution dist, PerturbTarget target, double nu, PolicyId policy) const;
};

/// Policies other than kalman_oracle are run on the perceived spec; the
/// oracle baseline always uses the true spec.
RobustnessResult run_robustness(const ExperimentConfig& config);

struct MetricRow {
    Distribution dist = Distribution::gaussian;
    std::size_t env = 0;
    bool ok = true;
    std::string error;
    PhiInterval idea;
    PhiInterval kalman_ucb;
};

std::vector<MetricRow> run_metric(const ExperimentConfig& config);

struct BoundRow {
    Distribution dist = Distribution::gaussian;
    std::size_t env = 0;
    bool ok = true;
    std::string error;
    MonteCarloEstimate continuous;
    DiscreteBound discrete;
};

std::vector<BoundRow> run_bounds(const ExperimentConfig& config);

/// Calls fn(i) for i in [0, count) on `jobs` threads; exceptions from fn
/// propagate after all threads finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Outputs (CSV, SVG)
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal text; "nan" / "inf" / "-inf" otherwise.
std::string format_number(double x);

void write_rounds_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_episodes_csv(const std::string& path, const std::vector<EpisodeResult>& episodes);
void write_summary_csv(const std::string& path, const std::vector<CellSummary>& cells);
/// Policies by row, distributions by column, "median (IQR)" cells.
void write_summary_table_csv(const std::string& path, const std::vector<CellSummary>& cells);
void write_metric_csv(const std::string& path, const std::vector<MetricRow>& rows);
void write_bounds_csv(const std::string& path, const std::vector<BoundRow>& rows);

std::vector<EpisodeResult> read_episodes_csv(const std::string& path);
std::vector<MetricRow> read_metric_csv(const std::string& path);

/// Normalized regrets of kalman_ucb (x) vs idea (y) averaged per environment,
/// log-log, one panel per distribution. Returns false (and writes nothing)
/// when there is nothing to plot.
bool write_regret_scatter_svg(const std::string& path, const std::vector<EpisodeResult>& episodes,
                              std::uint64_t seed);
/// Interval endpoints, kalman_ucb (x) vs idea (y): minima red, maxima blue.
bool write_interval_scatter_svg(const std::string& path, const std::vector<MetricRow>& rows,
                                std::uint64_t seed);
/// Box plots, one panel per (target, nu), one box per policy.
bool write_robustness_svg(const std::string& path, const std::vector<EpisodeResult>& episodes,
                          std::uint64_t seed);

}  // namespace lgb
