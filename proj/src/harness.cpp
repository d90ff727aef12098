#include "lgbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace lgb {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t policy_seed(std::uint64_t seed, PolicyId id)
{
    return derive_seed(seed, {stream_tag("policy"), stream_tag(to_string(id))});
}

std::vector<PolicyId> with_oracle_first(const std::vector<PolicyId>& policies)
{
    std::vector<PolicyId> out{PolicyId::kalman_oracle};
    for (PolicyId p : policies) {
        if (p != PolicyId::kalman_oracle) out.push_back(p);
    }
    return out;
}

bool contains(const std::vector<PolicyId>& v, PolicyId id)
{
    return std::find(v.begin(), v.end(), id) != v.end();
}

// Fills regret / error / normalization for one episode against a paired
// oracle result.
void finish_against_oracle(EpisodeResult& e, const EpisodeResult& oracle)
{
    if (e.excluded) return;
    if (oracle.excluded) {
        e.excluded = true;
        e.error = "oracle baseline failed: " + oracle.error;
        return;
    }
    e.oracle_regret = oracle.regret;
    e.normalized = normalized_regret(e.regret, oracle.regret);
}

EpisodeResult attempt_episode(const LgdsSpec& truth, const LgdsSpec& perceived, PolicyId id,
                              const ExperimentConfig& c, std::uint64_t seed, RunRecord* trace)
{
    EpisodeResult e;
    e.policy = id;
    try {
        EpisodeOptions opt;
        opt.warmup = c.warmup;
        opt.keep_rounds = trace != nullptr;
        RunRecord rec = run_episode(truth, perceived, id, c.params, c.horizon, seed, opt);
        e.regret = rec.cumulative_regret;
        if (!std::isfinite(e.regret)) {
            e.excluded = true;
            e.error = "non-finite regret";
        }
        if (trace) *trace = std::move(rec);
    } catch (const std::exception& ex) {
        e.excluded = true;
        e.error = ex.what();
    }
    return e;
}

SpdMatrix clip_psd(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    const Vector ev = es.eigenvalues().cwiseMax(0.0);
    return SpdMatrix::trusted(symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose()));
}

struct CellKey {
    Distribution dist;
    PerturbTarget target;
    double nu;
    PolicyId policy;
    bool operator==(const CellKey&) const = default;
};

}  // namespace

// ---------------------------------------------------------------------------

RunRecord run_episode(const LgdsSpec& truth, const LgdsSpec& perceived, PolicyId id,
                      const PolicyParams& params, std::size_t horizon, std::uint64_t seed,
                      const EpisodeOptions& options)
{
    if (truth.d() != perceived.d() || truth.k() != perceived.k()) {
        throw DimensionError("run_episode: perceived and true specs differ in shape");
    }
    // Parameter errors surface here, before round 0.
    std::unique_ptr<Policy> policy = make_policy(id, params, perceived, horizon, policy_seed(seed, id));
    EnvState state = init_state(truth, seed, options.warmup);

    RunRecord rec;
    rec.policy = id;
    if (options.keep_rounds) rec.rounds.reserve(horizon);
    const auto k = static_cast<std::size_t>(truth.k());
    for (std::size_t t = 0; t < horizon; ++t) {
        const PolicyDecision decision = policy->select(t);
        const std::size_t a = decision.action_index;
        if (a >= k) throw DimensionError("run_episode: policy chose an invalid action");

        const std::size_t best = oracle_action(state, truth);
        const double r = instantaneous_regret(state.z, a, truth);
        const Vector* est = policy->state_estimate();
        const double err = est ? (state.z - *est).norm() : kNan;
        if (options.hook) options.hook(RoundView{t, state.z, *policy, decision, r});

        double reward;
        if (policy->full_information()) {
            const Vector all = observe_all(state, truth);
            reward = all(static_cast<Eigen::Index>(a));
            policy->observe_all(t, all);
        } else {
            reward = observe(state, truth, a);
            policy->observe(t, a, reward);
        }
        rec.cumulative_regret += r;
        if (options.keep_rounds) rec.rounds.push_back({t, a, reward, best, r, err});
        step(state, truth);
    }
    return rec;
}

// ---------------------------------------------------------------------------

double quantile_linear(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) throw ParameterError("quantile of empty data");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double lower_median(const std::vector<double>& sorted)
{
    if (sorted.empty()) throw ParameterError("median of empty data");
    return sorted[(sorted.size() - 1) / 2];
}

std::optional<SummaryStats> summarize_values(std::vector<double> values)
{
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    SummaryStats s;
    s.count = values.size();
    s.median = lower_median(values);
    s.q1 = quantile_linear(values, 0.25);
    s.q3 = quantile_linear(values, 0.75);
    s.iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * s.iqr;
    const double hi_fence = s.q3 + 1.5 * s.iqr;
    s.whisker_low = *std::find_if(values.begin(), values.end(), [&](double v) { return v >= lo_fence; });
    s.whisker_high = *std::find_if(values.rbegin(), values.rend(), [&](double v) { return v <= hi_fence; });
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PerturbTarget target)
{
    switch (target) {
    case PerturbTarget::gamma: return "gamma";
    case PerturbTarget::actions: return "actions";
    case PerturbTarget::q: return "q";
    }
    return "?";
}

PerturbTarget parse_perturb_target(std::string_view name)
{
    if (name == "gamma") return PerturbTarget::gamma;
    if (name == "actions") return PerturbTarget::actions;
    if (name == "q") return PerturbTarget::q;
    throw ParameterError("unknown perturbation target '" + std::string(name) + "' (gamma|actions|q)");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c)
{
    j = nlohmann::json::object();
    auto& dists = j["distributions"] = nlohmann::json::array();
    for (auto d : c.distributions) dists.push_back(std::string(to_string(d)));
    j["d"] = c.d;
    j["k"] = c.k;
    j["rho"] = c.rho;
    j["envs"] = c.envs;
    j["runs"] = c.runs;
    j["horizon"] = c.horizon;
    j["warmup"] = c.warmup;
    auto& pols = j["policies"] = nlohmann::json::array();
    for (auto p : c.policies) pols.push_back(std::string(to_string(p)));
    j["params"] = c.params;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["jobs"] = c.jobs;
    j["keep_rounds"] = c.keep_rounds;
    j["nus"] = c.nus;
    auto& targets = j["perturb"] = nlohmann::json::array();
    for (auto t : c.perturb) targets.push_back(std::string(to_string(t)));
    j["bound_samples"] = c.bound_samples;
}

void from_json(const nlohmann::json& j, ExperimentConfig& c)
{
    if (!j.is_object()) throw ParameterError("config: expected a JSON object");
    static const std::vector<std::string> known{"distributions", "d",    "k",           "rho",     "envs",
                                                "runs",          "horizon", "warmup",   "policies", "params",
                                                "seed",          "out",  "jobs",        "keep_rounds", "nus",
                                                "perturb",       "bound_samples"};
    for (const auto& item : j.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw ParameterError("config: unknown field '" + item.key() + "'");
        }
    }
    try {
        if (j.contains("distributions")) {
            c.distributions.clear();
            for (const auto& s : j.at("distributions")) c.distributions.push_back(parse_distribution(s.get<std::string>()));
        }
        if (j.contains("d")) c.d = j.at("d").get<Eigen::Index>();
        if (j.contains("k")) c.k = j.at("k").get<Eigen::Index>();
        if (j.contains("rho")) c.rho = j.at("rho").get<double>();
        if (j.contains("envs")) c.envs = j.at("envs").get<std::size_t>();
        if (j.contains("runs")) c.runs = j.at("runs").get<std::size_t>();
        if (j.contains("horizon")) c.horizon = j.at("horizon").get<std::size_t>();
        if (j.contains("warmup")) c.warmup = j.at("warmup").get<std::size_t>();
        if (j.contains("policies")) {
            c.policies.clear();
            for (const auto& s : j.at("policies")) c.policies.push_back(parse_policy(s.get<std::string>()));
        }
        if (j.contains("params")) c.params = j.at("params").get<PolicyParams>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (j.contains("jobs")) c.jobs = j.at("jobs").get<std::size_t>();
        if (j.contains("keep_rounds")) c.keep_rounds = j.at("keep_rounds").get<bool>();
        if (j.contains("nus")) c.nus = j.at("nus").get<std::vector<double>>();
        if (j.contains("perturb")) {
            c.perturb.clear();
            for (const auto& s : j.at("perturb")) c.perturb.push_back(parse_perturb_target(s.get<std::string>()));
        }
        if (j.contains("bound_samples")) c.bound_samples = j.at("bound_samples").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
}

void validate_config(const ExperimentConfig& c)
{
    if (c.distributions.empty()) throw ParameterError("config: no distributions");
    if (c.d < 1 || c.k < 1) throw ParameterError("config: d and k must be at least 1");
    if (!(c.rho > 0.0) || !std::isfinite(c.rho)) throw ParameterError("config: rho must be positive");
    if (c.envs < 1 || c.runs < 1 || c.horizon < 1) throw ParameterError("config: envs, runs and horizon must be at least 1");
    if (c.jobs < 1) throw ParameterError("config: jobs must be at least 1");
    if (c.policies.empty()) throw ParameterError("config: no policies");
    for (double nu : c.nus) {
        if (!(nu >= 0.0) || !std::isfinite(nu)) throw ParameterError("config: perturbation magnitudes must be nonnegative");
    }
    if (c.bound_samples < 1) throw ParameterError("config: bound_samples must be at least 1");
}

std::uint64_t env_seed(std::uint64_t master, Distribution dist, std::size_t env)
{
    return derive_seed(master, {stream_tag("env"), stream_tag(to_string(dist)), env});
}

std::uint64_t episode_seed(std::uint64_t master, Distribution dist, std::size_t env, std::size_t run)
{
    return derive_seed(master, {stream_tag("episode"), stream_tag(to_string(dist)), env, run});
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first;
    std::size_t first_index = count;
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (i < first_index) {
                        first_index = i;
                        first = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (first) std::rethrow_exception(first);
}

// ---------------------------------------------------------------------------

std::vector<CellSummary> summarize(const std::vector<EpisodeResult>& episodes)
{
    std::vector<CellKey> keys;
    std::vector<CellSummary> cells;
    std::vector<std::vector<double>> values;
    for (const auto& e : episodes) {
        const CellKey key{e.dist, e.target, e.nu, e.policy};
        auto it = std::find(keys.begin(), keys.end(), key);
        std::size_t idx;
        if (it == keys.end()) {
            keys.push_back(key);
            CellSummary c;
            c.dist = e.dist;
            c.policy = e.policy;
            c.target = e.target;
            c.nu = e.nu;
            cells.push_back(c);
            values.emplace_back();
            idx = cells.size() - 1;
        } else {
            idx = static_cast<std::size_t>(it - keys.begin());
        }
        if (e.excluded) {
            ++cells[idx].excluded;
        } else {
            ++cells[idx].completed;
            if (e.normalized) values[idx].push_back(*e.normalized);
            else ++cells[idx].undefined_normalization;
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].stats = summarize_values(std::move(values[i]));
    return cells;
}

std::size_t BenchmarkResult::excluded() const
{
    return static_cast<std::size_t>(std::count_if(episodes.begin(), episodes.end(), [](const auto& e) { return e.excluded; }));
}

double BenchmarkResult::excluded_fraction() const
{
    return episodes.empty() ? 0.0 : static_cast<double>(excluded()) / static_cast<double>(episodes.size());
}

BenchmarkResult run_benchmark(const ExperimentConfig& config)
{
    validate_config(config);
    const std::vector<PolicyId> simulated = with_oracle_first(config.policies);
    const bool report_oracle = contains(config.policies, PolicyId::kalman_oracle);

    const std::size_t tasks = config.distributions.size() * config.envs;
    std::vector<std::vector<EpisodeResult>> slots(tasks);
    std::vector<std::vector<RunRecord>> trace_slots(tasks);

    parallel_for(tasks, config.jobs, [&](std::size_t task) {
        const Distribution dist = config.distributions[task / config.envs];
        const std::size_t env = task % config.envs;
        auto& out = slots[task];

        std::optional<LgdsSpec> spec;
        std::string spec_error;
        try {
            spec = generate_spec(dist, config.d, config.k, config.rho, env_seed(config.seed, dist, env));
        } catch (const std::exception& ex) {
            spec_error = std::string("environment generation failed: ") + ex.what();
        }

        for (std::size_t run = 0; run < config.runs; ++run) {
            const std::uint64_t seed = episode_seed(config.seed, dist, env, run);
            std::vector<EpisodeResult> row;
            for (PolicyId id : simulated) {
                EpisodeResult e;
                RunRecord trace;
                if (spec) {
                    e = attempt_episode(*spec, *spec, id, config, seed, config.keep_rounds ? &trace : nullptr);
                } else {
                    e.policy = id;
                    e.excluded = true;
                    e.error = spec_error;
                }
                e.dist = dist;
                e.env = env;
                e.run = run;
                row.push_back(e);
                if (config.keep_rounds && !e.excluded && (id != PolicyId::kalman_oracle || report_oracle)) {
                    trace.env = env;
                    trace.run = run;
                    trace_slots[task].push_back(std::move(trace));
                }
            }
            const EpisodeResult oracle = row.front();
            for (auto& e : row) finish_against_oracle(e, oracle);
            for (auto& e : row) {
                if (e.policy == PolicyId::kalman_oracle && !report_oracle) continue;
                out.push_back(std::move(e));
            }
        }
    });

    BenchmarkResult result;
    result.config = config;
    for (auto& s : slots) {
        for (auto& e : s) result.episodes.push_back(std::move(e));
    }
    for (auto& s : trace_slots) {
        for (auto& t : s) result.traces.push_back(std::move(t));
    }
    result.summary = summarize(result.episodes);
    return result;
}

// ---------------------------------------------------------------------------

PerturbedSpecs perturb_spec(const LgdsSpec& spec, double nu, std::uint64_t seed, PerturbTarget target)
{
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw ParameterError("perturb_spec: nu must be nonnegative");
    PerturbedSpecs out{spec, spec};
    if (nu == 0.0) return out;

    const Eigen::Index d = spec.d();
    RandomStream rng(seed);
    Matrix t;
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
        Matrix xi(d, d);
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) xi(r, c) = rng.normal();
        }
        const double norm = xi.norm();
        if (norm == 0.0) continue;
        t = Matrix::Identity(d, d) + nu * (xi / norm);
        Eigen::JacobiSVD<Matrix> svd(t);
        const Vector& sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        found = smin > 0.0 && sv(0) / smin <= 1e12;
    }
    if (!found) throw Error("perturb_spec: could not draw a well-conditioned transform");

    const Matrix t_inv = t.partialPivLu().inverse();
    switch (target) {
    case PerturbTarget::gamma:
        out.perceived.gamma = t_inv * spec.gamma * t;
        break;
    case PerturbTarget::q:
        // T^-1 Q T is not symmetric in general; the filter needs a covariance.
        out.perceived.q = clip_psd(t_inv * spec.q.matrix() * t);
        break;
    case PerturbTarget::actions:
        // C is k x d: the left factor only exists when k = d.
        out.perceived.actions = spec.k() == d ? Matrix(t_inv * spec.actions * t) : Matrix(spec.actions * t);
        break;
    }
    return out;
}

std::size_t RobustnessResult::excluded() const
{
    auto n = [](const std::vector<EpisodeResult>& v) {
        return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const auto& e) { return e.excluded; }));
    };
    return n(baseline) + n(episodes);
}

double RobustnessResult::excluded_fraction() const
{
    const std::size_t total = baseline.size() + episodes.size();
    return total == 0 ? 0.0 : static_cast<double>(excluded()) / static_cast<double>(total);
}

std::optional<double> RobustnessResult::degradation(Distribution dist, PerturbTarget target, double nu,
                                                    PolicyId policy) const
{
    const CellSummary* base = nullptr;
    const CellSummary* pert = nullptr;
    for (const auto& c : baseline_summary) {
        if (c.dist == dist && c.policy == policy) base = &c;
    }
    for (const auto& c : summary) {
        if (c.dist == dist && c.policy == policy && c.target == target && c.nu == nu) pert = &c;
    }
    if (!base || !pert || !base->stats || !pert->stats) return std::nullopt;
    return pert->stats->median - base->stats->median;
}

RobustnessResult run_robustness(const ExperimentConfig& config)
{
    validate_config(config);
    std::vector<PolicyId> policies;
    for (PolicyId p : config.policies) {
        if (p != PolicyId::kalman_oracle) policies.push_back(p);
    }
    if (policies.empty()) throw ParameterError("robust: no policies besides the oracle baseline");
    std::vector<double> nus;
    for (double nu : config.nus) {
        if (nu > 0.0) nus.push_back(nu);
    }

    const std::size_t tasks = config.distributions.size() * config.envs;
    std::vector<std::vector<EpisodeResult>> base_slots(tasks);
    std::vector<std::vector<EpisodeResult>> pert_slots(tasks);

    parallel_for(tasks, config.jobs, [&](std::size_t task) {
        const Distribution dist = config.distributions[task / config.envs];
        const std::size_t env = task % config.envs;
        const std::uint64_t eseed = env_seed(config.seed, dist, env);

        std::optional<LgdsSpec> spec;
        std::string spec_error;
        try {
            spec = generate_spec(dist, config.d, config.k, config.rho, eseed);
        } catch (const std::exception& ex) {
            spec_error = std::string("environment generation failed: ") + ex.what();
        }

        auto fill = [&](EpisodeResult& e, PolicyId id, std::size_t run, PerturbTarget target, double nu) {
            e.policy = id;
            e.dist = dist;
            e.env = env;
            e.run = run;
            e.target = target;
            e.nu = nu;
        };

        std::vector<EpisodeResult> oracles(config.runs);
        for (std::size_t run = 0; run < config.runs; ++run) {
            const std::uint64_t seed = episode_seed(config.seed, dist, env, run);
            EpisodeResult o;
            if (spec) o = attempt_episode(*spec, *spec, PolicyId::kalman_oracle, config, seed, nullptr);
            else o.excluded = true, o.error = spec_error;
            fill(o, PolicyId::kalman_oracle, run, PerturbTarget::gamma, 0.0);
            oracles[run] = o;
            for (PolicyId id : policies) {
                EpisodeResult e;
                if (spec) e = attempt_episode(*spec, *spec, id, config, seed, nullptr);
                else e.excluded = true, e.error = spec_error;
                fill(e, id, run, PerturbTarget::gamma, 0.0);
                finish_against_oracle(e, o);
                base_slots[task].push_back(std::move(e));
            }
        }

        for (PerturbTarget target : config.perturb) {
            // One direction Xi per (env, target); nu only scales it.
            const std::uint64_t pseed = derive_seed(eseed, {stream_tag("perturb"), stream_tag(to_string(target))});
            for (double nu : nus) {
                std::optional<PerturbedSpecs> specs;
                std::string perturb_error = spec_error;
                if (spec) {
                    try {
                        specs = perturb_spec(*spec, nu, pseed, target);
                    } catch (const std::exception& ex) {
                        perturb_error = ex.what();
                    }
                }
                for (std::size_t run = 0; run < config.runs; ++run) {
                    const std::uint64_t seed = episode_seed(config.seed, dist, env, run);
                    for (PolicyId id : policies) {
                        EpisodeResult e;
                        if (specs) e = attempt_episode(specs->truth, specs->perceived, id, config, seed, nullptr);
                        else e.excluded = true, e.error = perturb_error;
                        fill(e, id, run, target, nu);
                        finish_against_oracle(e, oracles[run]);
                        pert_slots[task].push_back(std::move(e));
                    }
                }
            }
        }
    });

    RobustnessResult result;
    result.config = config;
    for (auto& s : base_slots) {
        for (auto& e : s) result.baseline.push_back(std::move(e));
    }
    for (auto& s : pert_slots) {
        for (auto& e : s) result.episodes.push_back(std::move(e));
    }
    result.baseline_summary = summarize(result.baseline);
    result.summary = summarize(result.episodes);
    return result;
}

// ---------------------------------------------------------------------------

std::vector<MetricRow> run_metric(const ExperimentConfig& config)
{
    validate_config(config);
    const std::size_t tasks = config.distributions.size() * config.envs;
    std::vector<MetricRow> rows(tasks);
    const std::vector<OptimismTerm> terms{idea_term(), kalman_ucb_term(config.params.kalman_ucb_delta)};
    parallel_for(tasks, config.jobs, [&](std::size_t task) {
        MetricRow& row = rows[task];
        row.dist = config.distributions[task / config.envs];
        row.env = task % config.envs;
        try {
            const LgdsSpec spec =
                generate_spec(row.dist, config.d, config.k, config.rho, env_seed(config.seed, row.dist, row.env));
            const auto reports = phi_reports(spec, terms);
            row.idea = reports[0].interval;
            row.kalman_ucb = reports[1].interval;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
    });
    return rows;
}

std::vector<BoundRow> run_bounds(const ExperimentConfig& config)
{
    validate_config(config);
    const std::size_t tasks = config.distributions.size() * config.envs;
    std::vector<BoundRow> rows(tasks);
    parallel_for(tasks, config.jobs, [&](std::size_t task) {
        BoundRow& row = rows[task];
        row.dist = config.distributions[task / config.envs];
        row.env = task % config.envs;
        try {
            const std::uint64_t eseed = env_seed(config.seed, row.dist, row.env);
            const LgdsSpec spec = generate_spec(row.dist, config.d, config.k, config.rho, eseed);
            const SteadyStateFilter oracle = solve_dare_multi(spec.gamma, spec.actions, spec.q, spec.sigma2());
            RandomStream rng(derive_seed(eseed, {stream_tag("bounds")}));
            row.continuous = lower_bound_continuous_mc(spec, config.horizon, oracle.covariance, config.bound_samples, rng);
            row.discrete = lower_bound_discrete(spec, config.horizon);
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
    });
    return rows;
}

}  // namespace lgb
