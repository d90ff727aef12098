// Command-line front end: environment generation, single episodes, and the
// benchmark / robustness / metric / bound pipelines.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgbandit/harness.hpp"

namespace fs = std::filesystem;
using namespace lgb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr double kExclusionBudget = 0.05;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flags shared by every subcommand; each one overrides the config file only
// when given on the command line.
struct Flags {
    std::string config_path;
    std::vector<std::string> dists;
    long long d = 0, k = 0;
    double rho = 0;
    std::size_t envs = 0, runs = 0, horizon = 0, warmup = 0, jobs = 0, samples = 0;
    std::vector<std::string> policies;
    std::uint64_t seed = 0;
    std::vector<double> nus;
    std::vector<std::string> perturb;
    std::string out;
    bool rounds = false;
    std::string spec_path;
    std::vector<std::string> files;

    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const
    {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_common(CLI::App* sub, Flags& f)
{
    f.opts["config"] = sub->add_option("--config", f.config_path, "JSON experiment config; flags override it");
    f.opts["dist"] = sub->add_option("--dist", f.dists, "gaussian|uniform|exponential|cauchy|bernoulli (comma list)")
                         ->delimiter(',');
    f.opts["d"] = sub->add_option("--d", f.d, "state dimension");
    f.opts["k"] = sub->add_option("--k", f.k, "number of actions");
    f.opts["rho"] = sub->add_option("--rho", f.rho, "target spectral radius of the state matrix");
    f.opts["envs"] = sub->add_option("--envs", f.envs, "environments per distribution");
    f.opts["runs"] = sub->add_option("--runs", f.runs, "runs per environment");
    f.opts["horizon"] = sub->add_option("--horizon", f.horizon, "rounds per episode");
    f.opts["warmup"] = sub->add_option("--warmup", f.warmup, "state warm-up steps before round 0");
    f.opts["policies"] = sub->add_option("--policies", f.policies, "policy list (comma list)")->delimiter(',');
    f.opts["seed"] = sub->add_option("--seed", f.seed, "master seed");
    f.opts["nu"] = sub->add_option("--nu", f.nus, "perturbation magnitudes (comma list)")->delimiter(',');
    f.opts["perturb"] = sub->add_option("--perturb", f.perturb, "gamma|actions|q (comma list)")->delimiter(',');
    f.opts["out"] = sub->add_option("--out", f.out, "output directory");
    f.opts["jobs"] = sub->add_option("--jobs", f.jobs, "worker threads");
}

ExperimentConfig build_config(const Flags& f, const std::vector<Distribution>& default_dists,
                              const std::vector<PolicyId>& default_policies)
{
    ExperimentConfig c;
    c.distributions = default_dists;
    c.policies = default_policies;
    try {
        if (!f.config_path.empty()) {
            std::ifstream in(f.config_path);
            if (!in) throw ConfigError("cannot read config '" + f.config_path + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config '" + f.config_path + "' is not valid JSON: " + e.what());
            }
            from_json(j, c);
        }
        if (f.given("dist")) {
            c.distributions.clear();
            for (const auto& s : f.dists) c.distributions.push_back(parse_distribution(s));
        }
        if (f.given("d")) c.d = f.d;
        if (f.given("k")) c.k = f.k;
        if (f.given("rho")) c.rho = f.rho;
        if (f.given("envs")) c.envs = f.envs;
        if (f.given("runs")) c.runs = f.runs;
        if (f.given("horizon")) c.horizon = f.horizon;
        if (f.given("warmup")) c.warmup = f.warmup;
        if (f.given("policies")) {
            c.policies.clear();
            for (const auto& s : f.policies) c.policies.push_back(parse_policy(s));
        }
        if (f.given("seed")) c.seed = f.seed;
        if (f.given("nu")) c.nus = f.nus;
        if (f.given("perturb")) {
            c.perturb.clear();
            for (const auto& s : f.perturb) c.perturb.push_back(parse_perturb_target(s));
        }
        if (f.given("out")) c.out = f.out;
        if (f.given("jobs")) c.jobs = f.jobs;
        if (f.given("samples")) c.bound_samples = f.samples;
        if (f.rounds) c.keep_rounds = true;
        validate_config(c);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::string out_path(const ExperimentConfig& c, const std::string& name)
{
    return (fs::path(c.out) / name).string();
}

void prepare_out(const ExperimentConfig& c)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw Error("cannot create output directory '" + c.out + "': " + ec.message());
}

void write_manifest(const ExperimentConfig& c, const std::string& command, std::size_t total, std::size_t excluded)
{
    nlohmann::json j;
    j["command"] = command;
    j["master_seed"] = c.seed;
    j["config"] = c;
    j["episodes"] = total;
    j["excluded"] = excluded;
    std::ofstream f(out_path(c, "manifest.json"), std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write manifest in '" + c.out + "'");
    f << j.dump(2) << '\n';
}

int budget_exit(std::size_t total, std::size_t excluded)
{
    if (excluded > 0) {
        std::cerr << "warning: " << excluded << " of " << total << " episodes excluded (see the error column)\n";
    }
    if (total > 0 && static_cast<double>(excluded) > kExclusionBudget * static_cast<double>(total)) {
        std::cerr << "error: more than 5% of episodes were excluded\n";
        return kExitBudget;
    }
    return kExitOk;
}

void print_cells(const std::vector<CellSummary>& cells, bool with_perturbation)
{
    for (const auto& c : cells) {
        std::cout << to_string(c.dist) << ' ';
        if (with_perturbation) std::cout << to_string(c.target) << " nu=" << format_number(c.nu) << ' ';
        std::cout << to_string(c.policy) << ": ";
        if (c.stats) std::cout << "median " << format_number(c.stats->median) << " IQR " << format_number(c.stats->iqr);
        else std::cout << "missing";
        std::cout << " (n=" << c.completed << ", excluded=" << c.excluded << ")\n";
    }
}

// ---------------------------------------------------------------------------

int cmd_generate(const Flags& f)
{
    ExperimentConfig c = build_config(f, {Distribution::gaussian}, all_policies());
    prepare_out(c);
    for (Distribution dist : c.distributions) {
        for (std::size_t env = 0; env < c.envs; ++env) {
            const LgdsSpec spec = generate_spec(dist, c.d, c.k, c.rho, env_seed(c.seed, dist, env));
            const std::string name = "spec_" + std::string(to_string(dist)) + "_" + std::to_string(env) + ".json";
            save_spec(spec, out_path(c, name));
            std::cout << out_path(c, name) << '\n';
        }
    }
    return kExitOk;
}

int cmd_validate(const Flags& f)
{
    if (f.files.empty()) throw ConfigError("validate: no spec files given");
    bool all_ok = true;
    for (const auto& path : f.files) {
        LgdsSpec spec;
        try {
            spec = load_spec(path);
        } catch (const std::exception& e) {
            std::cout << path << ": unreadable: " << e.what() << '\n';
            all_ok = false;
            continue;
        }
        const ValidationReport r = validate_spec(spec);
        std::cout << path << ": " << (r.ok() ? "valid" : "INVALID") << " (d=" << spec.d() << ", k=" << spec.k()
                  << ", spectral radius " << format_number(r.spectral_radius) << ", controllability rank "
                  << r.controllability_rank << ")\n";
        if (!r.dimensions_consistent) std::cout << "  dimensions inconsistent\n";
        if (!r.actions_unit_norm) std::cout << "  actions are not unit norm\n";
        if (!r.q_psd) std::cout << "  Q is not PSD\n";
        if (!r.sigma0_psd) std::cout << "  Sigma0 is not PSD\n";
        if (!r.sigma_positive) std::cout << "  sigma must be positive\n";
        if (!r.controllable) std::cout << "  (Gamma, Q^1/2) is not controllable\n";
        all_ok = all_ok && r.ok();
    }
    return all_ok ? kExitOk : kExitConfig;
}

int cmd_run(const Flags& f)
{
    ExperimentConfig c = build_config(f, {Distribution::gaussian}, all_policies());
    LgdsSpec spec;
    Distribution dist = c.distributions.front();
    if (!f.spec_path.empty()) {
        try {
            spec = load_spec(f.spec_path);
        } catch (const std::exception& e) {
            throw ConfigError("cannot load spec '" + f.spec_path + "': " + e.what());
        }
        if (!validate_spec(spec).ok()) throw ConfigError("spec '" + f.spec_path + "' is invalid (see validate)");
        if (spec.meta) dist = spec.meta->dist;
    } else {
        spec = generate_spec(dist, c.d, c.k, c.rho, env_seed(c.seed, dist, 0));
    }
    prepare_out(c);

    const std::uint64_t seed = episode_seed(c.seed, dist, 0, 0);
    EpisodeOptions opt;
    opt.warmup = c.warmup;
    std::vector<RunRecord> records;
    std::vector<EpisodeResult> results;
    std::optional<EpisodeResult> oracle;
    std::vector<PolicyId> order{PolicyId::kalman_oracle};
    for (PolicyId p : c.policies) {
        if (p != PolicyId::kalman_oracle) order.push_back(p);
    }
    const bool report_oracle = std::find(c.policies.begin(), c.policies.end(), PolicyId::kalman_oracle) != c.policies.end();
    for (PolicyId id : order) {
        EpisodeResult e;
        e.dist = dist;
        e.policy = id;
        try {
            RunRecord rec = run_episode(spec, id, c.params, c.horizon, seed, opt);
            e.regret = rec.cumulative_regret;
            if (id != PolicyId::kalman_oracle || report_oracle) records.push_back(std::move(rec));
        } catch (const ParameterError& ex) {
            throw ConfigError(ex.what());
        } catch (const std::exception& ex) {
            e.excluded = true;
            e.error = ex.what();
        }
        if (id == PolicyId::kalman_oracle) oracle = e;
        if (!e.excluded && oracle && !oracle->excluded) {
            e.oracle_regret = oracle->regret;
            e.normalized = normalized_regret(e.regret, oracle->regret);
        }
        if (id != PolicyId::kalman_oracle || report_oracle) results.push_back(e);
    }
    write_rounds_csv(out_path(c, "rounds.csv"), records);
    write_episodes_csv(out_path(c, "episodes.csv"), results);
    write_manifest(c, "run", results.size(), 0);
    std::size_t excluded = 0;
    for (const auto& e : results) {
        std::cout << to_string(e.policy) << ": ";
        if (e.excluded) {
            std::cout << "excluded (" << e.error << ")\n";
            ++excluded;
            continue;
        }
        std::cout << "regret " << format_number(e.regret);
        if (e.normalized) std::cout << ", normalized " << format_number(*e.normalized);
        std::cout << '\n';
    }
    return budget_exit(results.size(), excluded);
}

int cmd_bench(const Flags& f)
{
    const ExperimentConfig c = build_config(f, all_distributions(), all_policies());
    prepare_out(c);
    const BenchmarkResult r = run_benchmark(c);
    write_episodes_csv(out_path(c, "episodes.csv"), r.episodes);
    write_summary_csv(out_path(c, "summary.csv"), r.summary);
    write_summary_table_csv(out_path(c, "table.csv"), r.summary);
    if (c.keep_rounds) write_rounds_csv(out_path(c, "rounds.csv"), r.traces);
    if (!write_regret_scatter_svg(out_path(c, "regret_scatter.svg"), r.episodes, c.seed)) {
        std::cerr << "warning: no idea/kalman_ucb pairs to plot\n";
    }
    write_manifest(c, "bench", r.episodes.size(), r.excluded());
    print_cells(r.summary, false);
    return budget_exit(r.episodes.size(), r.excluded());
}

int cmd_robust(const Flags& f)
{
    const ExperimentConfig c =
        build_config(f, {Distribution::gaussian}, {PolicyId::kode, PolicyId::idea, PolicyId::kalman_ucb});
    prepare_out(c);
    const RobustnessResult r = run_robustness(c);
    std::vector<EpisodeResult> all = r.baseline;
    all.insert(all.end(), r.episodes.begin(), r.episodes.end());
    std::vector<CellSummary> cells = r.baseline_summary;
    cells.insert(cells.end(), r.summary.begin(), r.summary.end());
    write_episodes_csv(out_path(c, "robust_episodes.csv"), all);
    write_summary_csv(out_path(c, "robust_summary.csv"), cells);
    write_robustness_svg(out_path(c, "robustness.svg"), r.episodes, c.seed);
    write_manifest(c, "robust", all.size(), r.excluded());
    print_cells(cells, true);
    return budget_exit(all.size(), r.excluded());
}

int cmd_metric(const Flags& f)
{
    const ExperimentConfig c = build_config(f, all_distributions(), all_policies());
    prepare_out(c);
    const std::vector<MetricRow> rows = run_metric(c);
    write_metric_csv(out_path(c, "phi_intervals.csv"), rows);
    write_interval_scatter_svg(out_path(c, "intervals.svg"), rows, c.seed);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    write_manifest(c, "metric", rows.size(), failed);
    std::cout << rows.size() - failed << " environments evaluated, " << failed << " failed\n";
    return budget_exit(rows.size(), failed);
}

int cmd_bounds(const Flags& f)
{
    const ExperimentConfig c = build_config(f, {Distribution::gaussian}, all_policies());
    prepare_out(c);
    const std::vector<BoundRow> rows = run_bounds(c);
    write_bounds_csv(out_path(c, "bounds.csv"), rows);
    std::size_t failed = 0;
    for (const auto& r : rows) {
        failed += r.ok ? 0 : 1;
        std::cout << to_string(r.dist) << " env " << r.env << ": ";
        if (r.ok) {
            std::cout << "continuous " << format_number(r.continuous.value) << " (se "
                      << format_number(r.continuous.standard_error) << "), discrete " << format_number(r.discrete.value);
            if (!r.discrete.skipped.empty()) std::cout << " [" << r.discrete.skipped.size() << " pairs skipped]";
        } else {
            std::cout << "failed: " << r.error;
        }
        std::cout << '\n';
    }
    write_manifest(c, "bounds", rows.size(), failed);
    return budget_exit(rows.size(), failed);
}

int cmd_plot(const Flags& f)
{
    const std::string dir = f.given("out") ? f.out : std::string("results");
    std::uint64_t seed = 0;
    if (std::ifstream m(fs::path(dir) / "manifest.json"); m) {
        try {
            nlohmann::json j;
            m >> j;
            seed = j.at("master_seed").get<std::uint64_t>();
        } catch (const std::exception&) {
            std::cerr << "warning: unreadable manifest, seed unknown\n";
        }
    }
    int drawn = 0;
    if (fs::exists(fs::path(dir) / "episodes.csv")) {
        const auto eps = read_episodes_csv((fs::path(dir) / "episodes.csv").string());
        drawn += write_regret_scatter_svg((fs::path(dir) / "regret_scatter.svg").string(), eps, seed) ? 1 : 0;
    }
    if (fs::exists(fs::path(dir) / "phi_intervals.csv")) {
        const auto rows = read_metric_csv((fs::path(dir) / "phi_intervals.csv").string());
        drawn += write_interval_scatter_svg((fs::path(dir) / "intervals.svg").string(), rows, seed) ? 1 : 0;
    }
    if (fs::exists(fs::path(dir) / "robust_episodes.csv")) {
        const auto eps = read_episodes_csv((fs::path(dir) / "robust_episodes.csv").string());
        drawn += write_robustness_svg((fs::path(dir) / "robustness.svg").string(), eps, seed) ? 1 : 0;
    }
    std::cout << drawn << " figure(s) written to " << dir << '\n';
    if (drawn == 0) std::cerr << "warning: nothing to plot in '" << dir << "'\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Linear bandits driven by a linear Gaussian dynamical system"};
    app.require_subcommand(1);

    struct Entry {
        std::string name;
        std::string help;
        int (*fn)(const Flags&);
        Flags flags;
        CLI::App* sub = nullptr;
    };
    std::vector<Entry> entries;
    entries.push_back({"generate", "write random environment specs as JSON", cmd_generate, {}});
    entries.push_back({"validate", "check spec files", cmd_validate, {}});
    entries.push_back({"run", "run one episode per policy and write per-round traces", cmd_run, {}});
    entries.push_back({"bench", "randomized-environment benchmark (median/IQR table, scatter plot)", cmd_bench, {}});
    entries.push_back({"robust", "robustness to perturbed model matrices (box plots)", cmd_robust, {}});
    entries.push_back({"metric", "phi performance intervals for IDEA and Kalman-UCB", cmd_metric, {}});
    entries.push_back({"bounds", "continuous and discrete regret lower bounds", cmd_bounds, {}});
    entries.push_back({"plot", "re-render figures from the CSV files in --out", cmd_plot, {}});

    for (auto& e : entries) {
        e.sub = app.add_subcommand(e.name, e.help);
        add_common(e.sub, e.flags);
    }
    for (auto& e : entries) {
        if (e.name == "validate") e.sub->add_option("files", e.flags.files, "spec files")->required();
        if (e.name == "run") e.sub->add_option("--spec", e.flags.spec_path, "spec file (default: generate one)");
        if (e.name == "bench") e.sub->add_flag("--rounds", e.flags.rounds, "also write per-round traces (large)");
        if (e.name == "bounds") e.flags.opts["samples"] = e.sub->add_option("--samples", e.flags.samples, "Monte Carlo samples");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (auto& e : entries) {
        if (!e.sub->parsed()) continue;
        try {
            return e.fn(e.flags);
        } catch (const ConfigError& ex) {
            std::cerr << "config error: " << ex.what() << '\n';
            return kExitConfig;
        } catch (const ParameterError& ex) {
            std::cerr << "config error: " << ex.what() << '\n';
            return kExitConfig;
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << '\n';
            return kExitFailure;
        }
    }
    return kExitConfig;
}
