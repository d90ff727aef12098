#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lgbandit/environment.hpp"
#include "lgbandit/filtering.hpp"

namespace lgb {

enum class PolicyId { idea, kalman_ucb, kode, kalman_oracle, ucb, sw_ucb, rexp3, oful, random };

std::string_view to_string(PolicyId id);
PolicyId parse_policy(std::string_view name);
const std::vector<PolicyId>& all_policies();

/// Policies that keep a Kalman predictor of the state.
bool is_filter_based(PolicyId id);

struct PolicyDecision {
    std::size_t action_index = 0;
    Vector scores;
};

/// Index of the maximum score, lowest index among ties. NaN never wins.
std::size_t argmax_lowest(const Vector& scores);

// ---------------------------------------------------------------------------
// Kalman-filter policies: argmax_a <a, zhat> + u(a | P)
// ---------------------------------------------------------------------------

/// u(a|P) = sqrt(tr(G P a a' P G') / (a'Pa + s2)) = ||G P a|| / sqrt(a'Pa + s2)
Vector idea_optimism(const Matrix& p, const LgdsSpec& spec);

/// u(a|P) = sqrt(a'Pa * log(1/delta))
Vector kalman_ucb_optimism(const Matrix& p, const LgdsSpec& spec, double delta);

PolicyDecision idea_select(const KalmanState& kf, const LgdsSpec& spec);
PolicyDecision kalman_ucb_select(const KalmanState& kf, const LgdsSpec& spec, double delta);
PolicyDecision kode_select(const KalmanState& kf, const LgdsSpec& spec);
PolicyDecision kalman_oracle_select(const OracleKalmanState& okf, const LgdsSpec& spec);

// ---------------------------------------------------------------------------
// Classical baselines
// ---------------------------------------------------------------------------

/// Visit counts and reward sums per action.
class UcbStatistics {
public:
    explicit UcbStatistics(std::size_t k) : counts_(k, 0), sums_(k, 0.0) {}

    void record(std::size_t action, double reward);

    std::size_t k() const { return counts_.size(); }
    std::size_t count(std::size_t a) const { return counts_[a]; }
    double sum(std::size_t a) const { return sums_[a]; }
    double mean(std::size_t a) const { return counts_[a] == 0 ? 0.0 : sums_[a] / static_cast<double>(counts_[a]); }

private:
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
};

/// Unvisited actions score +inf; others mean + sqrt(2 R^2 log(1/delta) / N).
PolicyDecision ucb_select(const UcbStatistics& bs, std::size_t t, double delta, double r);

/// History restricted to the last `window` rounds.
class SlidingWindowStatistics {
public:
    SlidingWindowStatistics(std::size_t k, std::size_t window);

    void record(std::size_t t, std::size_t action, double reward);

    std::size_t k() const { return k_; }
    std::size_t window() const { return window_; }

    /// Counts and sums over rounds tau with t - window <= tau < t.
    UcbStatistics statistics_at(std::size_t t) const;

private:
    struct Visit {
        std::size_t t;
        std::size_t action;
        double reward;
    };
    std::size_t k_;
    std::size_t window_;
    std::deque<Visit> visits_;
};

PolicyDecision sw_ucb_select(const SlidingWindowStatistics& bs, std::size_t t, double delta, double r,
                             std::size_t window);

/// Exp3 restarted every `batch` rounds. Rewards are squashed into [0, 1]
/// with clamp((X + 3R) / (6R), 0, 1).
class Rexp3State {
public:
    Rexp3State(std::size_t k, std::size_t batch, double gamma, double reward_scale, std::uint64_t seed);

    const Vector& probabilities() const { return probs_; }
    std::size_t batch() const { return batch_; }
    double gamma() const { return gamma_; }

    void update(std::size_t action, double reward);

private:
    friend PolicyDecision rexp3_select(Rexp3State& state, std::size_t t);
    void reset();
    void refresh_probabilities();

    std::size_t k_;
    std::size_t batch_;
    double gamma_;
    double reward_scale_;
    Vector log_weights_;
    Vector probs_;
    RandomStream rng_;
};

/// Samples an action; resets the weights when t is a multiple of the batch
/// size. scores is the one-hot vector of the sampled action.
PolicyDecision rexp3_select(Rexp3State& state, std::size_t t);

/// Ridge regression on (a_s, X_s) pairs with ellipsoidal confidence bonus.
class OfulState {
public:
    OfulState(Eigen::Index d, double lambda, double delta, double noise_sigma);

    void update(const Vector& action, double reward);

    const Matrix& design() const { return v_; }
    Vector estimate() const;
    double radius(std::size_t t) const;
    std::size_t observations() const { return n_; }

private:
    friend PolicyDecision oful_select(const OfulState& state, const LgdsSpec& spec, std::size_t t);
    Matrix v_;
    Vector b_;
    double lambda_;
    double delta_;
    double sigma_;
    std::size_t n_ = 0;
};

/// scores_i = <a_i, theta> + beta_t sqrt(a_i' V^-1 a_i),
/// beta_t = sqrt(lambda) + sigma sqrt(2 log(1/delta) + d log(1 + t/(lambda d))).
PolicyDecision oful_select(const OfulState& state, const LgdsSpec& spec, std::size_t t);

/// Uniform draw; scores is the one-hot vector of the draw.
PolicyDecision random_select(std::size_t k, RandomStream& rng);

// ---------------------------------------------------------------------------
// Uniform policy interface used by the harness
// ---------------------------------------------------------------------------

struct PolicyParams {
    double kalman_ucb_delta = 0.36787944117144233;  // 1/e
    double ucb_delta = 0.05;
    std::optional<double> ucb_scale;          // R; default from the stationary covariance
    std::optional<std::size_t> sw_window;     // default ceil(sqrt(n))
    std::optional<std::size_t> rexp3_batch;   // default ceil((k log k)^(1/3) n^(2/3))
    std::optional<double> rexp3_gamma;        // default min(1, sqrt(k log k / ((e-1) batch)))
    double oful_lambda = 1.0;
    double oful_delta = 0.05;
};

void to_json(nlohmann::json& j, const PolicyParams& p);
void from_json(const nlohmann::json& j, PolicyParams& p);

/// Parameters after defaults have been resolved for a given spec and horizon.
struct ResolvedParams {
    double kalman_ucb_delta;
    double ucb_delta;
    double ucb_scale;
    std::size_t sw_window;
    std::size_t rexp3_batch;
    double rexp3_gamma;
    double oful_lambda;
    double oful_delta;
};

/// Throws ParameterError for out-of-range values.
ResolvedParams resolve_params(const PolicyParams& params, const LgdsSpec& spec, std::size_t horizon);

/// R = sqrt(max_a a' Z a + sigma^2) with Z the stationary state covariance
/// (sigma0 when the state matrix is not stable).
double default_reward_scale(const LgdsSpec& spec);

class Policy {
public:
    virtual ~Policy() = default;

    virtual PolicyId id() const = 0;
    virtual PolicyDecision select(std::size_t t) = 0;
    virtual void observe(std::size_t t, std::size_t action, double reward) = 0;

    /// Full-information policies receive every action's reward instead.
    virtual bool full_information() const { return false; }
    virtual void observe_all(std::size_t /*t*/, const Vector& /*rewards*/) {}

    /// Current state prediction for filter-based policies.
    virtual const Vector* state_estimate() const { return nullptr; }
    /// Current prediction error covariance for scalar-observation filters.
    virtual const SpdMatrix* error_covariance() const { return nullptr; }
};

/// `spec` is the model the policy believes in (possibly perturbed).
std::unique_ptr<Policy> make_policy(PolicyId id, const PolicyParams& params, const LgdsSpec& spec,
                                    std::size_t horizon, std::uint64_t seed);

}  // namespace lgb
