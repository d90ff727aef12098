#include "lgbandit/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace lgb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::array<std::pair<PolicyId, std::string_view>, 9> kPolicyNames{{
    {PolicyId::idea, "idea"},
    {PolicyId::kalman_ucb, "kalman_ucb"},
    {PolicyId::kode, "kode"},
    {PolicyId::kalman_oracle, "kalman_oracle"},
    {PolicyId::ucb, "ucb"},
    {PolicyId::sw_ucb, "sw_ucb"},
    {PolicyId::rexp3, "rexp3"},
    {PolicyId::oful, "oful"},
    {PolicyId::random, "random"},
}};

void check_delta(double delta, const char* who)
{
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError(std::string(who) + ": delta must lie in (0, 1)");
}

PolicyDecision decide(Vector scores)
{
    const std::size_t i = argmax_lowest(scores);
    return {i, std::move(scores)};
}

Vector one_hot(std::size_t k, std::size_t i)
{
    Vector v = Vector::Zero(static_cast<Eigen::Index>(k));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return v;
}

}  // namespace

std::string_view to_string(PolicyId id)
{
    for (const auto& [p, name] : kPolicyNames)
        if (p == id) return name;
    return "unknown";
}

PolicyId parse_policy(std::string_view name)
{
    for (const auto& [p, n] : kPolicyNames)
        if (n == name) return p;
    throw ParameterError("unknown policy '" + std::string(name) + "'");
}

const std::vector<PolicyId>& all_policies()
{
    static const std::vector<PolicyId> all = [] {
        std::vector<PolicyId> v;
        for (const auto& [p, n] : kPolicyNames) v.push_back(p);
        return v;
    }();
    return all;
}

bool is_filter_based(PolicyId id)
{
    return id == PolicyId::idea || id == PolicyId::kalman_ucb || id == PolicyId::kode ||
           id == PolicyId::kalman_oracle;
}

std::size_t argmax_lowest(const Vector& scores)
{
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores(i))) continue;
        if (best < 0 || scores(i) > scores(best)) best = i;
    }
    return best < 0 ? 0 : static_cast<std::size_t>(best);
}

// ---------------------------------------------------------------------------

Vector idea_optimism(const Matrix& p, const LgdsSpec& spec)
{
    const Matrix pc = p * spec.actions.transpose();   // d x k
    const Matrix gpc = spec.gamma * pc;
    Vector u(spec.k());
    for (Eigen::Index i = 0; i < spec.k(); ++i) {
        const double apa = std::max(0.0, spec.actions.row(i).dot(pc.col(i)));
        u(i) = std::sqrt(gpc.col(i).squaredNorm() / (apa + spec.sigma2()));
    }
    return u;
}

Vector kalman_ucb_optimism(const Matrix& p, const LgdsSpec& spec, double delta)
{
    check_delta(delta, "kalman_ucb");
    const double scale = std::log(1.0 / delta);
    const Matrix pc = p * spec.actions.transpose();
    Vector u(spec.k());
    for (Eigen::Index i = 0; i < spec.k(); ++i) {
        u(i) = std::sqrt(std::max(0.0, spec.actions.row(i).dot(pc.col(i))) * scale);
    }
    return u;
}

PolicyDecision idea_select(const KalmanState& kf, const LgdsSpec& spec)
{
    return decide(spec.actions * kf.zhat + idea_optimism(kf.p.matrix(), spec));
}

PolicyDecision kalman_ucb_select(const KalmanState& kf, const LgdsSpec& spec, double delta)
{
    return decide(spec.actions * kf.zhat + kalman_ucb_optimism(kf.p.matrix(), spec, delta));
}

PolicyDecision kode_select(const KalmanState& kf, const LgdsSpec& spec)
{
    return decide(spec.actions * kf.zhat);
}

PolicyDecision kalman_oracle_select(const OracleKalmanState& okf, const LgdsSpec& spec)
{
    return decide(spec.actions * okf.ztilde);
}

// ---------------------------------------------------------------------------

void UcbStatistics::record(std::size_t action, double reward)
{
    ++counts_.at(action);
    sums_[action] += reward;
}

PolicyDecision ucb_select(const UcbStatistics& bs, std::size_t /*t*/, double delta, double r)
{
    check_delta(delta, "ucb");
    if (!(r > 0.0)) throw ParameterError("ucb: R must be positive");
    const double width = 2.0 * r * r * std::log(1.0 / delta);
    Vector scores(static_cast<Eigen::Index>(bs.k()));
    for (std::size_t a = 0; a < bs.k(); ++a) {
        const auto n = bs.count(a);
        scores(static_cast<Eigen::Index>(a)) =
            n == 0 ? kInf : bs.mean(a) + std::sqrt(width / static_cast<double>(n));
    }
    return decide(std::move(scores));
}

SlidingWindowStatistics::SlidingWindowStatistics(std::size_t k, std::size_t window)
    : k_(k), window_(window)
{
    if (window < 1) throw ParameterError("sw_ucb: window must be at least 1");
}

void SlidingWindowStatistics::record(std::size_t t, std::size_t action, double reward)
{
    if (action >= k_) throw DimensionError("sw_ucb: action index out of range");
    visits_.push_back({t, action, reward});
    // Keep rounds that can still fall in a future window [t+1-T, t].
    while (!visits_.empty() && visits_.front().t + window_ <= t) visits_.pop_front();
}

UcbStatistics SlidingWindowStatistics::statistics_at(std::size_t t) const
{
    UcbStatistics stats(k_);
    for (const Visit& v : visits_) {
        if (v.t < t && v.t + window_ >= t) stats.record(v.action, v.reward);
    }
    return stats;
}

PolicyDecision sw_ucb_select(const SlidingWindowStatistics& bs, std::size_t t, double delta, double r,
                             std::size_t window)
{
    if (window != bs.window()) throw ParameterError("sw_ucb: window does not match the recorded history");
    return ucb_select(bs.statistics_at(t), t, delta, r);
}

// ---------------------------------------------------------------------------

Rexp3State::Rexp3State(std::size_t k, std::size_t batch, double gamma, double reward_scale,
                       std::uint64_t seed)
    : k_(k), batch_(batch), gamma_(gamma), reward_scale_(reward_scale), rng_(seed)
{
    if (k < 1) throw ParameterError("rexp3: k must be at least 1");
    if (batch < 1) throw ParameterError("rexp3: batch size must be at least 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("rexp3: gamma must lie in (0, 1]");
    if (!(reward_scale > 0.0)) throw ParameterError("rexp3: reward scale must be positive");
    reset();
}

void Rexp3State::reset()
{
    log_weights_ = Vector::Zero(static_cast<Eigen::Index>(k_));
    refresh_probabilities();
}

void Rexp3State::refresh_probabilities()
{
    const double top = log_weights_.maxCoeff();
    const Vector w = (log_weights_.array() - top).exp().matrix();
    const double kk = static_cast<double>(k_);
    probs_ = ((1.0 - gamma_) * w / w.sum()).array() + gamma_ / kk;
}

void Rexp3State::update(std::size_t action, double reward)
{
    const double squashed = std::clamp((reward + 3.0 * reward_scale_) / (6.0 * reward_scale_), 0.0, 1.0);
    const auto a = static_cast<Eigen::Index>(action);
    const double estimate = squashed / probs_(a);
    log_weights_(a) += gamma_ * estimate / static_cast<double>(k_);
    refresh_probabilities();
}

PolicyDecision rexp3_select(Rexp3State& state, std::size_t t)
{
    if (t % state.batch_ == 0) state.reset();
    const double u = state.rng_.uniform();
    double acc = 0.0;
    std::size_t chosen = state.k_ - 1;
    for (std::size_t i = 0; i < state.k_; ++i) {
        acc += state.probs_(static_cast<Eigen::Index>(i));
        if (u < acc) {
            chosen = i;
            break;
        }
    }
    return {chosen, one_hot(state.k_, chosen)};
}

// ---------------------------------------------------------------------------

OfulState::OfulState(Eigen::Index d, double lambda, double delta, double noise_sigma)
    : v_(lambda * Matrix::Identity(d, d)), b_(Vector::Zero(d)), lambda_(lambda), delta_(delta),
      sigma_(noise_sigma)
{
    if (!(lambda > 0.0)) throw ParameterError("oful: lambda must be positive");
    check_delta(delta, "oful");
}

void OfulState::update(const Vector& action, double reward)
{
    v_ += action * action.transpose();
    b_ += reward * action;
    ++n_;
}

Vector OfulState::estimate() const
{
    return Eigen::LLT<Matrix>(v_).solve(b_);
}

double OfulState::radius(std::size_t t) const
{
    const double d = static_cast<double>(v_.rows());
    return std::sqrt(lambda_) +
           sigma_ * std::sqrt(2.0 * std::log(1.0 / delta_) +
                              d * std::log(1.0 + static_cast<double>(t) / (lambda_ * d)));
}

PolicyDecision oful_select(const OfulState& state, const LgdsSpec& spec, std::size_t t)
{
    const Eigen::LLT<Matrix> llt(state.v_);
    const Vector theta = llt.solve(state.b_);
    const Matrix vinv_at = llt.solve(spec.actions.transpose());  // d x k
    const double beta = state.radius(t);
    Vector scores(spec.k());
    for (Eigen::Index i = 0; i < spec.k(); ++i) {
        const double width = std::max(0.0, spec.actions.row(i).dot(vinv_at.col(i)));
        scores(i) = spec.actions.row(i).dot(theta) + beta * std::sqrt(width);
    }
    return decide(std::move(scores));
}

PolicyDecision random_select(std::size_t k, RandomStream& rng)
{
    if (k < 1) throw ParameterError("random: k must be at least 1");
    const std::size_t i = rng.index(k);
    return {i, one_hot(k, i)};
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const PolicyParams& p)
{
    j = nlohmann::json{{"kalman_ucb_delta", p.kalman_ucb_delta},
                       {"ucb_delta", p.ucb_delta},
                       {"oful_lambda", p.oful_lambda},
                       {"oful_delta", p.oful_delta}};
    if (p.ucb_scale) j["ucb_scale"] = *p.ucb_scale;
    if (p.sw_window) j["sw_window"] = *p.sw_window;
    if (p.rexp3_batch) j["rexp3_batch"] = *p.rexp3_batch;
    if (p.rexp3_gamma) j["rexp3_gamma"] = *p.rexp3_gamma;
}

void from_json(const nlohmann::json& j, PolicyParams& p)
{
    p = PolicyParams{};
    if (j.contains("kalman_ucb_delta")) p.kalman_ucb_delta = j.at("kalman_ucb_delta").get<double>();
    if (j.contains("ucb_delta")) p.ucb_delta = j.at("ucb_delta").get<double>();
    if (j.contains("oful_lambda")) p.oful_lambda = j.at("oful_lambda").get<double>();
    if (j.contains("oful_delta")) p.oful_delta = j.at("oful_delta").get<double>();
    if (j.contains("ucb_scale")) p.ucb_scale = j.at("ucb_scale").get<double>();
    if (j.contains("sw_window")) p.sw_window = j.at("sw_window").get<std::size_t>();
    if (j.contains("rexp3_batch")) p.rexp3_batch = j.at("rexp3_batch").get<std::size_t>();
    if (j.contains("rexp3_gamma")) p.rexp3_gamma = j.at("rexp3_gamma").get<double>();
}

double default_reward_scale(const LgdsSpec& spec)
{
    const Matrix z = spectral_radius(spec.gamma) < 1.0 ? solve_lyapunov(spec.gamma, spec.q).matrix()
                                                       : spec.sigma0.matrix();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < spec.k(); ++i) {
        const Vector a = spec.actions.row(i).transpose();
        worst = std::max(worst, a.dot(z * a));
    }
    return std::sqrt(worst + spec.sigma2());
}

ResolvedParams resolve_params(const PolicyParams& params, const LgdsSpec& spec, std::size_t horizon)
{
    check_delta(params.kalman_ucb_delta, "kalman_ucb");
    check_delta(params.ucb_delta, "ucb");
    check_delta(params.oful_delta, "oful");
    if (!(params.oful_lambda > 0.0)) throw ParameterError("oful: lambda must be positive");
    if (params.ucb_scale && !(*params.ucb_scale > 0.0)) throw ParameterError("ucb: R must be positive");
    if (params.sw_window && *params.sw_window < 1) throw ParameterError("sw_ucb: window must be at least 1");
    if (params.rexp3_batch && *params.rexp3_batch < 1) throw ParameterError("rexp3: batch must be at least 1");
    if (params.rexp3_gamma && !(*params.rexp3_gamma > 0.0 && *params.rexp3_gamma <= 1.0)) {
        throw ParameterError("rexp3: gamma must lie in (0, 1]");
    }

    const double k = static_cast<double>(spec.k());
    const double n = static_cast<double>(std::max<std::size_t>(horizon, 1));
    const double klogk = k * std::log(k);

    ResolvedParams r{};
    r.kalman_ucb_delta = params.kalman_ucb_delta;
    r.ucb_delta = params.ucb_delta;
    r.ucb_scale = params.ucb_scale ? *params.ucb_scale : default_reward_scale(spec);
    r.sw_window = params.sw_window ? *params.sw_window : static_cast<std::size_t>(std::ceil(std::sqrt(n)));
    r.rexp3_batch = params.rexp3_batch
                        ? *params.rexp3_batch
                        : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::cbrt(klogk) * std::pow(n, 2.0 / 3.0))));
    if (params.rexp3_gamma) {
        r.rexp3_gamma = *params.rexp3_gamma;
    } else {
        const double g = std::sqrt(klogk / ((std::numbers::e - 1.0) * static_cast<double>(r.rexp3_batch)));
        r.rexp3_gamma = g > 0.0 ? std::min(1.0, g) : 1.0;
    }
    r.oful_lambda = params.oful_lambda;
    r.oful_delta = params.oful_delta;
    return r;
}

// ---------------------------------------------------------------------------
// Policy objects
// ---------------------------------------------------------------------------

namespace {

class FilterPolicy : public Policy {
public:
    FilterPolicy(PolicyId id, const LgdsSpec& spec, double delta)
        : id_(id), spec_(spec), kf_(kf_init(spec)), delta_(delta)
    {
    }

    PolicyId id() const override { return id_; }

    PolicyDecision select(std::size_t) override
    {
        switch (id_) {
        case PolicyId::idea:
            return idea_select(kf_, spec_);
        case PolicyId::kalman_ucb:
            return kalman_ucb_select(kf_, spec_, delta_);
        default:
            return kode_select(kf_, spec_);
        }
    }

    void observe(std::size_t, std::size_t action, double reward) override
    {
        kf_ = kf_update(kf_, action, reward, spec_);
    }

    const Vector* state_estimate() const override { return &kf_.zhat; }
    const SpdMatrix* error_covariance() const override { return &kf_.p; }

private:
    PolicyId id_;
    const LgdsSpec& spec_;
    KalmanState kf_;
    double delta_;
};

class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(const LgdsSpec& spec) : spec_(spec), okf_(oracle_kf_init(spec)) {}

    PolicyId id() const override { return PolicyId::kalman_oracle; }
    PolicyDecision select(std::size_t) override { return kalman_oracle_select(okf_, spec_); }
    void observe(std::size_t, std::size_t, double) override
    {
        throw ParameterError("kalman_oracle requires the full reward vector");
    }
    bool full_information() const override { return true; }
    void observe_all(std::size_t, const Vector& rewards) override
    {
        okf_ = oracle_kf_update(okf_, rewards, spec_);
    }
    const Vector* state_estimate() const override { return &okf_.ztilde; }

private:
    const LgdsSpec& spec_;
    OracleKalmanState okf_;
};

class UcbPolicy : public Policy {
public:
    UcbPolicy(const LgdsSpec& spec, double delta, double r)
        : stats_(static_cast<std::size_t>(spec.k())), delta_(delta), r_(r)
    {
    }
    PolicyId id() const override { return PolicyId::ucb; }
    PolicyDecision select(std::size_t t) override { return ucb_select(stats_, t, delta_, r_); }
    void observe(std::size_t, std::size_t action, double reward) override { stats_.record(action, reward); }

private:
    UcbStatistics stats_;
    double delta_;
    double r_;
};

class SwUcbPolicy : public Policy {
public:
    SwUcbPolicy(const LgdsSpec& spec, double delta, double r, std::size_t window)
        : stats_(static_cast<std::size_t>(spec.k()), window), delta_(delta), r_(r)
    {
    }
    PolicyId id() const override { return PolicyId::sw_ucb; }
    PolicyDecision select(std::size_t t) override
    {
        return sw_ucb_select(stats_, t, delta_, r_, stats_.window());
    }
    void observe(std::size_t t, std::size_t action, double reward) override
    {
        stats_.record(t, action, reward);
    }

private:
    SlidingWindowStatistics stats_;
    double delta_;
    double r_;
};

class Rexp3Policy : public Policy {
public:
    Rexp3Policy(const LgdsSpec& spec, const ResolvedParams& p, std::uint64_t seed)
        : state_(static_cast<std::size_t>(spec.k()), p.rexp3_batch, p.rexp3_gamma, p.ucb_scale, seed)
    {
    }
    PolicyId id() const override { return PolicyId::rexp3; }
    PolicyDecision select(std::size_t t) override { return rexp3_select(state_, t); }
    void observe(std::size_t, std::size_t action, double reward) override { state_.update(action, reward); }

private:
    Rexp3State state_;
};

class OfulPolicy : public Policy {
public:
    OfulPolicy(const LgdsSpec& spec, const ResolvedParams& p)
        : spec_(spec), state_(spec.d(), p.oful_lambda, p.oful_delta, spec.sigma)
    {
    }
    PolicyId id() const override { return PolicyId::oful; }
    PolicyDecision select(std::size_t) override
    {
        return oful_select(state_, spec_, state_.observations());
    }
    void observe(std::size_t, std::size_t action, double reward) override
    {
        state_.update(spec_.action(action), reward);
    }

private:
    const LgdsSpec& spec_;
    OfulState state_;
};

class RandomPolicy : public Policy {
public:
    RandomPolicy(const LgdsSpec& spec, std::uint64_t seed)
        : k_(static_cast<std::size_t>(spec.k())), rng_(seed)
    {
    }
    PolicyId id() const override { return PolicyId::random; }
    PolicyDecision select(std::size_t) override { return random_select(k_, rng_); }
    void observe(std::size_t, std::size_t, double) override {}

private:
    std::size_t k_;
    RandomStream rng_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyId id, const PolicyParams& params, const LgdsSpec& spec,
                                    std::size_t horizon, std::uint64_t seed)
{
    switch (id) {
    case PolicyId::idea:
    case PolicyId::kode:
        return std::make_unique<FilterPolicy>(id, spec, params.kalman_ucb_delta);
    case PolicyId::kalman_ucb:
        check_delta(params.kalman_ucb_delta, "kalman_ucb");
        return std::make_unique<FilterPolicy>(id, spec, params.kalman_ucb_delta);
    case PolicyId::kalman_oracle:
        return std::make_unique<OraclePolicy>(spec);
    default:
        break;
    }
    const ResolvedParams p = resolve_params(params, spec, horizon);
    switch (id) {
    case PolicyId::ucb:
        return std::make_unique<UcbPolicy>(spec, p.ucb_delta, p.ucb_scale);
    case PolicyId::sw_ucb:
        return std::make_unique<SwUcbPolicy>(spec, p.ucb_delta, p.ucb_scale, p.sw_window);
    case PolicyId::rexp3:
        return std::make_unique<Rexp3Policy>(spec, p, seed);
    case PolicyId::oful:
        return std::make_unique<OfulPolicy>(spec, p);
    case PolicyId::random:
        return std::make_unique<RandomPolicy>(spec, seed);
    default:
        throw ParameterError("make_policy: unhandled policy");
    }
}

}  // namespace lgb
