#include "lgbandit/filtering.hpp"

namespace lgb {

namespace {

void check_index(std::size_t i, const LgdsSpec& spec)
{
    if (i >= static_cast<std::size_t>(spec.k())) throw DimensionError("action index out of range");
}

}  // namespace

KalmanState kf_init(const LgdsSpec& spec)
{
    return {Vector::Zero(spec.d()), spec.sigma0};
}

RewardPrediction kf_predict_reward(const KalmanState& kf, std::size_t action_index,
                                   const LgdsSpec& spec)
{
    check_index(action_index, spec);
    const Vector a = spec.action(action_index);
    return {a.dot(kf.zhat), a.dot(kf.p.matrix() * a) + spec.sigma2()};
}

KalmanState kf_update(const KalmanState& kf, std::size_t action_index, double reward,
                      const LgdsSpec& spec)
{
    check_index(action_index, spec);
    const Vector a = spec.action(action_index);
    const Vector pa = kf.p.matrix() * a;
    const double innovation_var = a.dot(pa) + spec.sigma2();
    const double innovation = reward - a.dot(kf.zhat);
    const Vector gain = pa / innovation_var;
    return {spec.gamma * (kf.zhat + gain * innovation),
            riccati_map(kf.p, a, spec.gamma, spec.q, spec.sigma2())};
}

OracleKalmanState oracle_kf_init(const LgdsSpec& spec)
{
    SteadyStateFilter ss = solve_dare_multi(spec.gamma, spec.actions, spec.q, spec.sigma2());
    return {Vector::Zero(spec.d()), std::move(ss.gain), std::move(ss.covariance)};
}

OracleKalmanState oracle_kf_update(const OracleKalmanState& okf, const Vector& rewards,
                                   const LgdsSpec& spec)
{
    if (rewards.size() != spec.k()) throw DimensionError("oracle_kf_update: reward vector has wrong length");
    OracleKalmanState next = okf;
    next.ztilde = spec.gamma * (okf.ztilde + okf.gain * (rewards - spec.actions * okf.ztilde));
    return next;
}

}  // namespace lgb
