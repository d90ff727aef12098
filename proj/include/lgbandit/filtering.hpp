#pragma once

#include "lgbandit/environment.hpp"
#include "lgbandit/numerics.hpp"

namespace lgb {

/// One-step-ahead prediction z_{t|t-1} and its error covariance P_{t|t-1}
/// for a filter that sees a single scalar reward per round.
struct KalmanState {
    Vector zhat;
    SpdMatrix p;
};

KalmanState kf_init(const LgdsSpec& spec);

struct RewardPrediction {
    double mean = 0.0;
    double variance = 0.0;  // innovation variance a'Pa + sigma^2
};

RewardPrediction kf_predict_reward(const KalmanState& kf, std::size_t action_index,
                                   const LgdsSpec& spec);

/// Predictor recursion
///   K    = P a (a'Pa + s2)^-1
///   z'   = G z + G K (X - <a, z>)
///   P'   = g(P, a)
KalmanState kf_update(const KalmanState& kf, std::size_t action_index, double reward,
                      const LgdsSpec& spec);

/// Steady-gain filter fed the full reward vector C z + eta every round.
struct OracleKalmanState {
    Vector ztilde;
    Matrix gain;     // d x k
    SpdMatrix p_all; // steady error covariance under full observation
};

OracleKalmanState oracle_kf_init(const LgdsSpec& spec);

OracleKalmanState oracle_kf_update(const OracleKalmanState& okf, const Vector& rewards,
                                   const LgdsSpec& spec);

}  // namespace lgb
