#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lgbandit/numerics.hpp"
#include "lgbandit/random.hpp"

namespace lgb {

/// Parameter distributions used to draw random environments.
enum class Distribution { gaussian, uniform, exponential, cauchy, bernoulli };

std::string_view to_string(Distribution dist);

/// Throws ParameterError on unknown names.
Distribution parse_distribution(std::string_view name);

const std::vector<Distribution>& all_distributions();

struct SpecMeta {
    Distribution dist = Distribution::gaussian;
    std::uint64_t seed = 0;
    double rho_target = 0.0;
};

/// A fully known linear Gaussian dynamical system with a finite action set:
///
///   z_{t+1} = gamma z_t + xi_t,      xi_t  ~ N(0, q)
///   X_t     = <a_t, z_t> + eta_t,    eta_t ~ N(0, sigma^2)
///   z_0 ~ N(0, sigma0)
///
/// Actions are the rows of `actions` (k x d).
struct LgdsSpec {
    Matrix gamma;
    Matrix actions;
    SpdMatrix q;
    double sigma = 1.0;
    SpdMatrix sigma0;
    std::optional<SpecMeta> meta;

    Eigen::Index d() const { return gamma.rows(); }
    Eigen::Index k() const { return actions.rows(); }
    double sigma2() const { return sigma * sigma; }
    Vector action(std::size_t i) const { return actions.row(static_cast<Eigen::Index>(i)).transpose(); }
};

LgdsSpec generate_spec(Distribution dist, Eigen::Index d, Eigen::Index k, double rho_target,
                       std::uint64_t seed);

struct ValidationReport {
    std::vector<double> action_norm_deviation;  // | ||a_i|| - 1 |
    bool actions_unit_norm = true;
    bool q_psd = true;
    bool sigma0_psd = true;
    bool sigma_positive = true;
    Eigen::Index controllability_rank = 0;
    bool controllable = true;
    double spectral_radius = 0.0;
    bool dimensions_consistent = true;

    bool ok() const
    {
        return dimensions_consistent && actions_unit_norm && q_psd && sigma0_psd && sigma_positive &&
               controllable;
    }
};

ValidationReport validate_spec(const LgdsSpec& spec);

/// Hidden state of one episode. Process noise comes from a sequential
/// stream; measurement noise for action i at round t is a pure function of
/// (measurement_key, t, i), so every policy facing the same state sees the
/// same noise table.
struct EnvState {
    Vector z;
    std::size_t t = 0;
    RandomStream process;
    std::uint64_t measurement_key = 0;
    Matrix process_factor;  // cached factor of Q
};

EnvState init_state(const LgdsSpec& spec, std::uint64_t seed, std::size_t warmup);

void step(EnvState& state, const LgdsSpec& spec);

double measurement_noise(const EnvState& state, std::size_t action_index);

double observe(const EnvState& state, const LgdsSpec& spec, std::size_t action_index);

Vector observe_all(const EnvState& state, const LgdsSpec& spec);

/// argmax_i <a_i, z>, lowest index on ties.
std::size_t oracle_action(const Vector& z, const LgdsSpec& spec);

inline std::size_t oracle_action(const EnvState& state, const LgdsSpec& spec)
{
    return oracle_action(state.z, spec);
}

void to_json(nlohmann::json& j, const LgdsSpec& spec);
void from_json(const nlohmann::json& j, LgdsSpec& spec);

void save_spec(const LgdsSpec& spec, const std::string& path);
LgdsSpec load_spec(const std::string& path);

}  // namespace lgb
