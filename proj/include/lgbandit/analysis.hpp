#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lgbandit/environment.hpp"
#include "lgbandit/numerics.hpp"
#include "lgbandit/random.hpp"

namespace lgb {

// ---------------------------------------------------------------------------
// Regret
// ---------------------------------------------------------------------------

/// <a*, z> - <a_chosen, z>; noise free.
double instantaneous_regret(const Vector& z, std::size_t chosen, const LgdsSpec& spec);

/// (R_method - R_oracle) / |R_oracle|; empty when |R_oracle| < 1e-12.
std::optional<double> normalized_regret(double r_method, double r_oracle);

/// Regret bound for argmax <a, zhat> + u(a) policies:
///   r_t <= u(a_t) - u(a*_t) + 2 ||z - zhat||.
/// Returns bound minus the realized instantaneous regret (nonnegative when
/// the inequality holds).
double optimism_bound_gap(const Vector& z, const Vector& zhat, std::size_t chosen,
                          const Vector& optimism, const LgdsSpec& spec);

// ---------------------------------------------------------------------------
// Observability
// ---------------------------------------------------------------------------

/// sum_{tau=t0}^{t1} (G')^tau a_tau a_tau' G^tau. actions[tau] is the action
/// played at round tau.
SpdMatrix observability_gramian(const Matrix& gamma, const std::vector<Vector>& actions,
                                std::size_t t0, std::size_t t1);

/// Smallest eigenvalue above Tolerances::rank times the largest.
bool is_observable(const SpdMatrix& gramian);

/// Greedy pure-exploration schedule argmax_i a_i' P a_i with P advanced by
/// the Riccati map of the chosen action, starting from p0.
std::vector<std::size_t> exploration_schedule(const LgdsSpec& spec, const SpdMatrix& p0,
                                              std::size_t rounds);

/// Smallest period p <= max_period such that the last `tail` entries of seq
/// repeat with period p, if any.
std::optional<std::size_t> trailing_period(const std::vector<std::size_t>& seq, std::size_t tail,
                                           std::size_t max_period);

// ---------------------------------------------------------------------------
// Comparison metric
// ---------------------------------------------------------------------------

/// ||mu1 - mu2|| + tr(S1 + S2) - 2 tr((S2^1/2 S1 S2^1/2)^1/2).
/// The mean enters unsquared.
double wasserstein2_gaussian_cost(const Vector& mu1, const SpdMatrix& s1, const Vector& mu2,
                                  const SpdMatrix& s2);

/// Optimism term u(. | P) evaluated at every action.
using OptimismTerm = std::function<Vector(const Matrix& p, const LgdsSpec& spec)>;

OptimismTerm idea_term();
OptimismTerm kalman_ucb_term(double delta);
OptimismTerm zero_term();

/// Precomputes the pieces of phi(i, j | P) that do not depend on P or on the
/// optimism term: the stationary covariance Z, the oracle prediction
/// covariance Z - P_A, the difference matrices A_i and the oracle-side
/// covariances Sigma_{i,j}.
class PhiEvaluator {
public:
    /// Throws ParameterError when the state matrix is not stable.
    explicit PhiEvaluator(const LgdsSpec& spec);

    const LgdsSpec& spec() const { return spec_; }
    const SpdMatrix& stationary() const { return z_; }
    const SpdMatrix& oracle_prediction_covariance() const { return z_tilde_; }

    /// Rows a_i - a_s for s != i, in index order; (k-1) x d.
    const Matrix& difference_matrix(std::size_t i) const { return diffs_[i]; }

    /// (u_i - u_s for s != i, then k-1 zeros).
    Vector mean(std::size_t i, const Vector& optimism) const;

    /// Learner-side covariance built from Z - P.
    SpdMatrix learner_covariance(std::size_t i, std::size_t j, const Matrix& p) const;

    /// Oracle-side covariance built from Z - P_A.
    const SpdMatrix& oracle_covariance(std::size_t i, std::size_t j) const;

    /// tr(Sh + S) - 2 tr((S^1/2 Sh S^1/2)^1/2), the optimism-independent part.
    double covariance_cost(std::size_t i, std::size_t j, const Matrix& p) const;

    double phi(std::size_t i, std::size_t j, const Matrix& p, const Vector& optimism) const;

private:
    std::size_t pair_index(std::size_t i, std::size_t j) const { return i * k_ + j; }

    const LgdsSpec& spec_;
    std::size_t k_;
    SpdMatrix z_;
    SpdMatrix z_tilde_;
    std::vector<Matrix> diffs_;
    std::vector<SpdMatrix> oracle_cov_;
    std::vector<Matrix> oracle_cov_root_;
};

double phi_metric(std::size_t i, std::size_t j, const Matrix& p, const LgdsSpec& spec,
                  const OptimismTerm& u);

struct PhiInterval {
    double min = 0.0;
    double max = 0.0;
    bool empty = false;  // k = 1: no ordered pair i != j
};

struct PhiValue {
    std::size_t i;
    std::size_t j;
    std::size_t conditioning_action;
    double value;
};

struct PhiReport {
    std::vector<PhiValue> values;
    PhiInterval interval;
};

/// Evaluates phi(i, j | P_a) for every ordered pair i != j and every action a,
/// P_a the single-action steady covariance. One report per optimism term;
/// the covariance work is shared.
std::vector<PhiReport> phi_reports(const LgdsSpec& spec, const std::vector<OptimismTerm>& terms,
                                   bool keep_values = false);

PhiInterval phi_interval(const LgdsSpec& spec, const OptimismTerm& u);

// ---------------------------------------------------------------------------
// Lower bounds
// ---------------------------------------------------------------------------

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// n * (E sqrt(v'Zv) - E sqrt(v'(Z - P_floor)v)), v ~ N(0, I), both
/// expectations on the same draws.
MonteCarloEstimate lower_bound_continuous_mc(const LgdsSpec& spec, std::size_t horizon,
                                             const SpdMatrix& p_floor, std::size_t samples,
                                             RandomStream& rng);

struct DiscreteBound {
    double value = 0.0;
    /// Ordered pairs skipped because a conditioning covariance was singular.
    std::vector<std::pair<std::size_t, std::size_t>> skipped;
};

/// n * sum_{i,j} sqrt(2 (a_j - a_i)' Z (a_j - a_i) / (tr(Psi_ij)^(2k-2) |Sigma~_ij|)).
DiscreteBound lower_bound_discrete(const LgdsSpec& spec, std::size_t horizon);

}  // namespace lgb
