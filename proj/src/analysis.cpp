#include "lgbandit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgbandit/policies.hpp"

namespace lgb {

namespace {

// Tolerance for treating Z - P as PSD: both factors come out of iterative
// solvers, so tiny negative eigenvalues appear on near-singular directions.
constexpr double kDifferencePsdTol = 1e-8;

double trace_sqrt_product(const Matrix& root, const Matrix& s)
{
    const Matrix m = symmetrize(root * s * root);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

Matrix stack_blocks(const Matrix& ai, const Matrix& aj, const Matrix& top, const Matrix& bottom)
{
    const Eigen::Index m = ai.rows();
    Matrix s(2 * m, 2 * m);
    s.topLeftCorner(m, m) = ai * top * ai.transpose();
    s.topRightCorner(m, m) = ai * top * aj.transpose();
    s.bottomLeftCorner(m, m) = aj * top * ai.transpose();
    s.bottomRightCorner(m, m) = aj * bottom * aj.transpose();
    return s;
}

}  // namespace

double instantaneous_regret(const Vector& z, std::size_t chosen, const LgdsSpec& spec)
{
    const std::size_t best = oracle_action(z, spec);
    const double r = spec.actions.row(static_cast<Eigen::Index>(best)).dot(z) -
                     spec.actions.row(static_cast<Eigen::Index>(chosen)).dot(z);
    return std::max(0.0, r);
}

std::optional<double> normalized_regret(double r_method, double r_oracle)
{
    if (!(std::abs(r_oracle) >= 1e-12)) return std::nullopt;
    return (r_method - r_oracle) / std::abs(r_oracle);
}

double optimism_bound_gap(const Vector& z, const Vector& zhat, std::size_t chosen,
                          const Vector& optimism, const LgdsSpec& spec)
{
    const std::size_t best = oracle_action(z, spec);
    const double bound = optimism(static_cast<Eigen::Index>(chosen)) -
                         optimism(static_cast<Eigen::Index>(best)) + 2.0 * (z - zhat).norm();
    return bound - instantaneous_regret(z, chosen, spec);
}

// ---------------------------------------------------------------------------

SpdMatrix observability_gramian(const Matrix& gamma, const std::vector<Vector>& actions,
                                std::size_t t0, std::size_t t1)
{
    if (t0 > t1) throw DimensionError("observability_gramian: t0 must not exceed t1");
    if (t1 >= actions.size()) throw DimensionError("observability_gramian: action sequence too short");
    const Eigen::Index d = gamma.rows();
    Matrix power = Matrix::Identity(d, d);
    for (std::size_t tau = 0; tau < t0; ++tau) power = gamma * power;
    Matrix g = Matrix::Zero(d, d);
    for (std::size_t tau = t0; tau <= t1; ++tau) {
        if (actions[tau].size() != d) throw DimensionError("observability_gramian: action has wrong dimension");
        const Vector v = power.transpose() * actions[tau];
        g += v * v.transpose();
        power = gamma * power;
    }
    return SpdMatrix::trusted(symmetrize(g));
}

bool is_observable(const SpdMatrix& gramian)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(gramian.matrix(), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    return largest > 0.0 && ev.minCoeff() > Tolerances::rank * largest;
}

std::vector<std::size_t> exploration_schedule(const LgdsSpec& spec, const SpdMatrix& p0,
                                              std::size_t rounds)
{
    std::vector<std::size_t> seq;
    seq.reserve(rounds);
    SpdMatrix p = p0;
    for (std::size_t t = 0; t < rounds; ++t) {
        const Matrix pc = p.matrix() * spec.actions.transpose();
        Vector u(spec.k());
        for (Eigen::Index i = 0; i < spec.k(); ++i) u(i) = std::sqrt(std::max(0.0, spec.actions.row(i).dot(pc.col(i))));
        const std::size_t a = argmax_lowest(u);
        seq.push_back(a);
        p = riccati_map(p, spec.action(a), spec.gamma, spec.q, spec.sigma2());
    }
    return seq;
}

std::optional<std::size_t> trailing_period(const std::vector<std::size_t>& seq, std::size_t tail,
                                           std::size_t max_period)
{
    if (tail > seq.size() || tail == 0) return std::nullopt;
    const std::size_t start = seq.size() - tail;
    for (std::size_t p = 1; p <= max_period && p < tail; ++p) {
        bool periodic = true;
        for (std::size_t t = start; t + p < seq.size() && periodic; ++t) periodic = seq[t] == seq[t + p];
        if (periodic) return p;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

double wasserstein2_gaussian_cost(const Vector& mu1, const SpdMatrix& s1, const Vector& mu2,
                                  const SpdMatrix& s2)
{
    if (mu1.size() != mu2.size() || s1.dim() != s2.dim() || s1.dim() != mu1.size()) {
        throw DimensionError("wasserstein2_gaussian_cost: dimension mismatch");
    }
    const Matrix root = psd_sqrt(s2).matrix();
    return (mu1 - mu2).norm() + s1.matrix().trace() + s2.matrix().trace() -
           2.0 * trace_sqrt_product(root, s1.matrix());
}

OptimismTerm idea_term()
{
    return [](const Matrix& p, const LgdsSpec& spec) { return idea_optimism(p, spec); };
}

OptimismTerm kalman_ucb_term(double delta)
{
    return [delta](const Matrix& p, const LgdsSpec& spec) { return kalman_ucb_optimism(p, spec, delta); };
}

OptimismTerm zero_term()
{
    return [](const Matrix&, const LgdsSpec& spec) { return Vector::Zero(spec.k()).eval(); };
}

PhiEvaluator::PhiEvaluator(const LgdsSpec& spec)
    : spec_(spec), k_(static_cast<std::size_t>(spec.k()))
{
    if (spectral_radius(spec.gamma) >= 1.0) {
        throw ParameterError("phi: the state matrix is not stable, no stationary covariance exists");
    }
    z_ = solve_lyapunov(spec.gamma, spec.q);
    const SteadyStateFilter oracle = solve_dare_multi(spec.gamma, spec.actions, spec.q, spec.sigma2());
    z_tilde_ = project_psd(z_.matrix() - oracle.covariance.matrix(), kDifferencePsdTol);

    const Eigen::Index d = spec.d();
    diffs_.reserve(k_);
    for (std::size_t i = 0; i < k_; ++i) {
        Matrix a(static_cast<Eigen::Index>(k_) - 1, d);
        Eigen::Index row = 0;
        for (std::size_t s = 0; s < k_; ++s) {
            if (s == i) continue;
            a.row(row++) = spec.actions.row(static_cast<Eigen::Index>(i)) - spec.actions.row(static_cast<Eigen::Index>(s));
        }
        diffs_.push_back(std::move(a));
    }

    oracle_cov_.resize(k_ * k_);
    oracle_cov_root_.resize(k_ * k_);
    for (std::size_t i = 0; i < k_; ++i) {
        for (std::size_t j = 0; j < k_; ++j) {
            if (i == j) continue;
            SpdMatrix s = project_psd(stack_blocks(diffs_[i], diffs_[j], z_tilde_.matrix(), z_.matrix()),
                                      kDifferencePsdTol);
            oracle_cov_root_[pair_index(i, j)] = psd_sqrt(s).matrix();
            oracle_cov_[pair_index(i, j)] = std::move(s);
        }
    }
}

Vector PhiEvaluator::mean(std::size_t i, const Vector& optimism) const
{
    const Eigen::Index m = static_cast<Eigen::Index>(k_) - 1;
    Vector mu = Vector::Zero(2 * m);
    Eigen::Index row = 0;
    for (std::size_t s = 0; s < k_; ++s) {
        if (s == i) continue;
        mu(row++) = optimism(static_cast<Eigen::Index>(i)) - optimism(static_cast<Eigen::Index>(s));
    }
    return mu;
}

SpdMatrix PhiEvaluator::learner_covariance(std::size_t i, std::size_t j, const Matrix& p) const
{
    const Matrix zp = z_.matrix() - p;
    return project_psd(stack_blocks(diffs_[i], diffs_[j], zp, z_.matrix()), kDifferencePsdTol);
}

const SpdMatrix& PhiEvaluator::oracle_covariance(std::size_t i, std::size_t j) const
{
    if (i == j || i >= k_ || j >= k_) throw DimensionError("phi: requires distinct valid indices i != j");
    return oracle_cov_[pair_index(i, j)];
}

double PhiEvaluator::covariance_cost(std::size_t i, std::size_t j, const Matrix& p) const
{
    const SpdMatrix& oracle = oracle_covariance(i, j);
    const SpdMatrix learner = learner_covariance(i, j, p);
    return learner.matrix().trace() + oracle.matrix().trace() -
           2.0 * trace_sqrt_product(oracle_cov_root_[pair_index(i, j)], learner.matrix());
}

double PhiEvaluator::phi(std::size_t i, std::size_t j, const Matrix& p, const Vector& optimism) const
{
    return mean(i, optimism).norm() + covariance_cost(i, j, p);
}

double phi_metric(std::size_t i, std::size_t j, const Matrix& p, const LgdsSpec& spec,
                  const OptimismTerm& u)
{
    const PhiEvaluator eval(spec);
    return eval.phi(i, j, p, u(p, spec));
}

std::vector<PhiReport> phi_reports(const LgdsSpec& spec, const std::vector<OptimismTerm>& terms,
                                   bool keep_values)
{
    std::vector<PhiReport> reports(terms.size());
    const auto k = static_cast<std::size_t>(spec.k());
    if (k < 2) {
        for (auto& r : reports) r.interval.empty = true;
        return reports;
    }
    const PhiEvaluator eval(spec);

    for (auto& r : reports) {
        r.interval.min = std::numeric_limits<double>::infinity();
        r.interval.max = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t a = 0; a < k; ++a) {
        SpdMatrix pa;
        try {
            pa = solve_dare_single(spec.gamma, spec.action(a), spec.q, spec.sigma2());
        } catch (const DivergenceError& e) {
            throw DivergenceError("phi: steady covariance for action " + std::to_string(a) + " diverged",
                                  e.residual());
        }
        std::vector<std::vector<double>> mean_norms(terms.size(), std::vector<double>(k));
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const Vector u = terms[t](pa.matrix(), spec);
            for (std::size_t i = 0; i < k; ++i) mean_norms[t][i] = eval.mean(i, u).norm();
        }
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j) continue;
                const double cov = eval.covariance_cost(i, j, pa.matrix());
                for (std::size_t t = 0; t < terms.size(); ++t) {
                    const double v = mean_norms[t][i] + cov;
                    auto& r = reports[t];
                    r.interval.min = std::min(r.interval.min, v);
                    r.interval.max = std::max(r.interval.max, v);
                    if (keep_values) r.values.push_back({i, j, a, v});
                }
            }
        }
    }
    return reports;
}

PhiInterval phi_interval(const LgdsSpec& spec, const OptimismTerm& u)
{
    return phi_reports(spec, {u}).front().interval;
}

// ---------------------------------------------------------------------------

MonteCarloEstimate lower_bound_continuous_mc(const LgdsSpec& spec, std::size_t horizon,
                                             const SpdMatrix& p_floor, std::size_t samples,
                                             RandomStream& rng)
{
    if (samples < 1) throw ParameterError("lower_bound_continuous_mc: samples must be at least 1");
    if (spectral_radius(spec.gamma) >= 1.0) {
        throw ParameterError("lower_bound_continuous_mc: the state matrix is not stable");
    }
    const SpdMatrix z = solve_lyapunov(spec.gamma, spec.q);
    SpdMatrix reduced;
    try {
        reduced = project_psd(z.matrix() - p_floor.matrix(), kDifferencePsdTol);
    } catch (const NotPsdError&) {
        throw ParameterError("lower_bound_continuous_mc: Z - P_floor is not PSD (invalid floor)");
    }

    const Eigen::Index d = spec.d();
    double mean = 0.0;
    double m2 = 0.0;
    Vector nu(d);
    for (std::size_t s = 0; s < samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) nu(i) = rng.normal();
        const double x = std::sqrt(std::max(0.0, nu.dot(z.matrix() * nu))) -
                         std::sqrt(std::max(0.0, nu.dot(reduced.matrix() * nu)));
        const double delta = x - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (x - mean);
    }
    const double n = static_cast<double>(horizon);
    const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    return {n * mean, n * std::sqrt(var / static_cast<double>(samples)), samples};
}

DiscreteBound lower_bound_discrete(const LgdsSpec& spec, std::size_t horizon)
{
    DiscreteBound out;
    const auto k = static_cast<std::size_t>(spec.k());
    if (k < 2) return out;

    const PhiEvaluator eval(spec);
    const Matrix& z = eval.stationary().matrix();
    const Matrix& zt = eval.oracle_prediction_covariance().matrix();
    const double power = 2.0 * static_cast<double>(k) - 2.0;

    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const Vector diff = spec.action(j) - spec.action(i);
            const double numerator = 2.0 * diff.dot(z * diff);
            if (i == j || numerator <= 0.0) continue;

            const Matrix& ai = eval.difference_matrix(i);
            const Matrix& aj = eval.difference_matrix(j);
            const Matrix cond = symmetrize(aj * z * aj.transpose());
            const Eigen::LDLT<Matrix> cond_solver(cond);
            Eigen::SelfAdjointEigenSolver<Matrix> cond_es(cond, Eigen::EigenvaluesOnly);
            if (cond_es.eigenvalues().minCoeff() <= Tolerances::rank * cond_es.eigenvalues().cwiseAbs().maxCoeff()) {
                out.skipped.emplace_back(i, j);
                continue;
            }
            const Matrix cross = ai * zt * aj.transpose();
            const Matrix sigma_t = symmetrize(ai * zt * ai.transpose() - cross * cond_solver.solve(cross.transpose()));
            Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_t, Eigen::EigenvaluesOnly);
            const Vector& ev = es.eigenvalues();
            if (ev.minCoeff() <= Tolerances::rank * ev.cwiseAbs().maxCoeff()) {
                out.skipped.emplace_back(i, j);
                continue;
            }
            const Eigen::LLT<Matrix> sigma_llt(sigma_t);
            const Matrix sigma_inv = sigma_llt.solve(Matrix::Identity(sigma_t.rows(), sigma_t.cols()));
            const Matrix pi = cross * cond_solver.solve(aj);  // (k-1) x d
            const double trace_psi = sigma_inv.trace() + (pi.transpose() * sigma_inv * pi).trace();
            const double log_det = ev.array().log().sum();
            const double log_term = 0.5 * (std::log(numerator) - power * std::log(trace_psi) - log_det);
            sum += std::exp(log_term);
        }
    }
    out.value = static_cast<double>(horizon) * sum;
    return out;
}

}  // namespace lgb
