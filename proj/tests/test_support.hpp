#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance suite. Nothing here calls the filter or Riccati code under test.

#include <cmath>
#include <vector>

#include "lgbandit/environment.hpp"
#include "lgbandit/numerics.hpp"
#include "lgbandit/random.hpp"

namespace lgbtest {

using lgb::Matrix;
using lgb::Vector;

inline lgb::LgdsSpec make_spec(Matrix gamma, Matrix actions, Matrix q, double sigma, Matrix sigma0)
{
    lgb::LgdsSpec s;
    s.gamma = std::move(gamma);
    s.actions = std::move(actions);
    s.q = lgb::SpdMatrix::checked(std::move(q));
    s.sigma = sigma;
    s.sigma0 = lgb::SpdMatrix::checked(std::move(sigma0));
    return s;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, lgb::RandomStream& rng)
{
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
    }
    return m;
}

inline Matrix random_actions(Eigen::Index k, Eigen::Index d, lgb::RandomStream& rng)
{
    Matrix a = random_matrix(k, d, rng);
    for (Eigen::Index i = 0; i < k; ++i) a.row(i).normalize();
    return a;
}

/// Plain eigenvalue scaling, no use of the library's spectral_radius.
inline Matrix random_gamma(Eigen::Index d, double rho, lgb::RandomStream& rng)
{
    Matrix t = random_matrix(d, d, rng);
    const double r = Eigen::EigenSolver<Matrix>(t).eigenvalues().cwiseAbs().maxCoeff();
    return (rho / r) * t;
}

/// Stationary covariance by plain fixed-point summation of G^t Q G'^t.
inline Matrix lyapunov_by_summation(const Matrix& g, const Matrix& q, int terms = 20000)
{
    Matrix z = Matrix::Zero(g.rows(), g.cols());
    Matrix term = q;
    for (int i = 0; i < terms; ++i) {
        z += term;
        term = g * term * g.transpose();
        if (term.norm() < 1e-18 * z.norm()) break;
    }
    return 0.5 * (z + z.transpose());
}

/// Stable random spec: rho in [rho_lo, rho_hi], sigma^2 in [s2_lo, s2_hi],
/// Sigma0 the stationary covariance.
inline lgb::LgdsSpec random_stable_spec(Eigen::Index d, Eigen::Index k, lgb::RandomStream& rng,
                                        double rho_lo = 0.3, double rho_hi = 0.95, double s2_lo = 0.1,
                                        double s2_hi = 2.0)
{
    const double rho = rho_lo + (rho_hi - rho_lo) * rng.uniform();
    const Matrix g = random_gamma(d, rho, rng);
    const Matrix r = random_matrix(d, d, rng);
    const Matrix q = r * r.transpose();
    const double s2 = s2_lo + (s2_hi - s2_lo) * rng.uniform();
    return make_spec(g, random_actions(k, d, rng), q, std::sqrt(s2), lyapunov_by_summation(g, q));
}

/// E[z_t | X_0..X_{t-1}] and Cov[z_t | X_0..X_{t-1}] by conditioning the
/// joint Gaussian of (z_t, X_0..X_{t-1}) directly.
struct Conditional {
    Vector mean;
    Matrix cov;
};

inline Conditional joint_gaussian_conditioning(const lgb::LgdsSpec& spec, const std::vector<Vector>& actions,
                                               const std::vector<double>& rewards, std::size_t t)
{
    const Eigen::Index d = spec.d();
    const Matrix& g = spec.gamma;
    // Marginal covariances V_s and cross-covariances Cov(z_t, z_s) = G^(t-s) V_s.
    std::vector<Matrix> v(t + 1);
    v[0] = spec.sigma0.matrix();
    for (std::size_t s = 1; s <= t; ++s) v[s] = g * v[s - 1] * g.transpose() + spec.q.matrix();
    auto cross = [&](std::size_t later, std::size_t earlier) {
        Matrix m = v[earlier];
        for (std::size_t i = earlier; i < later; ++i) m = g * m;
        return m;  // Cov(z_later, z_earlier)
    };
    if (t == 0) return {Vector::Zero(d), v[0]};

    const auto n = static_cast<Eigen::Index>(t);
    Matrix cxx(n, n);
    Matrix czx(d, n);
    Vector x(n);
    for (std::size_t a = 0; a < t; ++a) {
        x(static_cast<Eigen::Index>(a)) = rewards[a];
        czx.col(static_cast<Eigen::Index>(a)) = cross(t, a) * actions[a];
        for (std::size_t b = 0; b <= a; ++b) {
            double c = actions[a].dot(cross(a, b) * actions[b]);
            if (a == b) c += spec.sigma2();
            cxx(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
            cxx(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
        }
    }
    const Eigen::LDLT<Matrix> solver(cxx);
    Conditional out;
    out.mean = czx * solver.solve(x);
    out.cov = v[t] - czx * solver.solve(czx.transpose());
    return out;
}

}  // namespace lgbtest
