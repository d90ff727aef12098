#include "lgbandit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lgb {

namespace {

void require_square(const Matrix& m, const char* what)
{
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
}

double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

Matrix symmetrize(const Matrix& m)
{
    return 0.5 * (m + m.transpose());
}

bool is_symmetric(const Matrix& m, double tol)
{
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(max_abs(m), 1e-300);
    return max_abs(m - m.transpose()) <= tol * scale;
}

bool is_psd(const Matrix& m, double tol)
{
    if (!m.allFinite() || !is_symmetric(m)) return false;
    if (max_abs(m) == 0.0) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -tol * largest;
}

SpdMatrix SpdMatrix::checked(Matrix m)
{
    require_square(m, "SpdMatrix");
    if (!is_psd(m)) {
        throw NotPsdError("SpdMatrix: matrix is not symmetric positive semidefinite");
    }
    return SpdMatrix(symmetrize(m));
}

SpdMatrix project_psd(const Matrix& m, double tol)
{
    require_square(m, "project_psd");
    const Matrix s = symmetrize(m);
    if (max_abs(s) == 0.0) return SpdMatrix::trusted(s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    Vector ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -tol * largest) {
        throw NotPsdError("project_psd: matrix is indefinite beyond tolerance");
    }
    if (ev.minCoeff() >= 0.0) return SpdMatrix::trusted(s);
    ev = ev.cwiseMax(0.0);
    const Matrix& v = es.eigenvectors();
    return SpdMatrix::trusted(symmetrize(v * ev.asDiagonal() * v.transpose()));
}

double spectral_radius(const Matrix& m)
{
    require_square(m, "spectral_radius");
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SpdMatrix psd_sqrt(const SpdMatrix& m)
{
    const Matrix& a = m.matrix();
    if (a.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    Vector ev = es.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    if (ev.minCoeff() < -Tolerances::psd * largest) {
        throw NotPsdError("psd_sqrt: matrix is indefinite");
    }
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    const Matrix& v = es.eigenvectors();
    return SpdMatrix::trusted(symmetrize(v * ev.asDiagonal() * v.transpose()));
}

Matrix psd_factor(const Matrix& cov)
{
    require_square(cov, "psd_factor");
    const Eigen::Index n = cov.rows();
    const double trace = cov.trace();
    if (max_abs(cov) == 0.0) return Matrix::Zero(n, n);

    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    double jitter = Tolerances::jitter_start * std::max(trace, 1e-300);
    for (int i = 0; i <= Tolerances::jitter_doublings; ++i, jitter *= 2.0) {
        llt.compute(cov + jitter * Matrix::Identity(n, n));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    // Cholesky failed on a PSD input: fall back to the symmetric root, which is
    // also a valid factor.
    return psd_sqrt(project_psd(cov, 1e-8)).matrix();
}

Vector sample_gaussian_factored(const Vector& mean, const Matrix& factor, RandomStream& rng)
{
    if (factor.rows() != mean.size() || factor.cols() != mean.size()) {
        throw DimensionError("sample_gaussian: mean and covariance dimensions disagree");
    }
    Vector w(mean.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.normal();
    return mean + factor * w;
}

Vector sample_gaussian(const Vector& mean, const SpdMatrix& cov, RandomStream& rng)
{
    if (cov.dim() != mean.size()) {
        throw DimensionError("sample_gaussian: mean and covariance dimensions disagree");
    }
    return sample_gaussian_factored(mean, psd_factor(cov.matrix()), rng);
}

SpdMatrix riccati_map(const SpdMatrix& p, const Vector& a, const Matrix& gamma,
                      const SpdMatrix& q, double sigma2)
{
    if (!(sigma2 > 0.0)) throw ParameterError("riccati_map: sigma^2 must be positive");
    const Matrix& pm = p.matrix();
    const Vector pa = pm * a;
    const double innovation = a.dot(pa) + sigma2;
    const Vector gpa = gamma * pa;
    Matrix next = gamma * pm * gamma.transpose() + q.matrix() - (gpa * gpa.transpose()) / innovation;
    return SpdMatrix::trusted(symmetrize(next));
}

SpdMatrix solve_dare_single(const Matrix& gamma, const Vector& a, const SpdMatrix& q,
                            double sigma2)
{
    SpdMatrix p = q;
    double residual = 0.0;
    for (std::size_t it = 0; it < Tolerances::dare_max_iterations; ++it) {
        SpdMatrix next = riccati_map(p, a, gamma, q, sigma2);
        residual = (next.matrix() - p.matrix()).norm();
        if (!std::isfinite(residual)) break;
        if (residual <= Tolerances::dare_residual * std::max(1.0, p.matrix().norm())) return p;
        p = std::move(next);
    }
    throw DivergenceError("solve_dare_single: Riccati iteration did not converge", residual);
}

namespace {

Matrix multi_gain(const Matrix& p, const Matrix& c, double sigma2)
{
    const Matrix s = c * p * c.transpose() + sigma2 * Matrix::Identity(c.rows(), c.rows());
    // K = P C' S^-1, computed as (S^-1 C P)' since S and P are symmetric
    return Eigen::LLT<Matrix>(s).solve(c * p).transpose();
}

Matrix multi_riccati(const Matrix& p, const Matrix& gamma, const Matrix& c, const Matrix& q,
                     double sigma2)
{
    const Matrix k = multi_gain(p, c, sigma2);
    const Matrix gp = gamma * p;
    return symmetrize(gp * gamma.transpose() + q - gamma * k * c * p * gamma.transpose());
}

}  // namespace

SteadyStateFilter solve_dare_multi(const Matrix& gamma, const Matrix& c, const SpdMatrix& q,
                                   double sigma2)
{
    if (!(sigma2 > 0.0)) throw ParameterError("solve_dare_multi: sigma^2 must be positive");
    if (c.cols() != gamma.rows()) throw DimensionError("solve_dare_multi: C has wrong column count");
    Matrix p = q.matrix();
    double residual = 0.0;
    for (std::size_t it = 0; it < Tolerances::dare_max_iterations; ++it) {
        Matrix next = multi_riccati(p, gamma, c, q.matrix(), sigma2);
        residual = (next - p).norm();
        if (!std::isfinite(residual)) break;
        if (residual <= Tolerances::dare_residual * std::max(1.0, p.norm())) {
            return {SpdMatrix::trusted(p), multi_gain(p, c, sigma2)};
        }
        p = std::move(next);
    }
    throw DivergenceError("solve_dare_multi: Riccati iteration did not converge", residual);
}

SpdMatrix solve_lyapunov(const Matrix& gamma, const SpdMatrix& q)
{
    if (spectral_radius(gamma) >= 1.0) {
        throw ParameterError("solve_lyapunov: state matrix is not stable");
    }
    // Smith doubling: Z_{j+1} = Z_j + A_j Z_j A_j', A_{j+1} = A_j^2.
    Matrix z = q.matrix();
    Matrix a = gamma;
    for (int it = 0; it < 200; ++it) {
        const Matrix inc = a * z * a.transpose();
        z += inc;
        if (inc.norm() <= 1e-17 * std::max(z.norm(), 1e-300)) break;
        a = a * a;
        if (a.norm() == 0.0) break;
    }
    return SpdMatrix::trusted(symmetrize(z));
}

Eigen::Index numerical_rank(const Matrix& m, double rel_tol)
{
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) ++r;
    }
    return r;
}

}  // namespace lgb
