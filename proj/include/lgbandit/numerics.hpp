#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "lgbandit/random.hpp"

namespace lgb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class NotPsdError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double last_residual)
        : Error(what), residual_(last_residual)
    {
    }
    double residual() const { return residual_; }

private:
    double residual_;
};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

struct Tolerances {
    static constexpr double symmetry = 1e-10;           // relative to max |entry|
    static constexpr double psd = 1e-10;                // lambda_min >= -psd * lambda_max
    static constexpr double relative = 1e-8;
    static constexpr double dare_residual = 1e-10;
    static constexpr std::size_t dare_max_iterations = 1'000'000;
    static constexpr double jitter_start = 1e-12;       // times trace
    static constexpr int jitter_doublings = 20;
    static constexpr double rank = 1e-8;                // singular values relative to largest
    static constexpr double unit_norm = 1e-10;
};

// ---------------------------------------------------------------------------
// SpdMatrix: symmetric positive semidefinite
// ---------------------------------------------------------------------------

/// A square matrix known to be symmetric PSD within Tolerances::symmetry and
/// Tolerances::psd. Construction through `checked` verifies the invariant;
/// `trusted` is for outputs that are PSD by construction (Riccati steps).
class SpdMatrix {
public:
    SpdMatrix() = default;

    static SpdMatrix checked(Matrix m);
    static SpdMatrix trusted(Matrix m) { return SpdMatrix(std::move(m)); }
    static SpdMatrix zero(Eigen::Index n) { return SpdMatrix(Matrix::Zero(n, n)); }
    static SpdMatrix identity(Eigen::Index n) { return SpdMatrix(Matrix::Identity(n, n)); }

    const Matrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = Tolerances::symmetry);

/// True when m is symmetric and its smallest eigenvalue is at least
/// -tol times its largest (absolute) eigenvalue.
bool is_psd(const Matrix& m, double tol = Tolerances::psd);

/// Symmetrizes and clips eigenvalues in [-tol*lambda_max, 0) to zero. Throws
/// NotPsdError when an eigenvalue is more negative than that.
SpdMatrix project_psd(const Matrix& m, double tol);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double spectral_radius(const Matrix& m);

SpdMatrix psd_sqrt(const SpdMatrix& m);

/// Lower-triangular L with L*L^T = cov (+ jitter). Zero covariance yields a
/// zero factor.
Matrix psd_factor(const Matrix& cov);

Vector sample_gaussian(const Vector& mean, const SpdMatrix& cov, RandomStream& rng);

/// Same as sample_gaussian with a precomputed factor from psd_factor.
Vector sample_gaussian_factored(const Vector& mean, const Matrix& factor, RandomStream& rng);

/// One step of the scalar-observation Riccati recursion
///   g(P, a) = G P G' + Q - G P a (a' P a + s2)^-1 a' P G'.
SpdMatrix riccati_map(const SpdMatrix& p, const Vector& a, const Matrix& gamma,
                      const SpdMatrix& q, double sigma2);

/// Fixed point of riccati_map, iterated from Q.
SpdMatrix solve_dare_single(const Matrix& gamma, const Vector& a, const SpdMatrix& q,
                            double sigma2);

struct SteadyStateFilter {
    SpdMatrix covariance;  // steady one-step prediction error covariance
    Matrix gain;           // P C' (C P C' + s2 I)^-1, d x k
};

/// Fixed point of the vector-observation Riccati recursion with observation
/// matrix C (k x d) and measurement covariance s2 * I_k.
SteadyStateFilter solve_dare_multi(const Matrix& gamma, const Matrix& c, const SpdMatrix& q,
                                   double sigma2);

/// Stationary covariance Z = G Z G' + Q. Requires spectral_radius(G) < 1.
SpdMatrix solve_lyapunov(const Matrix& gamma, const SpdMatrix& q);

/// Number of singular values above Tolerances::rank times the largest.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol = Tolerances::rank);

}  // namespace lgb
