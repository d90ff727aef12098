#include <doctest.h>

#include <cmath>

#include "lgbandit/numerics.hpp"
#include "test_support.hpp"

using namespace lgb;

TEST_CASE("spectral radius of a 2x2 matches the characteristic polynomial")
{
    Matrix m(2, 2);
    m << 0.5, 0.2, 0.3, 0.4;
    // Real roots of l^2 - tr l + det.
    const double tr = m.trace();
    const double det = m.determinant();
    const double root = 0.5 * tr + std::sqrt(0.25 * tr * tr - det);
    CHECK(spectral_radius(m) == doctest::Approx(root).epsilon(1e-12));

    Matrix rot(2, 2);
    rot << 0.0, -2.0, 2.0, 0.0;  // eigenvalues +-2i
    CHECK(spectral_radius(rot) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("psd_sqrt squares back and matches the eigen-decomposition oracle")
{
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const Matrix r = psd_sqrt(SpdMatrix::checked(m)).matrix();
    // Eigenvalues 3 and 1 along (1,1)/sqrt2 and (1,-1)/sqrt2.
    const double a = 0.5 * (std::sqrt(3.0) + 1.0);
    const double b = 0.5 * (std::sqrt(3.0) - 1.0);
    CHECK(r(0, 0) == doctest::Approx(a).epsilon(1e-12));
    CHECK(r(0, 1) == doctest::Approx(b).epsilon(1e-12));
    CHECK((r * r - m).norm() < 1e-12);
}

TEST_CASE("SpdMatrix::checked rejects asymmetric and indefinite input")
{
    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(SpdMatrix::checked(asym), NotPsdError);
    Matrix indef(2, 2);
    indef << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(SpdMatrix::checked(indef), NotPsdError);
    Matrix rect(2, 3);
    rect.setZero();
    CHECK_THROWS(SpdMatrix::checked(rect));
}

TEST_CASE("project_psd clips roundoff but not real negativity")
{
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1e-14;
    const Matrix p = project_psd(m, 1e-10).matrix();
    CHECK(p(1, 1) >= 0.0);
    Matrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -0.1;
    CHECK_THROWS_AS(project_psd(bad, 1e-10), NotPsdError);
}

TEST_CASE("psd_factor handles singular and zero covariances")
{
    CHECK(psd_factor(Matrix::Zero(3, 3)).norm() == 0.0);
    Matrix rank1(2, 2);
    rank1 << 1.0, 1.0, 1.0, 1.0;
    const Matrix l = psd_factor(rank1);
    CHECK((l * l.transpose() - rank1).norm() < 1e-6);
}

TEST_CASE("sample_gaussian reproduces the covariance empirically")
{
    Matrix c(2, 2);
    c << 2.0, 0.6, 0.6, 1.0;
    RandomStream rng(7);
    const int n = 200000;
    Matrix acc = Matrix::Zero(2, 2);
    Vector mean = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector x = sample_gaussian(Vector::Zero(2), SpdMatrix::checked(c), rng);
        acc += x * x.transpose();
        mean += x;
    }
    acc /= n;
    mean /= n;
    // Entry standard errors are about sqrt(2 * 4 / n) ~ 0.006.
    CHECK((acc - c).cwiseAbs().maxCoeff() < 0.03);
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("riccati_map matches the textbook formula")
{
    RandomStream rng(3);
    const Matrix g = lgbtest::random_matrix(3, 3, rng);
    const Matrix r = lgbtest::random_matrix(3, 3, rng);
    const Matrix p0 = r * r.transpose();
    const Matrix q = Matrix::Identity(3, 3) * 0.5;
    Vector a = lgbtest::random_matrix(3, 1, rng);
    a.normalize();
    const double s2 = 0.7;
    const Matrix expected = g * p0 * g.transpose() + q -
                            (g * p0 * a) * (a.transpose() * p0 * g.transpose()) / (a.dot(p0 * a) + s2);
    const Matrix got = riccati_map(SpdMatrix::checked(p0), a, g, SpdMatrix::checked(q), s2).matrix();
    CHECK((got - expected).norm() < 1e-12 * expected.norm());
    CHECK(got.isApprox(got.transpose(), 0.0));
    CHECK_THROWS_AS(riccati_map(SpdMatrix::checked(p0), a, g, SpdMatrix::checked(q), 0.0), ParameterError);
}

TEST_CASE("scalar DARE equals the positive root of its quadratic")
{
    // gamma = 0.9, q = 1, s2 = 1: p = g^2 p + q - g^2 p^2 / (p + s2)
    // reduces to p^2 - g^2 p ... solved by hand below.
    const double g = 0.9, q = 1.0, s2 = 1.0;
    // (p + s2)(p - q) = g^2 p s2  ->  p^2 + (s2 - q - g^2 s2) p - q s2 = 0
    const double b = s2 - q - g * g * s2;
    const double root = 0.5 * (-b + std::sqrt(b * b + 4.0 * q * s2));
    CHECK(root == doctest::Approx(1.4839).epsilon(1e-4));
    const SpdMatrix p = solve_dare_single(Matrix::Constant(1, 1, g), Vector::Ones(1),
                                          SpdMatrix::checked(Matrix::Constant(1, 1, q)), s2);
    CHECK(std::abs(p.matrix()(0, 0) - root) < 1e-8);
}

TEST_CASE("multi-output DARE reduces to the single-action one when k = 1")
{
    RandomStream rng(11);
    const auto spec = lgbtest::random_stable_spec(3, 1, rng);
    const SpdMatrix p1 = solve_dare_single(spec.gamma, spec.action(0), spec.q, spec.sigma2());
    const SteadyStateFilter pk = solve_dare_multi(spec.gamma, spec.actions, spec.q, spec.sigma2());
    CHECK((p1.matrix() - pk.covariance.matrix()).norm() < 1e-8 * p1.matrix().norm());
    const Vector a = spec.action(0);
    const Vector gain = p1.matrix() * a / (a.dot(p1.matrix() * a) + spec.sigma2());
    CHECK((pk.gain.col(0) - gain).norm() < 1e-8 * gain.norm());
}

TEST_CASE("Lyapunov solution agrees with the summation oracle and rejects unstable input")
{
    RandomStream rng(5);
    const Matrix g = lgbtest::random_gamma(4, 0.9, rng);
    const Matrix r = lgbtest::random_matrix(4, 4, rng);
    const Matrix q = r * r.transpose();
    const Matrix z = solve_lyapunov(g, SpdMatrix::checked(q)).matrix();
    CHECK((z - lgbtest::lyapunov_by_summation(g, q)).norm() < 1e-9 * z.norm());
    CHECK_THROWS_AS(solve_lyapunov(2.0 * g, SpdMatrix::checked(q)), ParameterError);
}

TEST_CASE("numerical_rank")
{
    Matrix m(3, 3);
    m << 1, 2, 3, 2, 4, 6, 0, 1, 0;
    CHECK(numerical_rank(m) == 2);
    CHECK(numerical_rank(Matrix::Identity(4, 4)) == 4);
}
