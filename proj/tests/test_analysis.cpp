#include <doctest.h>

#include <cmath>

#include "lgbandit/analysis.hpp"
#include "lgbandit/policies.hpp"
#include "test_support.hpp"

using namespace lgb;

namespace {

// Oracle-filter steady covariance by plain iteration of the vector Riccati
// map, written out independently of the library.
Matrix oracle_covariance_by_iteration(const LgdsSpec& s)
{
    const Eigen::Index k = s.k();
    Matrix p = s.q.matrix();
    for (int it = 0; it < 100000; ++it) {
        const Matrix inn = s.actions * p * s.actions.transpose() + s.sigma2() * Matrix::Identity(k, k);
        const Matrix next = s.gamma * p * s.gamma.transpose() + s.q.matrix() -
                            s.gamma * p * s.actions.transpose() * inn.inverse() * s.actions * p * s.gamma.transpose();
        const double diff = (next - p).norm();
        p = 0.5 * (next + next.transpose());
        if (diff < 1e-14 * p.norm()) break;
    }
    return p;
}

// tr of the square root of a 2x2 PSD matrix: sqrt(tr + 2 sqrt(det)).
double trace_sqrt_2x2(double tr, double det)
{
    return std::sqrt(tr + 2.0 * std::sqrt(std::max(0.0, det)));
}

LgdsSpec two_action_spec()
{
    Matrix g(2, 2);
    g << 0.6, 0.2, -0.1, 0.7;
    Matrix a(2, 2);
    a << 1.0, 0.0, std::sqrt(0.5), std::sqrt(0.5);
    Matrix q(2, 2);
    q << 1.0, 0.3, 0.3, 0.5;
    const Matrix z = lgbtest::lyapunov_by_summation(g, q);
    return lgbtest::make_spec(g, a, q, 0.8, z);
}

}  // namespace

TEST_CASE("instantaneous regret")
{
    const LgdsSpec s = lgbtest::make_spec(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0,
                                          Matrix::Identity(2, 2));
    Vector z(2);
    z << 1.0, 0.0;
    CHECK(instantaneous_regret(z, 1, s) == 1.0);
    CHECK(instantaneous_regret(z, 0, s) == 0.0);
    const LgdsSpec one = lgbtest::make_spec(Matrix::Identity(2, 2), Matrix(Matrix::Identity(1, 2)),
                                            Matrix::Identity(2, 2), 1.0, Matrix::Identity(2, 2));
    CHECK(instantaneous_regret(z, 0, one) == 0.0);
}

TEST_CASE("normalized regret")
{
    CHECK(*normalized_regret(2.0, 1.0) == 1.0);
    CHECK(*normalized_regret(1.0, 1.0) == 0.0);
    CHECK(*normalized_regret(1.0, -2.0) == 1.5);
    CHECK_FALSE(normalized_regret(1.0, 1e-13).has_value());
}

TEST_CASE("optimism bound gap is nonnegative for arbitrary predictions")
{
    RandomStream rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const LgdsSpec s = lgbtest::random_stable_spec(3, 4, rng);
        const Vector z = lgbtest::random_matrix(3, 1, rng);
        const Vector zhat = lgbtest::random_matrix(3, 1, rng);
        Vector u(4);
        for (int i = 0; i < 4; ++i) u(i) = std::abs(rng.normal());
        const std::size_t chosen = argmax_lowest(s.actions * zhat + u);
        CHECK(optimism_bound_gap(z, zhat, chosen, u, s) >= -1e-12);
    }
}

TEST_CASE("observability Gramian examples")
{
    const std::vector<Vector> e{Vector::Unit(2, 0), Vector::Unit(2, 1)};
    const SpdMatrix g1 = observability_gramian(Matrix::Identity(2, 2), e, 0, 1);
    CHECK(g1.matrix().isApprox(Matrix::Identity(2, 2)));
    CHECK(is_observable(g1));

    const std::vector<Vector> same{Vector::Unit(2, 0), Vector::Unit(2, 0), Vector::Unit(2, 0)};
    const SpdMatrix g2 = observability_gramian(Matrix::Identity(2, 2), same, 0, 2);
    CHECK(numerical_rank(g2.matrix()) == 1);
    CHECK_FALSE(is_observable(g2));

    // Shift matrix: tau = 0 contributes e1 e1', tau = 1 contributes
    // (G' e1)(G' e1)' = e2 e2'.
    Matrix shift(2, 2);
    shift << 0.0, 1.0, 0.0, 0.0;
    const SpdMatrix g3 = observability_gramian(shift, same, 0, 1);
    CHECK(g3.matrix().isApprox(Matrix::Identity(2, 2)));
    // Windows starting later use the matching powers of G: G^2 = 0 here.
    CHECK(observability_gramian(shift, same, 2, 2).matrix().isZero());

    CHECK_THROWS_AS(observability_gramian(shift, same, 2, 1), DimensionError);
    CHECK_THROWS_AS(observability_gramian(shift, same, 0, 3), DimensionError);
}

TEST_CASE("trailing period detection")
{
    const std::vector<std::size_t> seq{0, 0, 0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(*trailing_period(seq, 6, 4) == 2);
    const std::vector<std::size_t> flat{2, 2, 2, 2};
    CHECK(*trailing_period(flat, 4, 3) == 1);
    const std::vector<std::size_t> noise{0, 1, 1, 0, 1, 0, 0, 1};
    CHECK_FALSE(trailing_period(noise, 8, 3).has_value());
}

TEST_CASE("Gaussian transport cost examples")
{
    const Vector zero = Vector::Zero(1);
    CHECK(wasserstein2_gaussian_cost(zero, SpdMatrix::checked(Matrix::Constant(1, 1, 1.0)), zero,
                                     SpdMatrix::checked(Matrix::Constant(1, 1, 4.0))) == doctest::Approx(1.0));
    RandomStream rng(4);
    const Matrix r = lgbtest::random_matrix(3, 3, rng);
    const SpdMatrix s = SpdMatrix::checked(r * r.transpose());
    const Vector m1 = lgbtest::random_matrix(3, 1, rng);
    const Vector m2 = lgbtest::random_matrix(3, 1, rng);
    CHECK(std::abs(wasserstein2_gaussian_cost(m1, s, m1, s)) < 1e-8);
    CHECK(wasserstein2_gaussian_cost(m1, s, m2, s) == doctest::Approx((m1 - m2).norm()).epsilon(1e-7));
    CHECK_THROWS_AS(wasserstein2_gaussian_cost(m1, s, zero, s), DimensionError);
}

TEST_CASE("phi matches a closed-form 2x2 evaluation")
{
    const LgdsSpec s = two_action_spec();
    const Matrix z = lgbtest::lyapunov_by_summation(s.gamma, s.q.matrix());
    const Matrix zt = z - oracle_covariance_by_iteration(s);
    const Vector v = s.action(0) - s.action(1);
    const Matrix p = solve_dare_single(s.gamma, s.action(1), s.q, s.sigma2()).matrix();
    const Vector u = idea_optimism(p, s);

    for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t j = 1 - i;
        const Vector vi = i == 0 ? Vector(v) : Vector(-v);  // rows of A_i; A_j = -A_i
        const double zz = vi.dot(z * vi);
        const double tt = vi.dot(zt * vi);
        const double ll = vi.dot((z - p) * vi);
        // Sigma = [[tt, -tt], [-tt, zz]], Sigma_hat = [[ll, -ll], [-ll, zz]].
        const double tr_prod = tt * ll + 2.0 * tt * ll + zz * zz;  // tr(S Sh) for the block forms
        const double det = (tt * zz - tt * tt) * (ll * zz - ll * ll);
        const double expected = std::abs(u(static_cast<Eigen::Index>(i)) - u(static_cast<Eigen::Index>(j))) +
                                (ll + zz) + (tt + zz) - 2.0 * trace_sqrt_2x2(tr_prod, det);
        CHECK(phi_metric(i, j, p, s, idea_term()) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("phi vanishes when the learner matches the oracle")
{
    RandomStream rng(5);
    const LgdsSpec s = lgbtest::random_stable_spec(3, 3, rng);
    const PhiEvaluator eval(s);
    const Matrix p_all = solve_dare_multi(s.gamma, s.actions, s.q, s.sigma2()).covariance.matrix();
    // Learner covariance built from Z - P_A equals the oracle covariance.
    CHECK(std::abs(eval.phi(0, 1, p_all, Vector::Zero(3))) < 1e-6);
    // Zero optimism leaves only the covariance mismatch.
    const Matrix p = solve_dare_single(s.gamma, s.action(0), s.q, s.sigma2()).matrix();
    CHECK(phi_metric(0, 2, p, s, zero_term()) == doctest::Approx(eval.covariance_cost(0, 2, p)));
    CHECK(eval.covariance_cost(0, 2, p) >= -1e-9);
    CHECK_THROWS_AS(eval.oracle_covariance(1, 1), DimensionError);
}

TEST_CASE("phi interval: empty for one action, symmetric for symmetric specs")
{
    const LgdsSpec one = lgbtest::make_spec(Matrix::Identity(2, 2) * 0.5, Matrix(Matrix::Identity(1, 2)),
                                            Matrix::Identity(2, 2), 1.0, Matrix::Identity(2, 2) / 0.75);
    CHECK(phi_interval(one, idea_term()).empty);

    const LgdsSpec sym = lgbtest::make_spec(Matrix::Identity(2, 2) * 0.8, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                            1.0, Matrix::Identity(2, 2) / 0.36);
    const auto reports = phi_reports(sym, {idea_term(), kalman_ucb_term(0.3)}, true);
    for (const auto& rep : reports) {
        REQUIRE(rep.values.size() == 4);
        // Swapping the two actions maps (i, j, a) to (j, i, 1 - a).
        for (const auto& v : rep.values) {
            for (const auto& w : rep.values) {
                if (w.i == v.j && w.j == v.i && w.conditioning_action == 1 - v.conditioning_action) {
                    CHECK(w.value == doctest::Approx(v.value).epsilon(1e-9));
                }
            }
            CHECK(v.value >= rep.interval.min);
            CHECK(v.value <= rep.interval.max);
        }
    }
    Matrix unstable = Matrix::Identity(2, 2) * 1.1;
    LgdsSpec bad = sym;
    bad.gamma = unstable;
    CHECK_THROWS_AS(phi_interval(bad, idea_term()), ParameterError);
}

TEST_CASE("discrete lower bound matches a closed-form 2x2 evaluation")
{
    const LgdsSpec s = two_action_spec();
    const Matrix z = lgbtest::lyapunov_by_summation(s.gamma, s.q.matrix());
    const Matrix zt = z - oracle_covariance_by_iteration(s);
    const Vector v = s.action(0) - s.action(1);
    const double zz = v.dot(z * v);
    const double tt = v.dot(zt * v);
    // k = 2: scalar Sigma~ = tt - tt^2 / zz, Pi = (tt / zz) v', and
    // tr(Psi) = (1 + (tt / zz)^2 |v|^2) / Sigma~. Both ordered pairs agree.
    const double sig = tt - tt * tt / zz;
    const double tr_psi = (1.0 + (tt / zz) * (tt / zz) * v.squaredNorm()) / sig;
    const double term = std::sqrt(2.0 * zz / (tr_psi * tr_psi * sig));
    const std::size_t n = 1000;
    const DiscreteBound b = lower_bound_discrete(s, n);
    CHECK(b.skipped.empty());
    CHECK(b.value == doctest::Approx(static_cast<double>(n) * 2.0 * term).epsilon(1e-8));
}

TEST_CASE("discrete lower bound edge cases")
{
    const LgdsSpec one = lgbtest::make_spec(Matrix::Identity(2, 2) * 0.5, Matrix(Matrix::Identity(1, 2)),
                                            Matrix::Identity(2, 2), 1.0, Matrix::Identity(2, 2) / 0.75);
    CHECK(lower_bound_discrete(one, 100).value == 0.0);

    // Duplicated actions: numerator zero, pair contributes nothing.
    Matrix dup(2, 2);
    dup << 1.0, 0.0, 1.0, 0.0;
    const LgdsSpec d = lgbtest::make_spec(Matrix::Identity(2, 2) * 0.5, dup, Matrix::Identity(2, 2), 1.0,
                                          Matrix::Identity(2, 2) / 0.75);
    CHECK(lower_bound_discrete(d, 100).value == 0.0);
}

TEST_CASE("continuous lower bound Monte Carlo")
{
    // Scalar: gamma = 0.5, q = 0.75 -> Z = 1.
    const LgdsSpec s = lgbtest::make_spec(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Constant(1, 1, 0.75),
                                          1.0, Matrix::Ones(1, 1));
    RandomStream rng(6);
    const MonteCarloEstimate full = lower_bound_continuous_mc(s, 1, SpdMatrix::checked(Matrix::Ones(1, 1)), 40000, rng);
    // E|N(0,1)| = sqrt(2 / pi).
    const double half_normal = std::sqrt(2.0 / std::acos(-1.0));
    CHECK(std::abs(full.value - half_normal) < 4.0 * full.standard_error);
    CHECK(full.samples == 40000);

    const MonteCarloEstimate none = lower_bound_continuous_mc(s, 10, SpdMatrix::zero(1), 1000, rng);
    CHECK(std::abs(none.value) < 1e-12);

    // Standard error scales as 1 / sqrt(samples).
    RandomStream r1(7), r2(8);
    const double se1 = lower_bound_continuous_mc(s, 1, SpdMatrix::checked(Matrix::Ones(1, 1)), 10000, r1).standard_error;
    const double se4 = lower_bound_continuous_mc(s, 1, SpdMatrix::checked(Matrix::Ones(1, 1)), 40000, r2).standard_error;
    CHECK(se1 / se4 == doctest::Approx(2.0).epsilon(0.05));

    CHECK_THROWS_AS(lower_bound_continuous_mc(s, 1, SpdMatrix::checked(Matrix::Constant(1, 1, 2.0)), 10, rng),
                    ParameterError);
    CHECK_THROWS_AS(lower_bound_continuous_mc(s, 1, SpdMatrix::zero(1), 0, rng), ParameterError);
}

TEST_CASE("exploration schedule picks the largest prediction variance")
{
    const LgdsSpec s = two_action_spec();
    const auto seq = exploration_schedule(s, s.sigma0, 30);
    SpdMatrix p = s.sigma0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const double v0 = s.action(0).dot(p.matrix() * s.action(0));
        const double v1 = s.action(1).dot(p.matrix() * s.action(1));
        CHECK(seq[t] == (v1 > v0 ? 1u : 0u));
        p = riccati_map(p, s.action(seq[t]), s.gamma, s.q, s.sigma2());
    }
}
