#include <doctest.h>

#include <cmath>
#include <limits>

#include "lgbandit/policies.hpp"
#include "test_support.hpp"

using namespace lgb;

namespace {

LgdsSpec identity_spec(Eigen::Index d, Matrix actions)
{
    return lgbtest::make_spec(Matrix::Identity(d, d), std::move(actions), Matrix::Identity(d, d), 1.0,
                              Matrix::Identity(d, d));
}

}  // namespace

TEST_CASE("argmax breaks ties low and ignores NaN")
{
    Vector s(4);
    s << 1.0, 3.0, 3.0, 2.0;
    CHECK(argmax_lowest(s) == 1);
    s << std::numeric_limits<double>::quiet_NaN(), 0.0, -1.0, 0.0;
    CHECK(argmax_lowest(s) == 1);
}

TEST_CASE("IDEA optimism: identity model gives sqrt(1/2) for every unit action")
{
    RandomStream rng(4);
    const LgdsSpec s = identity_spec(3, lgbtest::random_actions(5, 3, rng));
    const Vector u = idea_optimism(Matrix::Identity(3, 3), s);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(u(i) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    // Exactly tied scores (basis actions) go to the lowest index.
    const LgdsSpec basis = identity_spec(3, Matrix::Identity(3, 3));
    const PolicyDecision dec = idea_select(KalmanState{Vector::Zero(3), SpdMatrix::identity(3)}, basis);
    CHECK(dec.action_index == 0);
}

TEST_CASE("IDEA optimism: scalar case and the trace form")
{
    // d = 1, gamma = 2, p = 1, s2 = 1: sqrt(4 * 1 / (1 + 1)) = sqrt(2).
    const LgdsSpec s = lgbtest::make_spec(Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), 1.0,
                                          Matrix::Ones(1, 1));
    CHECK(idea_optimism(Matrix::Ones(1, 1), s)(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    RandomStream rng(6);
    const LgdsSpec r = lgbtest::random_stable_spec(4, 3, rng);
    const Matrix root = lgbtest::random_matrix(4, 4, rng);
    const Matrix p = root * root.transpose();
    const Vector u = idea_optimism(p, r);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const Vector a = r.action(static_cast<std::size_t>(i));
        const Matrix m = r.gamma * p * a * a.transpose() * p * r.gamma.transpose() / (a.dot(p * a) + r.sigma2());
        CHECK(u(i) == doctest::Approx(std::sqrt(m.trace())).epsilon(1e-12));
    }
}

TEST_CASE("zero state matrix reduces IDEA to greedy")
{
    RandomStream rng(9);
    LgdsSpec s = lgbtest::random_stable_spec(3, 4, rng);
    s.gamma.setZero();
    KalmanState kf{lgbtest::random_matrix(3, 1, rng), SpdMatrix::identity(3)};
    CHECK(idea_optimism(kf.p.matrix(), s).isZero());
    CHECK(idea_select(kf, s).action_index == kode_select(kf, s).action_index);
}

TEST_CASE("Kalman-UCB optimism is sqrt(a'Pa log(1/delta))")
{
    RandomStream rng(10);
    const LgdsSpec s = lgbtest::random_stable_spec(3, 4, rng);
    const Matrix root = lgbtest::random_matrix(3, 3, rng);
    const Matrix p = root * root.transpose();
    const Vector u = kalman_ucb_optimism(p, s, 0.1);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const Vector a = s.action(static_cast<std::size_t>(i));
        CHECK(u(i) == doctest::Approx(std::sqrt(a.dot(p * a) * std::log(10.0))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kalman_ucb_optimism(p, s, 1.0), ParameterError);
    CHECK_THROWS_AS(kalman_ucb_optimism(p, s, 0.0), ParameterError);
}

TEST_CASE("optimism-based selection is argmax of prediction plus optimism")
{
    RandomStream rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const LgdsSpec s = lgbtest::random_stable_spec(3, 5, rng);
        const Matrix root = lgbtest::random_matrix(3, 3, rng);
        const KalmanState kf{lgbtest::random_matrix(3, 1, rng), SpdMatrix::checked(root * root.transpose())};
        const Vector pred = s.actions * kf.zhat;
        const Vector ui = idea_optimism(kf.p.matrix(), s);
        const Vector uk = kalman_ucb_optimism(kf.p.matrix(), s, 0.2);
        // Brute force over all actions.
        std::size_t bi = 0, bk = 0, bg = 0;
        for (std::size_t i = 1; i < 5; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            if (pred(e) + ui(e) > pred(static_cast<Eigen::Index>(bi)) + ui(static_cast<Eigen::Index>(bi))) bi = i;
            if (pred(e) + uk(e) > pred(static_cast<Eigen::Index>(bk)) + uk(static_cast<Eigen::Index>(bk))) bk = i;
            if (pred(e) > pred(static_cast<Eigen::Index>(bg))) bg = i;
        }
        CHECK(idea_select(kf, s).action_index == bi);
        CHECK(kalman_ucb_select(kf, s, 0.2).action_index == bk);
        CHECK(kode_select(kf, s).action_index == bg);
    }
}

TEST_CASE("UCB plays unvisited arms first and then uses the confidence width")
{
    UcbStatistics bs(3);
    CHECK(ucb_select(bs, 0, 0.05, 1.0).action_index == 0);
    bs.record(0, 1.0);
    CHECK(ucb_select(bs, 1, 0.05, 1.0).action_index == 1);
    bs.record(1, 0.0);
    bs.record(2, 0.5);
    bs.record(2, 0.5);
    const PolicyDecision d = ucb_select(bs, 4, 0.05, 1.0);
    const double w = 2.0 * std::log(20.0);
    CHECK(d.scores(0) == doctest::Approx(1.0 + std::sqrt(w)));
    CHECK(d.scores(2) == doctest::Approx(0.5 + std::sqrt(w / 2.0)));
    CHECK(d.action_index == 0);
    CHECK_THROWS_AS(ucb_select(bs, 4, 0.05, 0.0), ParameterError);
}

TEST_CASE("sliding-window statistics equal a naive recomputation")
{
    const std::size_t window = 7;
    SlidingWindowStatistics sw(3, window);
    RandomStream rng(13);
    std::vector<std::pair<std::size_t, double>> history;
    for (std::size_t t = 0; t < 60; ++t) {
        const UcbStatistics got = sw.statistics_at(t);
        UcbStatistics naive(3);
        for (std::size_t s = (t > window ? t - window : 0); s < t; ++s) naive.record(history[s].first, history[s].second);
        for (std::size_t a = 0; a < 3; ++a) {
            CHECK(got.count(a) == naive.count(a));
            CHECK(got.sum(a) == doctest::Approx(naive.sum(a)).epsilon(1e-12));
        }
        const std::size_t a = rng.index(3);
        const double x = rng.normal();
        history.emplace_back(a, x);
        sw.record(t, a, x);
    }
    CHECK_THROWS_AS(sw_ucb_select(sw, 60, 0.05, 1.0, window + 1), ParameterError);
}

TEST_CASE("Rexp3 keeps a valid distribution and restarts each batch")
{
    Rexp3State st(4, 5, 0.3, 1.0, 17);
    for (std::size_t t = 0; t < 23; ++t) {
        const PolicyDecision d = rexp3_select(st, t);
        if (t % 5 == 0) {
            for (Eigen::Index i = 0; i < 4; ++i) CHECK(st.probabilities()(i) == doctest::Approx(0.25));
        }
        CHECK(st.probabilities().sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(st.probabilities().minCoeff() >= 0.3 / 4 - 1e-15);
        st.update(d.action_index, 2.0);
    }
    CHECK_THROWS_AS(Rexp3State(4, 0, 0.3, 1.0, 1), ParameterError);
    CHECK_THROWS_AS(Rexp3State(4, 5, 0.0, 1.0, 1), ParameterError);
}

TEST_CASE("OFUL estimate is the ridge solution")
{
    RandomStream rng(21);
    OfulState st(3, 0.5, 0.05, 1.0);
    Matrix v = 0.5 * Matrix::Identity(3, 3);
    Vector b = Vector::Zero(3);
    for (int i = 0; i < 10; ++i) {
        Vector a = lgbtest::random_matrix(3, 1, rng);
        a.normalize();
        const double x = rng.normal();
        st.update(a, x);
        v += a * a.transpose();
        b += x * a;
    }
    CHECK((st.estimate() - v.inverse() * b).norm() < 1e-12);
    CHECK(st.observations() == 10);
    const double beta = std::sqrt(0.5) + std::sqrt(2.0 * std::log(20.0) + 3.0 * std::log(1.0 + 10.0 / 1.5));
    CHECK(st.radius(10) == doctest::Approx(beta).epsilon(1e-12));
}

TEST_CASE("random policy is uniform")
{
    RandomStream rng(22);
    std::vector<int> counts(4, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++counts[random_select(4, rng).action_index];
    // Binomial sd ~ sqrt(n * 0.25 * 0.75) ~ 87.
    for (int c : counts) CHECK(std::abs(c - n / 4) < 450);
}

TEST_CASE("make_policy surfaces parameter errors before play")
{
    RandomStream rng(23);
    const LgdsSpec s = lgbtest::random_stable_spec(3, 3, rng);
    PolicyParams p;
    p.kalman_ucb_delta = 2.0;
    CHECK_THROWS_AS(make_policy(PolicyId::kalman_ucb, p, s, 100, 1), ParameterError);
    p = PolicyParams{};
    p.ucb_scale = -1.0;
    CHECK_THROWS_AS(make_policy(PolicyId::ucb, p, s, 100, 1), ParameterError);
    p = PolicyParams{};
    p.rexp3_gamma = 1.5;
    CHECK_THROWS_AS(make_policy(PolicyId::rexp3, p, s, 100, 1), ParameterError);
    CHECK_THROWS_AS(parse_policy("thompson"), ParameterError);
    for (PolicyId id : all_policies()) CHECK(parse_policy(to_string(id)) == id);
}

TEST_CASE("filter policies expose their predictor and the oracle needs full information")
{
    RandomStream rng(24);
    const LgdsSpec s = lgbtest::random_stable_spec(3, 3, rng);
    auto idea = make_policy(PolicyId::idea, PolicyParams{}, s, 10, 1);
    REQUIRE(idea->state_estimate());
    REQUIRE(idea->error_covariance());
    CHECK(idea->error_covariance()->matrix() == s.sigma0.matrix());
    const PolicyDecision d = idea->select(0);
    idea->observe(0, d.action_index, 1.0);
    const KalmanState expected = kf_update(kf_init(s), d.action_index, 1.0, s);
    CHECK(*idea->state_estimate() == expected.zhat);

    auto oracle = make_policy(PolicyId::kalman_oracle, PolicyParams{}, s, 10, 1);
    CHECK(oracle->full_information());
    CHECK_THROWS_AS(oracle->observe(0, 0, 1.0), ParameterError);
    CHECK(make_policy(PolicyId::ucb, PolicyParams{}, s, 10, 1)->state_estimate() == nullptr);
}

TEST_CASE("policy parameters round-trip through JSON")
{
    PolicyParams p;
    p.sw_window = 12;
    p.ucb_scale = 2.5;
    const nlohmann::json j = p;
    const PolicyParams q = j.get<PolicyParams>();
    CHECK(q.sw_window == p.sw_window);
    CHECK(q.ucb_scale == p.ucb_scale);
    CHECK(q.kalman_ucb_delta == p.kalman_ucb_delta);
    CHECK_FALSE(q.rexp3_batch.has_value());
}
