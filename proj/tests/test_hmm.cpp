#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gomkit/hmm.hpp"
#include "test_util.hpp"

using namespace gomkit;

namespace {

HmmModel make_model(int n_states, long D, HmmTopology topo, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    std::uniform_real_distribution<double> mu(-3.0, 3.0);
    HmmModel m;
    m.n_states = n_states;
    m.topology = topo;
    m.initial.resize(n_states);
    m.transition.resize(n_states, n_states);
    if (topo == HmmTopology::LeftToRight) {
        m.initial.setZero();
        m.initial[0] = 1.0;
        m.transition.setZero();
        for (int s = 0; s < n_states - 1; ++s) {
            const double self = 0.3 + 0.4 * u(rng);
            m.transition(s, s) = self;
            m.transition(s, s + 1) = 1.0 - self;
        }
        m.transition(n_states - 1, n_states - 1) = 1.0;
    } else {
        for (int s = 0; s < n_states; ++s) {
            m.initial[s] = u(rng);
            for (int q = 0; q < n_states; ++q) m.transition(s, q) = u(rng);
            m.transition.row(s) /= m.transition.row(s).sum();
        }
        m.initial /= m.initial.sum();
    }
    m.means.resize(n_states, D);
    m.variances.resize(n_states, D);
    for (int s = 0; s < n_states; ++s)
        for (long j = 0; j < D; ++j) {
            m.means(s, j) = mu(rng);
            m.variances(s, j) = u(rng);
        }
    m.standardizer = Standardizer::identity(D);
    return m;
}

std::vector<Eigen::MatrixXd> sample_two_state_ltr(std::mt19937_64& rng, int sequences, long T,
                                                  double mean0, double mean1) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::MatrixXd> out;
    for (int i = 0; i < sequences; ++i) {
        Eigen::MatrixXd seq(T, 1);
        int state = 0;
        for (long t = 0; t < T; ++t) {
            if (state == 0 && u(rng) < 0.1) state = 1;
            seq(t, 0) = (state == 0 ? mean0 : mean1) + noise(rng);
        }
        out.push_back(std::move(seq));
    }
    return out;
}

} // namespace

TEST_CASE("constant features cannot be standardized") {
    std::vector<Eigen::MatrixXd> data = {Eigen::MatrixXd::Constant(30, 2, 5.0)};
    CHECK_THROWS_AS(hmm_fit(data, 2, HmmTopology::LeftToRight), DegenerateDataError);
}

TEST_CASE("two-state left-to-right recovery of well-separated means") {
    std::mt19937_64 rng(41);
    const auto data = sample_two_state_ltr(rng, 12, 60, 0.0, 5.0);
    const HmmFitResult fitted = hmm_fit(data, 2, HmmTopology::LeftToRight);
    const HmmModel& m = fitted.model;

    // destandardize the state means back into feature units
    const double m0 = m.standardizer.mean[0] + m.means(0, 0) * m.standardizer.stddev[0];
    const double m1 = m.standardizer.mean[0] + m.means(1, 0) * m.standardizer.stddev[0];
    CHECK(std::abs(m0 - 0.0) < 0.3);
    CHECK(std::abs(m1 - 5.0) < 0.3);
}

TEST_CASE("baum-welch trace is non-decreasing") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Eigen::MatrixXd> data;
        for (int i = 0; i < 4; ++i) {
            Eigen::MatrixXd seq(30 + static_cast<long>(rng() % 20), 2);
            for (long t = 0; t < seq.rows(); ++t) {
                seq(t, 0) = noise(rng) + (t > seq.rows() / 2 ? 2.0 : 0.0);
                seq(t, 1) = noise(rng);
            }
            data.push_back(std::move(seq));
        }
        const HmmTopology topo =
            trial % 2 == 0 ? HmmTopology::LeftToRight : HmmTopology::Ergodic;
        const HmmFitResult fitted = hmm_fit(data, 3, topo);
        REQUIRE(fitted.loglik_trace.size() >= 1);
        for (size_t k = 1; k < fitted.loglik_trace.size(); ++k)
            REQUIRE(fitted.loglik_trace[k] >= fitted.loglik_trace[k - 1]);
    }
}

TEST_CASE("left-to-right structure survives re-estimation") {
    std::mt19937_64 rng(43);
    const auto data = sample_two_state_ltr(rng, 8, 40, -1.0, 4.0);
    const HmmModel m = hmm_fit(data, 3, HmmTopology::LeftToRight).model;
    CHECK(m.initial[0] == doctest::Approx(1.0));
    CHECK(m.initial[1] == 0.0);
    CHECK(m.initial[2] == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(m.transition.row(i).sum() == doctest::Approx(1.0));
        for (int j = 0; j < 3; ++j) {
            if (j < i) CHECK(m.transition(i, j) == 0.0);   // no going back
            if (j > i + 1) CHECK(m.transition(i, j) == 0.0); // no skips
        }
    }
}

TEST_CASE("forward log-probability matches path enumeration") {
    std::mt19937_64 rng(44);
    std::normal_distribution<double> noise(0.0, 1.5);
    std::uniform_int_distribution<int> states(1, 5);
    std::uniform_int_distribution<long> frames(1, 6);
    std::uniform_int_distribution<long> dims(1, 3);
    for (int trial = 0; trial < 80; ++trial) {
        const int n = states(rng);
        const long T = frames(rng);
        const long D = dims(rng);
        const HmmTopology topo =
            trial % 2 == 0 ? HmmTopology::LeftToRight : HmmTopology::Ergodic;
        const HmmModel m = make_model(n, D, topo, rng);
        Eigen::MatrixXd obs(T, D);
        for (long t = 0; t < T; ++t)
            for (long j = 0; j < D; ++j) obs(t, j) = noise(rng);
        const double expect = gomkit::test::hmm_loglik_bruteforce(m, obs);
        const double got = loglik(m, obs);
        REQUIRE(std::abs(got - expect) < 1e-8);
    }
}

TEST_CASE("one-state model collapses to a sum of gaussian log-densities") {
    std::mt19937_64 rng(45);
    HmmModel m = make_model(1, 2, HmmTopology::Ergodic, rng);
    Eigen::MatrixXd obs(4, 2);
    obs << 0.1, -0.4, 1.2, 0.3, -0.7, 0.9, 0.0, 0.0;
    double expect = 0.0;
    for (long t = 0; t < 4; ++t)
        for (long j = 0; j < 2; ++j) {
            const double var = m.variances(0, j);
            const double diff = obs(t, j) - m.means(0, j);
            expect += -0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
        }
    CHECK(loglik(m, obs) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("scaling keeps long far-off sequences finite") {
    std::mt19937_64 rng(46);
    HmmModel m = make_model(3, 4, HmmTopology::LeftToRight, rng);
    Eigen::MatrixXd obs = Eigen::MatrixXd::Constant(5000, 4, 40.0); // far from all means
    const double ll = loglik(m, obs);
    CHECK(std::isfinite(ll));
    CHECK(ll < 0.0);
}

TEST_CASE("guards") {
    std::mt19937_64 rng(47);
    const HmmModel m = make_model(2, 3, HmmTopology::Ergodic, rng);
    CHECK_THROWS_AS(loglik(m, Eigen::MatrixXd::Zero(5, 2)), DimensionError);
    CHECK_THROWS_AS(hmm_fit({}, 2, HmmTopology::Ergodic), InsufficientDataError);
    // left-to-right needs at least n_states frames per sequence
    std::vector<Eigen::MatrixXd> shorty = {Eigen::MatrixXd::Random(3, 2)};
    CHECK_THROWS_AS(hmm_fit(shorty, 4, HmmTopology::LeftToRight), InsufficientDataError);
}

TEST_CASE("variance floor is respected") {
    std::mt19937_64 rng(48);
    // nearly constant second half drives in-state variance toward zero
    std::vector<Eigen::MatrixXd> data;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        Eigen::MatrixXd seq(40, 1);
        for (long t = 0; t < 40; ++t) seq(t, 0) = t < 20 ? noise(rng) : 10.0;
        data.push_back(std::move(seq));
    }
    const HmmModel m = hmm_fit(data, 2, HmmTopology::LeftToRight).model;
    CHECK(m.variances.minCoeff() >= 1e-6);
}
