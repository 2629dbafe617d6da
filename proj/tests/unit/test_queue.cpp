#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "overlay_phase/markov.hpp"
#include "overlay_phase/queue.hpp"

using namespace overlay_phase;
using namespace overlay_phase::queue;

namespace {

const QueueLimits kLimits{30, 32, 20};

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("markov") {
    TEST_CASE("stationary vector of a two-state chain") {
        Eigen::MatrixXd t(2, 2);
        t << 0.9, 0.2, 0.1, 0.8;
        auto h = markov::stationary(t);
        CHECK(h(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK((t * h - h).lpNorm<Eigen::Infinity>() < 1e-12);
    }

    TEST_CASE("reducible chain reports its closed classes") {
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
        CHECK(markov::closed_classes(id).size() == 3);
        try {
            markov::stationary(id);
            FAIL("expected a model error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Model);
            CHECK(std::string(e.what()).find("{0}") != std::string::npos);
        }
    }

    TEST_CASE("transient states do not make a chain reducible") {
        Eigen::MatrixXd t(3, 3);
        t << 0.5, 0.0, 0.0,
             0.5, 0.5, 0.5,
             0.0, 0.5, 0.5;
        CHECK(markov::closed_classes(t).size() == 1);
        auto h = markov::stationary(t);
        CHECK(h(0) == doctest::Approx(0.0));
        CHECK(h(1) == doctest::Approx(0.5));
    }

    TEST_CASE("non-stochastic input is rejected") {
        Eigen::MatrixXd t(2, 2);
        t << 0.9, 0.2, 0.2, 0.8;
        CHECK_THROWS_AS(markov::stationary(t), Error);
    }

    TEST_CASE("total variation") {
        Eigen::VectorXd p(2), q(2);
        p << 1, 0;
        q << 0.25, 0.75;
        CHECK(markov::total_variation(p, q) == doctest::Approx(0.75));
    }
}

TEST_SUITE("queue") {
    TEST_CASE("two-state generator") {
        QueueParams p{2.0, 3.0, 1, 0};
        Eigen::MatrixXd expected(2, 2);
        expected << -2.0, 3.0, 2.0, -3.0;
        CHECK((ctdm_generator(p) - expected).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("leaf and ultra generators") {
        auto leaf = ctdm_generator(QueueParams::leaf(9.5, 0.2, kLimits));
        CHECK(leaf.rows() == 31);
        CHECK(leaf.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);

        auto ultra = ctdm_generator(QueueParams::ultra(8.0, 0.16, kLimits));
        CHECK(ultra.rows() == 13);
        CHECK(ultra.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(ultra(0, 1) == doctest::Approx(21 * 0.16));
        CHECK(ultra(11, 12) == doctest::Approx(32 * 0.16));
        CHECK(ultra(1, 0) == doctest::Approx(8.0));
        for (Eigen::Index i = 0; i < ultra.rows(); ++i)
            for (Eigen::Index j = 0; j < ultra.cols(); ++j)
                if (i != j) CHECK(ultra(i, j) >= 0.0);
    }

    TEST_CASE("parameter validation") {
        CHECK_THROWS_AS((QueueParams{-1.0, 0.2, 30, 0}.validate()), Error);
        CHECK_THROWS_AS((QueueParams{1.0, 0.0, 30, 0}.validate()), Error);
        CHECK_THROWS_AS((QueueParams{1.0, 0.2, 0, 0}.validate()), Error);
        CHECK_THROWS_AS((QueueParams{1.0, 1.5, 3, 0}.validate(true)), Error);
        CHECK_NOTHROW((QueueParams{1.0, 1.0, 3, 0}.validate(true)));
    }

    TEST_CASE("vanishing arrivals give a point mass at the floor") {
        auto leaf = ctdm_equilibrium(QueueParams::leaf(1e-12, 0.2, kLimits));
        CHECK(leaf.at_degree(0) == doctest::Approx(1.0));
        auto ultra = ctdm_equilibrium(QueueParams::ultra(1e-12, 0.16, kLimits));
        CHECK(ultra.floor == 20);
        CHECK(ultra.at_degree(20) == doctest::Approx(1.0));
    }

    TEST_CASE("closed form equals the generator null space") {
        for (double ratio : {0.1, 1.0, 10.0, 45.6}) {
            for (auto p : {QueueParams::leaf(ratio * 0.2, 0.2, kLimits),
                           QueueParams::ultra(ratio * 0.16, 0.16, kLimits)}) {
                auto closed = ctdm_equilibrium(p).vector();
                auto oracle_h = oracle::generator_null_space(
                    oracle::birth_death_generator(p.lambda, p.mu, p.m, p.k));
                CHECK(max_abs_diff(closed, oracle_h) < 1e-10);
            }
        }
    }

    TEST_CASE("detailed balance") {
        auto p = QueueParams::ultra(8.0, 0.1603, kLimits);
        auto eq = ctdm_equilibrium(p);
        for (int i = 0; i + 1 < p.states(); ++i) {
            CHECK(p.lambda * eq.probs[i] ==
                  doctest::Approx((p.k + i + 1) * p.mu * eq.probs[i + 1]).epsilon(1e-10));
        }
    }

    TEST_CASE("Erlang-B blocking at the measured operating point") {
        const double mu = calibrate_mu(5.8, 27.8507);
        auto p = QueueParams::leaf(9.5, mu, kLimits);
        CHECK(p.lambda / p.mu == doctest::Approx(45.6).epsilon(0.01));
        const double b = blocking_probability(p);
        CHECK(b == doctest::Approx(oracle::erlang_b(p.lambda / p.mu, 30)).epsilon(1e-12));
        CHECK(b == doctest::Approx(0.37).epsilon(0.02));
        CHECK(1.0 - b == doctest::Approx(0.63).epsilon(0.02));
    }

    TEST_CASE("lambda estimation") {
        CHECK(estimate_lambda(0.36, 5.8) == doctest::Approx(9.0625));
        CHECK(estimate_lambda(0.39, 4.8) == doctest::Approx(7.87).epsilon(0.001));
        CHECK(estimate_lambda(0.0, 5.0) == 5.0);
        CHECK_THROWS_AS(estimate_lambda(1.0, 5.0), Error);
        CHECK_THROWS_AS(estimate_lambda(0.5, -1.0), Error);
    }

    TEST_CASE("admitted and rejected split") {
        auto a = admitted_rejected(9.5, 0.37);
        CHECK(a.admitted == doctest::Approx(5.985));
        CHECK(a.rejected == doctest::Approx(3.515));
        auto b = admitted_rejected(8.0, 0.39);
        CHECK(b.admitted == doctest::Approx(4.88));
        CHECK(b.rejected == doctest::Approx(3.12));
        auto c = admitted_rejected(7.0, 0.0);
        CHECK(c.admitted == 7.0);
        CHECK(c.rejected == 0.0);
    }

    TEST_CASE("BDTM limits") {
        auto dead = bdtm_transfer({0.0, 1.0, 3, 0});
        for (int j = 0; j < 4; ++j) CHECK(dead(0, j) == doctest::Approx(1.0));
        auto frozen = bdtm_transfer({0.0, 0.0, 3, 0});
        CHECK((frozen - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("BDTM matches brute-force enumeration") {
        for (auto p : {QueueParams{1.0, 0.5, 3, 0}, QueueParams{2.5, 0.3, 3, 0},
                       QueueParams{1.0, 0.5, 3, 2}, QueueParams{9.5, 0.208, 30, 0},
                       QueueParams{8.0, 0.16, 12, 20}}) {
            auto t = bdtm_transfer(p);
            auto oracle_t = oracle::bdtm_enumerate(p, 60);
            CHECK((t - oracle_t).cwiseAbs().maxCoeff() < 1e-9);
            CHECK(markov::column_sum_defect(t) < 1e-9);
        }
    }

    TEST_CASE("BDTM equilibrium") {
        CHECK_THROWS_AS(bdtm_equilibrium(Eigen::MatrixXd::Identity(4, 4)), Error);
        auto absorbed = bdtm_equilibrium(bdtm_transfer({0.0, 1.0, 3, 0}));
        CHECK(absorbed.probs[0] == doctest::Approx(1.0));

        QueueParams p{1.0, 0.5, 3, 0};
        auto t = oracle::bdtm_enumerate(p);
        auto eq = bdtm_equilibrium(t);
        CHECK(max_abs_diff(eq.vector(), oracle::power_iteration(t)) < 1e-10);
    }

    TEST_CASE("BDTM approaches CTDM as the step shrinks") {
        auto leaf = DoubleModel::limewire().leaf;
        auto ctdm = ctdm_equilibrium(leaf).vector();
        double previous = 1.0;
        for (double dt : {1.0, 0.5, 0.25, 0.125}) {
            auto bdtm = bdtm_equilibrium(bdtm_transfer(leaf.scaled(dt))).vector();
            const double tv = markov::total_variation(bdtm, ctdm);
            CHECK(tv < previous);
            previous = tv;
        }
    }

    TEST_CASE("CTDM transfer is stochastic and keeps the equilibrium") {
        auto p = DoubleModel::limewire().ultra;
        auto t = ctdm_transfer(p);
        CHECK(markov::column_sum_defect(t) < 1e-9);
        auto eq = ctdm_equilibrium(p).vector();
        CHECK(max_abs_diff(t * eq, eq) < 1e-10);
    }

    TEST_CASE("measured and literal parameter readings") {
        auto lw = DoubleModel::limewire();
        CHECK(lw.leaf.lambda == 9.5);
        CHECK(lw.leaf.mu == doctest::Approx(5.8 / 27.8507));
        CHECK(lw.ultra.lambda == 8.0);
        CHECK(lw.ultra.k == 20);
        CHECK(lw.ultra.m == 12);
        auto lit = DoubleModel::limewire_literal();
        CHECK(lit.leaf.mu == 9.5);
        CHECK(lit.leaf.lambda == doctest::Approx(9.0625));
    }
}
