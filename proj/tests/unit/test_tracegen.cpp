#include <doctest.h>

#include "overlay_phase/markov.hpp"
#include "overlay_phase/tracegen.hpp"

using namespace overlay_phase;
using namespace overlay_phase::tracegen;

namespace {

GenConfig limewire_config(Model model, std::int64_t steps, std::uint64_t seed = 1) {
    auto dm = queue::DoubleModel::limewire();
    GenConfig c;
    c.model = model;
    c.leaf = dm.leaf;
    c.ultra = dm.ultra;
    c.x0 = {30, 32};
    c.steps = steps;
    c.seed = seed;
    return c;
}

Eigen::VectorXd leaf_marginal(const std::vector<GeneratedStep>& trace, int states) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(states);
    for (std::size_t i = 1; i < trace.size(); ++i) h(trace[i].state.leaf) += 1.0;
    return h / h.sum();
}

}  // namespace

TEST_SUITE("tracegen") {
    TEST_CASE("cumulative") {
        Eigen::MatrixXd t(3, 1);
        t << 0.2, 0.3, 0.5;
        auto c = cumulative(t);
        CHECK(c(0, 0) == doctest::Approx(0.2));
        CHECK(c(1, 0) == doctest::Approx(0.5));
        CHECK(c(2, 0) == doctest::Approx(1.0));

        auto id = cumulative(Eigen::MatrixXd::Identity(4, 4));
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) CHECK(id(i, j) == (i >= j ? 1.0 : 0.0));

        auto r = cumulative(queue::bdtm_transfer({3.0, 0.4, 6, 0}));
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            CHECK(r(r.rows() - 1, j) == doctest::Approx(1.0).epsilon(1e-9));
            for (Eigen::Index i = 1; i < r.rows(); ++i) CHECK(r(i, j) >= r(i - 1, j));
        }
    }

    TEST_CASE("ctdm step") {
        Eigen::MatrixXd c(3, 1);
        c << 0.2, 0.5, 1.0;
        CHECK(ctdm_step(c, 0, 0.0) == 0);
        CHECK(ctdm_step(c, 0, 0.2) == 1);
        CHECK(ctdm_step(c, 0, 0.999999) == 2);
        Eigen::MatrixXd z(3, 1);
        z << 0.0, 0.0, 1.0;
        CHECK(ctdm_step(z, 0, 0.0) == 2);

        Eigen::MatrixXd t(3, 1);
        t << 0.2, 0.3, 0.5;
        auto cc = cumulative(t);
        Rng rng(21, 0);
        Eigen::Vector3d freq = Eigen::Vector3d::Zero();
        const int n = 1000000;
        for (int i = 0; i < n; ++i) freq(ctdm_step(cc, 0, rng.uniform())) += 1.0;
        freq /= n;
        for (int i = 0; i < 3; ++i) CHECK(std::abs(freq(i) - t(i, 0)) < 0.005);
    }

    TEST_CASE("bdtm step limits") {
        Rng rng(1, 0);
        queue::QueueParams dead{0.0, 1.0, 12, 20};
        CHECK(bdtm_step(27, dead, rng) == 20);
        queue::QueueParams frozen{0.0, 0.0, 30, 0};
        CHECK(bdtm_step(17, frozen, rng) == 17);
        queue::QueueParams busy{50.0, 0.01, 30, 0};
        CHECK(bdtm_step(30, busy, rng) == 30);
    }

    TEST_CASE("bdtm long run matches its equilibrium") {
        auto c = limewire_config(Model::Bdtm, 200000);
        auto trace = generate(c);
        auto eq = queue::bdtm_equilibrium(queue::bdtm_transfer(c.leaf)).vector();
        CHECK(markov::total_variation(leaf_marginal(trace, 31), eq) < 0.03);
    }

    TEST_CASE("generate") {
        auto c = limewire_config(Model::Ctdm, 0);
        auto zero = generate(c);
        REQUIRE(zero.size() == 1);
        CHECK(zero[0].state == PhaseState{30, 32});

        for (auto model : {Model::Ctdm, Model::Bdtm}) {
            auto cfg = limewire_config(model, 2000, 99);
            auto a = generate(cfg, 3);
            auto b = generate(cfg, 3);
            REQUIRE(a.size() == 2001);
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i].state == b[i].state);
                CHECK(a[i].t == static_cast<std::int64_t>(i) * 1800);
                CHECK(a[i].state.leaf >= 0);
                CHECK(a[i].state.leaf <= 30);
                CHECK(a[i].state.ultra >= 20);
                CHECK(a[i].state.ultra <= 32);
            }
            auto other = generate(cfg, 4);
            bool differs = false;
            for (std::size_t i = 0; i < a.size(); ++i) differs |= !(a[i].state == other[i].state);
            CHECK(differs);
        }
    }

    TEST_CASE("invalid configs") {
        auto c = limewire_config(Model::Ctdm, 10);
        c.x0 = {31, 32};
        CHECK_THROWS_AS(generate(c), Error);
        c.x0 = {0, 19};
        CHECK_THROWS_AS(generate(c), Error);
        c.x0 = {0, 20};
        c.steps = -1;
        CHECK_THROWS_AS(generate(c), Error);
        auto b = limewire_config(Model::Bdtm, 10);
        b.leaf.mu = 1.5;
        CHECK_THROWS_AS(generate(b), Error);
        CHECK(parse_model("bdtm") == Model::Bdtm);
        CHECK_THROWS_AS(parse_model("mm1"), Error);
    }

    TEST_CASE("output does not depend on the thread count") {
        for (auto model : {Model::Ctdm, Model::Bdtm}) {
            auto c = limewire_config(model, 300, 5);
            auto one = generate_many(c, 9, 1);
            auto four = generate_many(c, 9, 4);
            for (std::size_t t = 0; t < 9; ++t) {
                REQUIRE(one[t].size() == four[t].size());
                for (std::size_t i = 0; i < one[t].size(); ++i) CHECK(one[t][i].state == four[t][i].state);
            }
        }
    }

    TEST_CASE("synthetic records track the degree trace") {
        auto c = limewire_config(Model::Bdtm, 50, 8);
        auto trace = generate(c);
        Rng rng(8, 2);
        auto records = to_records(trace, "g0", "limewire-4.x", rng);
        REQUIRE(records.size() == trace.size());
        for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].state() == trace[i].state);
        // Thinning shows up as real neighbor turnover, not only net change.
        int departures = 0;
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& prev = records[i - 1].leaf_neighbors();
            const auto& next = records[i].leaf_neighbors();
            for (const auto& id : prev)
                if (!std::binary_search(next.begin(), next.end(), id)) ++departures;
        }
        CHECK(departures > 50);
    }

    TEST_CASE("ergodic convergence with run length") {
        auto c = limewire_config(Model::Ctdm, 100000, 2);
        auto trace = generate(c);
        auto eq = queue::ctdm_equilibrium(c.leaf).vector();
        std::vector<double> tv;
        for (std::size_t n : {1000u, 10000u, 100000u}) {
            std::vector<GeneratedStep> head(trace.begin(), trace.begin() + n + 1);
            tv.push_back(markov::total_variation(leaf_marginal(head, 31), eq));
        }
        CHECK(tv[2] < tv[0]);
        CHECK(tv[2] < 0.03);
    }
}
