// Acceptance checks. Prints one PASS/FAIL line per criterion; `--only N` runs
// a single one. Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "overlay_phase/analytics.hpp"
#include "overlay_phase/churn.hpp"
#include "overlay_phase/classifier.hpp"
#include "overlay_phase/ingest.hpp"
#include "overlay_phase/markov.hpp"
#include "overlay_phase/profiles.hpp"
#include "overlay_phase/queue.hpp"
#include "overlay_phase/simulator.hpp"
#include "overlay_phase/tracegen.hpp"

using namespace overlay_phase;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// 1. Region-chain equilibrium.
void region_equilibrium(Outcome& o) {
    const Eigen::Vector4d h_l(0.3955, 0.5107, 0.0901, 0.0037);
    const Eigen::Vector4d h_b(0.2975, 0.5901, 0.0405, 0.0720);
    const auto g_l = oracle::g_limewire();
    const auto g_b = oracle::g_bearshare();
    const double err_l = (analytics::equilibrium(g_l) - h_l).cwiseAbs().maxCoeff();
    const double err_b = (analytics::equilibrium(g_b) - h_b).cwiseAbs().maxCoeff();
    const int reps = 2000;
    const auto start = Clock::now();
    double sink = 0.0;
    for (int i = 0; i < reps; ++i) sink += analytics::equilibrium(i % 2 ? g_l : g_b)(0);
    const double per_call_ms = seconds_since(start) * 1e3 / reps;
    o.require(err_l < 2e-3, "max |h_L err| " + fmt(err_l));
    o.require(err_b < 2e-3, "max |h_B err| " + fmt(err_b));
    o.require(per_call_ms < 1.0 && sink > 0.0, "runtime " + fmt(per_call_ms * 1e3) + " us/call");
}

// 2. Lambda estimation.
void lambda_estimation(Outcome& o) {
    const double a = queue::estimate_lambda(0.36, 5.8);
    const double b = queue::estimate_lambda(0.39, 4.8);
    o.require(std::abs(a - 9.1) <= 0.05, "lambda(0.36, 5.8) = " + fmt(a));
    o.require(std::abs(b - 7.9) <= 0.05, "lambda(0.39, 4.8) = " + fmt(b));
}

// 3. Erlang identity and the measured operating point.
void erlang_identity(Outcome& o) {
    double worst = 0.0;
    int points = 0;
    for (double load : {0.5, 2.0, 8.0, 20.0, 45.6}) {
        for (int m : {5, 12, 30, 40}) {
            queue::QueueParams p{load * 0.2, 0.2, m, 0};
            const double top = queue::ctdm_equilibrium(p).top();
            const double b = oracle::erlang_b(load, m);
            worst = std::max(worst, std::abs(top - b) / std::max(b, 1e-300));
            ++points;
        }
    }
    o.require(points == 20 && worst < 1e-12, "20-point grid, max rel err " + fmt(worst));
    const auto leaf = queue::QueueParams::leaf(9.5, queue::calibrate_mu(5.8, 27.85), QueueLimits{});
    const double blocking = queue::blocking_probability(leaf);
    const auto split = queue::admitted_rejected(leaf.lambda, blocking);
    o.require(blocking >= 0.32 && blocking <= 0.42, "blocking " + fmt(blocking));
    o.require(std::abs(split.admitted - 5.98) <= 0.4, "admitted " + fmt(split.admitted));
}

// 4. Closed form vs the generator null space.
void closed_form(Outcome& o) {
    const QueueLimits limits{30, 32, 20};
    double worst = 0.0;
    for (double ratio : {0.1, 1.0, 10.0, 45.6}) {
        for (double mu : {0.2, 0.16}) {
            for (auto p : {queue::QueueParams::leaf(ratio * mu, mu, limits),
                           queue::QueueParams::ultra(ratio * mu, mu, limits)}) {
                const auto closed = queue::ctdm_equilibrium(p).vector();
                const auto null = oracle::generator_null_space(
                    oracle::birth_death_generator(p.lambda, p.mu, p.m, p.k));
                worst = std::max(worst, (closed - null).cwiseAbs().maxCoeff());
            }
        }
    }
    o.require(worst < 1e-10, "max abs diff " + fmt(worst));
}

// 5. BDTM enumeration and small-step convergence.
void bdtm_convergence(Outcome& o) {
    double worst = 0.0;
    for (auto p : {queue::QueueParams{1.0, 0.5, 3, 0}, queue::QueueParams{2.0, 0.25, 3, 0},
                   queue::QueueParams{0.5, 0.9, 3, 2}}) {
        worst = std::max(worst, (queue::bdtm_transfer(p) - oracle::bdtm_enumerate(p)).cwiseAbs().maxCoeff());
    }
    o.require(worst < 1e-9, "m=3 vs enumeration " + fmt(worst));

    const auto leaf = queue::DoubleModel::limewire().leaf;
    const auto ctdm = queue::ctdm_equilibrium(leaf).vector();
    auto tv_at = [&](double dt) {
        const auto t = queue::bdtm_transfer(leaf.scaled(dt));
        return markov::total_variation(queue::bdtm_equilibrium(t).vector(), ctdm);
    };
    std::vector<double> tv;
    for (double dt : {1.0, 0.5, 0.25, 0.125}) tv.push_back(tv_at(dt));
    bool monotone = true;
    for (std::size_t i = 1; i < tv.size(); ++i) monotone &= tv[i] < tv[i - 1];
    o.require(monotone, "TV over dt 1..1/8: " + fmt(tv[0]) + " " + fmt(tv[1]) + " " + fmt(tv[2]) +
                            " " + fmt(tv[3]));
    const double fine = tv_at(1.0 / 64.0);
    o.require(fine < 0.01, "TV at dt=1/64 " + fmt(fine));
}

// 6. Generator ergodicity.
void generator_ergodicity(Outcome& o) {
    const auto start = Clock::now();
    const auto model = queue::DoubleModel::limewire();
    for (auto kind : {tracegen::Model::Ctdm, tracegen::Model::Bdtm}) {
        tracegen::GenConfig c;
        c.model = kind;
        c.leaf = model.leaf;
        c.ultra = model.ultra;
        c.x0 = {30, 32};
        c.steps = 1000000;
        c.seed = 2024;
        const auto trace = tracegen::generate(c);
        Eigen::VectorXd leaf = Eigen::VectorXd::Zero(c.leaf.states());
        Eigen::VectorXd ultra = Eigen::VectorXd::Zero(c.ultra.states());
        for (std::size_t i = 1; i < trace.size(); ++i) {
            leaf(trace[i].state.leaf) += 1.0;
            ultra(trace[i].state.ultra - c.ultra.floor()) += 1.0;
        }
        leaf /= leaf.sum();
        ultra /= ultra.sum();
        Eigen::VectorXd eq_leaf, eq_ultra;
        if (kind == tracegen::Model::Ctdm) {
            eq_leaf = queue::ctdm_equilibrium(c.leaf).vector();
            eq_ultra = queue::ctdm_equilibrium(c.ultra).vector();
        } else {
            eq_leaf = queue::bdtm_equilibrium(queue::bdtm_transfer(c.leaf)).vector();
            eq_ultra = queue::bdtm_equilibrium(queue::bdtm_transfer(c.ultra)).vector();
        }
        const double tv_l = markov::total_variation(leaf, eq_leaf);
        const double tv_u = markov::total_variation(ultra, eq_ultra);
        const char* name = kind == tracegen::Model::Ctdm ? "ctdm" : "bdtm";
        o.require(tv_l < 0.03 && tv_u < 0.03,
                  std::string(name) + " TV leaf " + fmt(tv_l) + " ultra " + fmt(tv_u));

        c.steps = 100000;
        const auto a = tracegen::generate(c, 1);
        const auto b = tracegen::generate(c, 1);
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].state == b[i].state;
        o.require(same, std::string(name) + " seed-identical");
    }
    const double elapsed = seconds_since(start);
    o.require(elapsed < 30.0, "runtime " + fmt(elapsed, 3) + " s");
}

// 7. Classifier.
void classifier_recovery(Outcome& o) {
    using namespace classifier;
    const PhaseState L{0, 2}, T{15, 25}, U{30, 32};
    auto repeat = [](std::initializer_list<std::pair<PhaseState, int>> runs) {
        std::vector<PhaseState> out;
        for (auto [s, n] : runs) out.insert(out.end(), n, s);
        return out;
    };
    const std::vector<std::pair<TraceClass, std::vector<PhaseState>>> corpus{
        {TraceClass::StableLeaf, repeat({{L, 10}})},
        {TraceClass::NeverStableUltra, repeat({{T, 10}})},
        {TraceClass::StableUltra, repeat({{U, 10}})},
        {TraceClass::Bipolar, repeat({{L, 5}, {U, 5}})},
        {TraceClass::UnstableLeaf, repeat({{L, 5}, {T, 5}})},
        {TraceClass::TotalChurn, repeat({{L, 3}, {T, 3}, {U, 4}})},
        {TraceClass::StableUltraOccasionalChurn, repeat({{U, 4}, {T, 1}, {U, 5}})},
        {TraceClass::HalfStableUltra, repeat({{T, 5}, {U, 2}})},
        {TraceClass::HalfUnstableUltra, repeat({{T, 2}, {U, 5}})},
    };
    const auto regions = regions_from(builtin_profile("limewire"));
    int recovered = 0;
    for (const auto& [expected, trace] : corpus) {
        if (classify(trace_attributes(trace, regions)) == expected) ++recovered;
    }
    o.require(recovered == 9, std::to_string(recovered) + "/9 archetypes");

    Rng rng(77, 0);
    int total = 0, stable = 0;
    for (int i = 0; i < 100000; ++i) {
        std::array<double, 3> w{};
        for (double& x : w) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        if (w[0] + w[1] + w[2] == 0.0) w[rng.index(3)] = 1.0;
        const double s = w[0] + w[1] + w[2];
        TraceAttributes a{w[0] / s, w[1] / s, w[2] / s, 0, 0, 0};
        auto xi = [&](double eta) {
            if (eta == 0.0) return 0.0;
            const double r = rng.uniform();
            return r < 0.15 ? 1.0 : r < 0.25 ? 0.0 : rng.uniform();
        };
        a.xi_l = xi(a.eta_l);
        a.xi_t = xi(a.eta_t);
        a.xi_u = xi(a.eta_u);
        try {
            const auto c = classify(a);
            ++total;
            if (classify(a) == c && subplot_of(c) >= 1 && subplot_of(c) <= 9) ++stable;
        } catch (const Error&) {
        }
    }
    o.require(total == 100000 && stable == total,
              "property cases " + std::to_string(stable) + "/100000");
}

// 8. Churn estimators.
void churn_estimators(Outcome& o) {
    Rng rng(88, 0);
    std::vector<int> counts;
    counts.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) counts.push_back(rng.poisson(4.3));
    const auto head = churn::fit_poisson(churn::histogram_of(counts), churn::PoissonMethod::HeadKMean, 11);
    o.require(std::abs(head.lambda_hat - 4.3) < 0.1, "head-11 lambda " + fmt(head.lambda_hat));

    std::vector<churn::Session> sessions;
    for (int i = 0; i < 10000; ++i) {
        const auto life = static_cast<std::int64_t>(std::llround(rng.exponential(1.0 / 11.23) * 3600.0));
        sessions.push_back({"p" + std::to_string(i), 0, life});
    }
    const double rate = churn::fit_exponential(sessions).rate_per_hour();
    o.require(std::abs(rate * 11.23 - 1.0) < 0.03, "session rate " + fmt(rate) + "/h");

    const double leaf = churn::connection_lifetime(27.8507, 11.6);
    const double ultra = churn::connection_lifetime(29.9443, 9.6);
    o.require(std::abs(leaf - 2.40) <= 0.01, "leaf life " + fmt(leaf) + " h");
    o.require(std::abs(ultra - 3.12) <= 0.01, "ultra life " + fmt(ultra) + " h");
}

// 9 and 10 share one simulated run.
struct SimRun {
    sim::SimResult result;
    double seconds = 0.0;
};

SimRun simulate(double attempt_scale) {
    sim::SimConfig c;
    c.peers = 1000;
    c.duration_hours = 23.0;
    c.attempt_scale = attempt_scale;
    const auto start = Clock::now();
    SimRun r{sim::run(c), 0.0};
    r.seconds = seconds_since(start);
    return r;
}

const SimRun& baseline_run() {
    static const SimRun run = simulate(1.0);
    return run;
}

struct RegionMass {
    double usr = 0.0;
    std::int64_t ultra_samples = 0;
    std::int64_t tb_samples = 0;
    std::int64_t belt_samples = 0;
};

RegionMass ultra_region_mass(const TraceStore& store, const SoftwareProfile& profile) {
    RegionMass m;
    std::int64_t usr = 0;
    for (const auto& [peer, trace] : store.traces()) {
        for (const auto& r : trace.records()) {
            const auto s = r.state();
            const auto region = analytics::region_of(s, profile);
            if (region == RegionId::TB) ++m.tb_samples;
            if (s.ultra >= profile.belt_lo && s.ultra <= profile.belt_hi &&
                region != RegionId::USR) {
                ++m.belt_samples;
            }
            if (r.mode() != PeerMode::Ultra) continue;
            ++m.ultra_samples;
            if (region == RegionId::USR) ++usr;
        }
    }
    m.usr = m.ultra_samples ? static_cast<double>(usr) / m.ultra_samples : 0.0;
    return m;
}

void end_to_end(Outcome& o) {
    const auto profile = builtin_profile("limewire");
    const auto& full = baseline_run();
    const auto store = make_store(full.result.records);
    const auto mass = ultra_region_mass(store, profile);
    o.require(mass.usr >= 0.40, "USR share of ultra samples " + fmt(mass.usr, 3));
    o.require(mass.tb_samples > 0 && mass.belt_samples > 0,
              "TB samples " + std::to_string(mass.tb_samples) + ", belt outside USR " +
                  std::to_string(mass.belt_samples));

    const auto pairs = analytics::transition_pairs(store);
    const auto rt = analytics::region_transfer_matrix(pairs, profile);
    o.require(rt.p(index_of(RegionId::USR)) > 0.0 && rt.p(index_of(RegionId::LSR)) > 0.0,
              "p(LSR) " + fmt(rt.p(0), 3) + " p(USR) " + fmt(rt.p(1), 3));

    const auto half = simulate(0.5);
    const auto half_mass = ultra_region_mass(make_store(half.result.records), profile);
    o.require(half_mass.usr < mass.usr, "half attempt rate USR share " + fmt(half_mass.usr, 3));
    o.require(full.seconds < 120.0 && half.seconds < 120.0,
              "runtime " + fmt(full.seconds, 3) + " s + " + fmt(half.seconds, 3) + " s");
}

void churn_signature(Outcome& o) {
    const auto store = make_store(baseline_run().result.records);
    const auto regions = classifier::regions_from(builtin_profile("limewire"));
    double departures = 0.0, change = 0.0;
    std::int64_t steps = 0, peers = 0;
    for (const auto& [peer, trace] : store.traces()) {
        const auto states = trace.states();
        const auto c = classifier::classify(classifier::trace_attributes(states, regions));
        if (c != classifier::TraceClass::StableUltra) continue;
        ++peers;
        for (const auto& s : churn::churn_steps(trace)) {
            departures += s.leaf_departures + s.ultra_departures;
            change += s.degree_change;
            ++steps;
        }
    }
    if (steps == 0) {
        o.require(false, "no stable-ultra steps");
        return;
    }
    const double mean_dep = departures / steps;
    const double mean_change = change / steps;
    o.require(mean_dep >= 2.0 * mean_change,
              std::to_string(peers) + " stable-ultra peers: departures " + fmt(mean_dep, 3) +
                  " vs degree change " + fmt(mean_change, 3) + " (ratio " +
                  fmt(mean_dep / std::max(mean_change, 1e-12), 3) + ")");
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--only N]\n");
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"region-chain equilibrium", region_equilibrium},
        {"lambda estimation", lambda_estimation},
        {"Erlang identity", erlang_identity},
        {"closed form vs null space", closed_form},
        {"BDTM enumeration and step convergence", bdtm_convergence},
        {"generator ergodicity", generator_ergodicity},
        {"classifier", classifier_recovery},
        {"churn estimators", churn_estimators},
        {"end-to-end simulation", end_to_end},
        {"connection vs degree churn", churn_signature},
    };
    if (only && (*only < 1 || *only > static_cast<int>(criteria.size()))) {
        std::fprintf(stderr, "no criterion %d\n", *only);
        return 2;
    }
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (only && *only != n) continue;
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failures;
        std::printf("criterion %2d %s: %s (%s)\n", n, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
