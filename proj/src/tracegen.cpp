#include "overlay_phase/tracegen.hpp"

#include <algorithm>
#include <thread>

namespace overlay_phase::tracegen {

Model parse_model(const std::string& name) {
    if (name == "ctdm") return Model::Ctdm;
    if (name == "bdtm") return Model::Bdtm;
    throw input_error("unknown model '" + name + "' (ctdm|bdtm)");
}

void GenConfig::validate() const {
    leaf.validate(model == Model::Bdtm);
    ultra.validate(model == Model::Bdtm);
    if (x0.leaf < leaf.floor() || x0.leaf > leaf.cap()) {
        throw input_error("initial leaf degree outside the legal range");
    }
    if (x0.ultra < ultra.floor() || x0.ultra > ultra.cap()) {
        throw input_error("initial ultra degree outside the legal range");
    }
    if (steps < 0) throw input_error("step count must be >= 0");
    if (interval_seconds <= 0) throw input_error("interval must be positive");
}

Eigen::MatrixXd cumulative(const Eigen::MatrixXd& t) {
    Eigen::MatrixXd c = t;
    for (Eigen::Index i = 1; i < c.rows(); ++i) c.row(i) += c.row(i - 1);
    return c;
}

int ctdm_step(const Eigen::MatrixXd& c, int current, double r) {
    const auto col = c.col(current);
    for (Eigen::Index k = 0; k < col.size(); ++k) {
        if (r < col(k)) return static_cast<int>(k);
    }
    // r at or above a top entry that rounded below 1: take the last state with mass.
    Eigen::Index k = col.size() - 1;
    while (k > 0 && col(k - 1) >= col(k)) --k;
    return static_cast<int>(k);
}

BdtmMove bdtm_move(int degree, const queue::QueueParams& params, Rng& rng) {
    const int arrivals = rng.poisson(params.lambda);
    int drops = 0;
    for (int i = 0; i < degree; ++i) {
        if (rng.uniform() <= params.mu) ++drops;
    }
    const int raw = degree + arrivals - drops;
    const int next = std::clamp(raw, params.floor(), params.cap());
    return {next, next - degree + drops, drops};
}

int bdtm_step(int degree, const queue::QueueParams& params, Rng& rng) {
    return bdtm_move(degree, params, rng).next;
}

std::vector<GeneratedStep> generate(const GenConfig& config, std::uint64_t index) {
    config.validate();
    std::vector<GeneratedStep> out;
    out.reserve(static_cast<std::size_t>(config.steps) + 1);
    out.push_back({0, config.x0});
    Rng leaf_rng(config.seed, 3 * index);
    Rng ultra_rng(config.seed, 3 * index + 1);

    int leaf = config.x0.leaf;
    int ultra = config.x0.ultra;
    if (config.model == Model::Ctdm) {
        const Eigen::MatrixXd cl = cumulative(queue::ctdm_transfer(config.leaf));
        const Eigen::MatrixXd cu = cumulative(queue::ctdm_transfer(config.ultra));
        const int floor_u = config.ultra.floor();
        for (std::int64_t s = 1; s <= config.steps; ++s) {
            const int next_leaf = ctdm_step(cl, leaf, leaf_rng.uniform());
            const int next_ultra = ctdm_step(cu, ultra - floor_u, ultra_rng.uniform()) + floor_u;
            GeneratedStep step{s * config.interval_seconds, PhaseState(next_leaf, next_ultra)};
            step.leaf_arrivals = std::max(0, next_leaf - leaf);
            step.leaf_drops = std::max(0, leaf - next_leaf);
            step.ultra_arrivals = std::max(0, next_ultra - ultra);
            step.ultra_drops = std::max(0, ultra - next_ultra);
            out.push_back(step);
            leaf = next_leaf;
            ultra = next_ultra;
        }
        return out;
    }
    for (std::int64_t s = 1; s <= config.steps; ++s) {
        const auto ml = bdtm_move(leaf, config.leaf, leaf_rng);
        const auto mu = bdtm_move(ultra, config.ultra, ultra_rng);
        GeneratedStep step{s * config.interval_seconds, PhaseState(ml.next, mu.next)};
        step.leaf_arrivals = ml.arrivals;
        step.leaf_drops = ml.drops;
        step.ultra_arrivals = mu.arrivals;
        step.ultra_drops = mu.drops;
        out.push_back(step);
        leaf = ml.next;
        ultra = mu.next;
    }
    return out;
}

std::vector<std::vector<GeneratedStep>> generate_many(const GenConfig& config, std::size_t count,
                                                      unsigned threads) {
    config.validate();
    std::vector<std::vector<GeneratedStep>> out(count);
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) out[i] = generate(config, i);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += threads) out[i] = generate(config, i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

namespace {

class NeighborSet {
public:
    explicit NeighborSet(std::string prefix) : prefix_(std::move(prefix)) {}

    void apply(int drops, int arrivals, Rng& rng) {
        for (int i = 0; i < drops && !ids_.empty(); ++i) {
            const std::size_t victim = rng.index(ids_.size());
            ids_[victim] = ids_.back();
            ids_.pop_back();
        }
        for (int i = 0; i < arrivals; ++i) ids_.push_back(prefix_ + std::to_string(next_++));
    }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::string prefix_;
    std::vector<std::string> ids_;
    std::uint64_t next_ = 0;
};

}  // namespace

std::vector<CrawlRecord> to_records(const std::vector<GeneratedStep>& trace,
                                    const std::string& peer_id, const std::string& software,
                                    Rng& rng) {
    std::vector<CrawlRecord> records;
    if (trace.empty()) return records;
    records.reserve(trace.size());
    NeighborSet leaves(peer_id + "-l");
    NeighborSet ultras(peer_id + "-u");
    leaves.apply(0, trace.front().state.leaf, rng);
    ultras.apply(0, trace.front().state.ultra, rng);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& step = trace[i];
        if (i > 0) {
            leaves.apply(step.leaf_drops, step.leaf_arrivals, rng);
            ultras.apply(step.ultra_drops, step.ultra_arrivals, rng);
        }
        if (static_cast<int>(leaves.ids().size()) != step.state.leaf ||
            static_cast<int>(ultras.ids().size()) != step.state.ultra) {
            throw invariant_error("synthetic neighbor sets out of step with the degree trace");
        }
        records.emplace_back(peer_id, step.t, PeerMode::Ultra, software, leaves.ids(), ultras.ids());
    }
    return records;
}

}  // namespace overlay_phase::tracegen
