#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "overlay_phase/core.hpp"
#include "overlay_phase/queue.hpp"
#include "overlay_phase/rng.hpp"

namespace overlay_phase::tracegen {

enum class Model { Ctdm, Bdtm };
Model parse_model(const std::string& name);

struct GenConfig {
    Model model = Model::Ctdm;
    queue::QueueParams leaf;
    queue::QueueParams ultra;
    PhaseState x0;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    std::int64_t interval_seconds = 1800;

    /// Throws Input error when x0 is outside 0..B_l x L_u..B_u or steps < 0.
    void validate() const;
};

/// Column-wise cumulative sums: C(i, j) = sum_{k <= i} T(k, j).
Eigen::MatrixXd cumulative(const Eigen::MatrixXd& t);

/// Index k with C(k-1, j) <= r < C(k, j), taking C(-1, j) = 0.
int ctdm_step(const Eigen::MatrixXd& c, int current, double r);

/// One binomial-thinning step: Poisson(lambda) arrivals, one uniform draw per
/// current connection dropping it when <= mu, then clamping to [floor, cap].
struct BdtmMove {
    int next = 0;
    int arrivals = 0;  // admitted, after clamping
    int drops = 0;
};
BdtmMove bdtm_move(int degree, const queue::QueueParams& params, Rng& rng);
int bdtm_step(int degree, const queue::QueueParams& params, Rng& rng);

struct GeneratedStep {
    std::int64_t t = 0;
    PhaseState state;
    // Connection turnover behind the degree change. The CTDM presentation
    // hides departures, so only net changes are recorded for it.
    int leaf_arrivals = 0;
    int leaf_drops = 0;
    int ultra_arrivals = 0;
    int ultra_drops = 0;
};

/// n+1 states starting at x0. Trace `index` selects the RNG substreams.
std::vector<GeneratedStep> generate(const GenConfig& config, std::uint64_t index = 0);

/// Traces 0..count-1, optionally on several threads; output does not depend
/// on the thread count.
std::vector<std::vector<GeneratedStep>> generate_many(const GenConfig& config, std::size_t count,
                                                      unsigned threads = 1);

/// Ultra-mode crawl records with synthetic neighbor identities: fresh ids for
/// arrivals, uniformly chosen victims for drops.
std::vector<CrawlRecord> to_records(const std::vector<GeneratedStep>& trace,
                                    const std::string& peer_id, const std::string& software,
                                    Rng& rng);

}  // namespace overlay_phase::tracegen
