#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "overlay_phase/core.hpp"
#include "overlay_phase/ingest.hpp"

namespace overlay_phase::analytics {

enum class GridTransform { Linear, FourthRoot };

/// Occupancy counts over the (d_l, d_u) lattice, sized to the observed maximum.
class IntensityGrid {
public:
    IntensityGrid() = default;
    IntensityGrid(int max_leaf, int max_ultra);

    void add(PhaseState s, std::int64_t n = 1);
    std::int64_t at(PhaseState s) const;
    std::int64_t total() const { return total_; }
    int max_leaf() const { return max_leaf_; }
    int max_ultra() const { return max_ultra_; }
    /// Display value of a cell; the fourth root only flattens the dynamic range.
    double value(PhaseState s, GridTransform transform) const;

private:
    int max_leaf_ = -1;
    int max_ultra_ = -1;
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

IntensityGrid intensity(std::span<const PhaseState> states);
IntensityGrid intensity(const TraceStore& store);

struct TransitionPair {
    PhaseState from;
    PhaseState to;
    friend bool operator==(const TransitionPair&, const TransitionPair&) = default;
};
using TransitionPairSet = std::vector<TransitionPair>;

/// Consecutive-response pairs of one trace; fewer than two records yields none.
TransitionPairSet transition_pairs(std::span<const PhaseState> trace);
TransitionPairSet transition_pairs(const PeerTrace& trace);
TransitionPairSet transition_pairs(const TraceStore& store);

/// Lattice cell, optionally 2x2-grouped: (d_l / group, d_u / group).
struct Cell {
    int leaf = 0;
    int ultra = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};
Cell cell_of(PhaseState s, int group);

struct StreamVector {
    double dx = 0.0;  // mean leaf displacement
    double dy = 0.0;  // mean ultra displacement
    std::int64_t support = 0;
};
using StreamField = std::map<Cell, StreamVector>;

/// Mean displacement of pairs starting in each cell; cells with fewer than
/// `min_support` pairs are omitted. Throws Input error unless group is 1 or 2.
StreamField stream_field(const TransitionPairSet& pairs, int group, std::int64_t min_support);

inline constexpr double kShrinkFactor = 0.4;

struct FieldArrow {
    double dx = 0.0;  // shrunk displacement, in cell units
    double dy = 0.0;
    double length = 0.0;
};
using ArrowField = std::map<Cell, std::vector<FieldArrow>>;

/// Outgoing arrows are keyed by the starting cell and point at the end cell.
ArrowField outgoing_field(const TransitionPairSet& pairs, int group);
/// Incoming arrows are keyed by the end cell and point back at the start cell.
ArrowField incoming_field(const TransitionPairSet& pairs, int group);

/// P(to = s | from = s) for every state with at least one outgoing pair.
std::map<PhaseState, double> stationary_probability(const TransitionPairSet& pairs);

std::optional<RegionId> region_of(PhaseState s, const SoftwareProfile& profile);

using RegionTransferMatrix = Eigen::Matrix4d;  // column j: P(next = i | current = j)
using RegionDistribution = Eigen::Vector4d;

struct RegionTransferResult {
    RegionTransferMatrix g;
    RegionDistribution p;
    std::array<std::int64_t, 4> outgoing{};  // pairs leaving each region (column support)
    std::int64_t excluded_pairs = 0;           // pairs with an endpoint outside all regions
    std::vector<RegionId> empty_columns;       // set to identity for lack of data
};

/// Region-level transfer statistics. Throws Input error if no pair has both
/// endpoints inside regions.
RegionTransferResult region_transfer_matrix(const TransitionPairSet& pairs,
                                            const SoftwareProfile& profile);

/// Stationary distribution h with G h = h. The printed 4-decimal matrices have
/// column sums off by ~1e-4, hence the default tolerance. Throws Model error
/// for a reducible chain.
RegionDistribution equilibrium(const RegionTransferMatrix& g, double tolerance = 1e-3);

}  // namespace overlay_phase::analytics
