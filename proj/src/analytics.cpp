#include "overlay_phase/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "overlay_phase/markov.hpp"

namespace overlay_phase::analytics {

IntensityGrid::IntensityGrid(int max_leaf, int max_ultra)
    : max_leaf_(max_leaf),
      max_ultra_(max_ultra),
      counts_(static_cast<std::size_t>(max_leaf + 1) * static_cast<std::size_t>(max_ultra + 1), 0) {}

void IntensityGrid::add(PhaseState s, std::int64_t n) {
    if (s.leaf > max_leaf_ || s.ultra > max_ultra_) {
        throw invariant_error("state outside intensity grid");
    }
    counts_[static_cast<std::size_t>(s.leaf) * (max_ultra_ + 1) + s.ultra] += n;
    total_ += n;
}

std::int64_t IntensityGrid::at(PhaseState s) const {
    if (s.leaf > max_leaf_ || s.ultra > max_ultra_) return 0;
    return counts_[static_cast<std::size_t>(s.leaf) * (max_ultra_ + 1) + s.ultra];
}

double IntensityGrid::value(PhaseState s, GridTransform transform) const {
    const double v = static_cast<double>(at(s));
    return transform == GridTransform::FourthRoot ? std::pow(v, 0.25) : v;
}

IntensityGrid intensity(std::span<const PhaseState> states) {
    int max_leaf = 0;
    int max_ultra = 0;
    for (auto s : states) {
        max_leaf = std::max(max_leaf, s.leaf);
        max_ultra = std::max(max_ultra, s.ultra);
    }
    IntensityGrid grid(max_leaf, max_ultra);
    for (auto s : states) grid.add(s);
    return grid;
}

IntensityGrid intensity(const TraceStore& store) {
    std::vector<PhaseState> states;
    states.reserve(store.record_count());
    for (const auto& [peer, trace] : store.traces()) {
        for (const auto& r : trace.records()) states.push_back(r.state());
    }
    return intensity(states);
}

TransitionPairSet transition_pairs(std::span<const PhaseState> trace) {
    TransitionPairSet pairs;
    for (std::size_t i = 1; i < trace.size(); ++i) pairs.push_back({trace[i - 1], trace[i]});
    return pairs;
}

TransitionPairSet transition_pairs(const PeerTrace& trace) {
    const auto states = trace.states();
    return transition_pairs(states);
}

TransitionPairSet transition_pairs(const TraceStore& store) {
    TransitionPairSet pairs;
    for (const auto& [peer, trace] : store.traces()) {
        auto p = transition_pairs(trace);
        pairs.insert(pairs.end(), p.begin(), p.end());
    }
    return pairs;
}

Cell cell_of(PhaseState s, int group) { return {s.leaf / group, s.ultra / group}; }

namespace {

void check_group(int group) {
    if (group != 1 && group != 2) throw input_error("group must be 1 or 2");
}

}  // namespace

StreamField stream_field(const TransitionPairSet& pairs, int group, std::int64_t min_support) {
    check_group(group);
    StreamField field;
    for (const auto& [from, to] : pairs) {
        auto& v = field[cell_of(from, group)];
        v.dx += to.leaf - from.leaf;
        v.dy += to.ultra - from.ultra;
        ++v.support;
    }
    for (auto it = field.begin(); it != field.end();) {
        if (it->second.support < min_support) {
            it = field.erase(it);
            continue;
        }
        it->second.dx /= static_cast<double>(it->second.support);
        it->second.dy /= static_cast<double>(it->second.support);
        ++it;
    }
    return field;
}

namespace {

FieldArrow arrow(Cell origin, Cell target) {
    FieldArrow a;
    a.dx = kShrinkFactor * (target.leaf - origin.leaf);
    a.dy = kShrinkFactor * (target.ultra - origin.ultra);
    a.length = std::hypot(a.dx, a.dy);
    return a;
}

}  // namespace

ArrowField outgoing_field(const TransitionPairSet& pairs, int group) {
    check_group(group);
    ArrowField field;
    for (const auto& [from, to] : pairs) {
        const Cell a = cell_of(from, group);
        field[a].push_back(arrow(a, cell_of(to, group)));
    }
    return field;
}

ArrowField incoming_field(const TransitionPairSet& pairs, int group) {
    check_group(group);
    ArrowField field;
    for (const auto& [from, to] : pairs) {
        const Cell b = cell_of(to, group);
        field[b].push_back(arrow(b, cell_of(from, group)));
    }
    return field;
}

std::map<PhaseState, double> stationary_probability(const TransitionPairSet& pairs) {
    std::map<PhaseState, std::pair<std::int64_t, std::int64_t>> tally;  // (self, all)
    for (const auto& [from, to] : pairs) {
        auto& t = tally[from];
        t.first += from == to ? 1 : 0;
        ++t.second;
    }
    std::map<PhaseState, double> out;
    for (const auto& [s, t] : tally) {
        out.emplace(s, static_cast<double>(t.first) / static_cast<double>(t.second));
    }
    return out;
}

std::optional<RegionId> region_of(PhaseState s, const SoftwareProfile& profile) {
    // Ordinal order doubles as the tie-break for shared boundaries.
    for (RegionId id : kRegions) {
        if (profile.region(id).contains(s)) return id;
    }
    return std::nullopt;
}

RegionTransferResult region_transfer_matrix(const TransitionPairSet& pairs,
                                            const SoftwareProfile& profile) {
    RegionTransferResult result;
    Eigen::Matrix4d counts = Eigen::Matrix4d::Zero();
    Eigen::Vector4d endpoints = Eigen::Vector4d::Zero();
    for (const auto& [from, to] : pairs) {
        const auto a = region_of(from, profile);
        const auto b = region_of(to, profile);
        if (!a || !b) {
            ++result.excluded_pairs;
            continue;
        }
        counts(index_of(*b), index_of(*a)) += 1.0;
        endpoints(index_of(*a)) += 1.0;
        endpoints(index_of(*b)) += 1.0;
    }
    const double total = endpoints.sum();
    if (total == 0.0) throw input_error("no transition pair has both endpoints inside a region");

    for (int j = 0; j < 4; ++j) {
        const double column = counts.col(j).sum();
        result.outgoing[j] = static_cast<std::int64_t>(column);
        if (column == 0.0) {
            result.g.col(j) = Eigen::Vector4d::Unit(j);
            result.empty_columns.push_back(kRegions[j]);
        } else {
            result.g.col(j) = counts.col(j) / column;
        }
    }
    result.p = endpoints / total;
    return result;
}

RegionDistribution equilibrium(const RegionTransferMatrix& g, double tolerance) {
    return markov::stationary(g, tolerance);
}

}  // namespace overlay_phase::analytics
