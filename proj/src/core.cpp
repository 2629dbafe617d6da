#include "overlay_phase/core.hpp"

#include <algorithm>

namespace overlay_phase {

PhaseState::PhaseState(int leaf_degree, int ultra_degree, int cap)
    : leaf(leaf_degree), ultra(ultra_degree) {
    if (leaf < 0 || ultra < 0) {
        throw input_error("negative degree");
    }
    if (leaf > cap || ultra > cap) {
        throw input_error("degree cap exceeded");
    }
}

std::string_view to_string(PeerMode mode) {
    switch (mode) {
        case PeerMode::Leaf: return "leaf";
        case PeerMode::Ultra: return "ultra";
        case PeerMode::Unknown: return "unknown";
    }
    return "unknown";
}

PeerMode parse_mode(std::string_view text) {
    if (text == "leaf") return PeerMode::Leaf;
    if (text == "ultra") return PeerMode::Ultra;
    if (text == "unknown") return PeerMode::Unknown;
    throw input_error("unknown mode '" + std::string(text) + "'");
}

namespace {

std::vector<std::string> normalize_set(std::vector<std::string> ids, const char* which) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw input_error(std::string("duplicate id in ") + which + " neighbors");
    }
    return ids;
}

}  // namespace

CrawlRecord::CrawlRecord(std::string peer_id, std::int64_t t, PeerMode mode,
                         std::string software, std::vector<std::string> leaf_neighbors,
                         std::vector<std::string> ultra_neighbors)
    : peer_id_(std::move(peer_id)),
      t_(t),
      mode_(mode),
      software_(std::move(software)),
      leaves_(normalize_set(std::move(leaf_neighbors), "leaf")),
      ultras_(normalize_set(std::move(ultra_neighbors), "ultra")) {
    if (peer_id_.empty()) {
        throw input_error("empty peer id");
    }
    state_ = PhaseState(static_cast<int>(std::min<std::size_t>(leaves_.size(), kDegreeCap + 1)),
                        static_cast<int>(std::min<std::size_t>(ultras_.size(), kDegreeCap + 1)));
    std::vector<std::string> common;
    std::set_intersection(leaves_.begin(), leaves_.end(), ultras_.begin(), ultras_.end(),
                          std::back_inserter(common));
    if (!common.empty()) {
        throw input_error("leaf and ultra neighbor sets overlap ('" + common.front() + "')");
    }
    if (std::binary_search(leaves_.begin(), leaves_.end(), peer_id_) ||
        std::binary_search(ultras_.begin(), ultras_.end(), peer_id_)) {
        throw input_error("self-loop on peer '" + peer_id_ + "'");
    }
}

PhaseState state_of(const CrawlRecord& record) { return record.state(); }

PeerTrace::PeerTrace(std::string peer_id, std::vector<CrawlRecord> records)
    : peer_id_(std::move(peer_id)), records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].peer_id() != peer_id_) {
            throw input_error("record of '" + records_[i].peer_id() + "' in trace of '" +
                              peer_id_ + "'");
        }
        if (i > 0 && records_[i].t() <= records_[i - 1].t()) {
            throw input_error("trace of '" + peer_id_ + "' not strictly increasing in t");
        }
    }
}

std::vector<PhaseState> PeerTrace::states() const {
    std::vector<PhaseState> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.state());
    return out;
}

std::string_view to_string(RegionId id) {
    switch (id) {
        case RegionId::LSR: return "LSR";
        case RegionId::USR: return "USR";
        case RegionId::TB: return "TB";
        case RegionId::UDR: return "UDR";
    }
    return "?";
}

bool interiors_overlap(const Rect& a, const Rect& b) {
    const int l0 = std::max(a.leaf_lo, b.leaf_lo);
    const int l1 = std::min(a.leaf_hi, b.leaf_hi);
    const int u0 = std::max(a.ultra_lo, b.ultra_lo);
    const int u1 = std::min(a.ultra_hi, b.ultra_hi);
    return l1 > l0 && u1 > u0;
}

void QueueLimits::validate() const {
    if (leaf_max <= 0) throw input_error("B_l must be positive");
    if (ultra_active < 0 || ultra_active >= ultra_max) {
        throw input_error("need 0 <= L_u < B_u");
    }
}

void SoftwareProfile::validate() const {
    if (belt_lo > belt_hi) throw input_error("profile " + name + ": belt_lo > belt_hi");
    for (const auto& r : regions) {
        if (r.leaf_lo > r.leaf_hi || r.ultra_lo > r.ultra_hi) {
            throw input_error("profile " + name + ": empty region rectangle");
        }
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            if (interiors_overlap(regions[i], regions[j])) {
                throw input_error("profile " + name + ": regions " +
                                  std::string(to_string(kRegions[i])) + " and " +
                                  std::string(to_string(kRegions[j])) + " overlap");
            }
        }
    }
    if (!region(RegionId::LSR).contains(leaf_stable_point)) {
        throw input_error("profile " + name + ": leaf stable point outside LSR");
    }
    if (!region(RegionId::USR).contains(ultra_stable_point)) {
        throw input_error("profile " + name + ": ultra stable point outside USR");
    }
    limits.validate();
}

}  // namespace overlay_phase
