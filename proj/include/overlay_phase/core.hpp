#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace overlay_phase {

/// Error categories map onto CLI exit codes (2 input, 3 model, 4 invariant,
/// 5 empty input).
enum class ErrorKind { Input, Model, Invariant, EmptyInput };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return {ErrorKind::Input, what}; }
inline Error model_error(const std::string& what) { return {ErrorKind::Model, what}; }
inline Error invariant_error(const std::string& what) { return {ErrorKind::Invariant, what}; }
inline Error empty_input_error(const std::string& what) { return {ErrorKind::EmptyInput, what}; }

inline constexpr int kDegreeCap = 128;

/// A point (d_l, d_u) of the leaf-degree x ultra-degree lattice.
struct PhaseState {
    int leaf = 0;
    int ultra = 0;

    constexpr PhaseState() = default;
    /// Throws Input error when a coordinate is negative or above the cap.
    PhaseState(int leaf_degree, int ultra_degree, int cap = kDegreeCap);

    friend constexpr bool operator==(const PhaseState&, const PhaseState&) = default;
    friend constexpr auto operator<=>(const PhaseState&, const PhaseState&) = default;
};

enum class PeerMode { Leaf, Ultra, Unknown };

std::string_view to_string(PeerMode mode);
/// Accepts "leaf", "ultra", "unknown"; throws Input error otherwise.
PeerMode parse_mode(std::string_view text);

/// One crawl response. Neighbor sets are kept sorted and unique.
class CrawlRecord {
public:
    CrawlRecord(std::string peer_id, std::int64_t t, PeerMode mode, std::string software,
                std::vector<std::string> leaf_neighbors,
                std::vector<std::string> ultra_neighbors);

    const std::string& peer_id() const { return peer_id_; }
    std::int64_t t() const { return t_; }
    PeerMode mode() const { return mode_; }
    const std::string& software() const { return software_; }
    const std::vector<std::string>& leaf_neighbors() const { return leaves_; }
    const std::vector<std::string>& ultra_neighbors() const { return ultras_; }
    PhaseState state() const { return state_; }

    friend bool operator==(const CrawlRecord&, const CrawlRecord&) = default;

private:
    std::string peer_id_;
    std::int64_t t_;
    PeerMode mode_;
    std::string software_;
    std::vector<std::string> leaves_;
    std::vector<std::string> ultras_;
    PhaseState state_;
};

PhaseState state_of(const CrawlRecord& record);

/// Time-ordered records of one peer.
class PeerTrace {
public:
    PeerTrace(std::string peer_id, std::vector<CrawlRecord> records);

    const std::string& peer_id() const { return peer_id_; }
    const std::vector<CrawlRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    std::vector<PhaseState> states() const;

private:
    std::string peer_id_;
    std::vector<CrawlRecord> records_;
};

enum class RegionId { LSR = 0, USR = 1, TB = 2, UDR = 3 };
inline constexpr std::array<RegionId, 4> kRegions{RegionId::LSR, RegionId::USR, RegionId::TB,
                                                  RegionId::UDR};
std::string_view to_string(RegionId id);
constexpr std::size_t index_of(RegionId id) { return static_cast<std::size_t>(id); }

/// Closed integer rectangle [leaf_lo, leaf_hi] x [ultra_lo, ultra_hi].
struct Rect {
    int leaf_lo = 0;
    int leaf_hi = 0;
    int ultra_lo = 0;
    int ultra_hi = 0;

    bool contains(PhaseState s) const {
        return s.leaf >= leaf_lo && s.leaf <= leaf_hi && s.ultra >= ultra_lo &&
               s.ultra <= ultra_hi;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// True when the closed rectangles share a cell that is interior to both.
/// Rectangles that only touch along a boundary line do not overlap.
bool interiors_overlap(const Rect& a, const Rect& b);

struct QueueLimits {
    int leaf_max = 30;       // B_l
    int ultra_max = 32;      // B_u
    int ultra_active = 20;   // L_u, active-connect threshold

    void validate() const;
    friend bool operator==(const QueueLimits&, const QueueLimits&) = default;
};

struct SoftwareProfile {
    std::string name;
    PhaseState leaf_stable_point;
    PhaseState ultra_stable_point;
    int belt_lo = 0;
    int belt_hi = 0;
    std::array<Rect, 4> regions;  // indexed by RegionId
    QueueLimits limits;
    double leaf_radius = 10.0;   // classifier disk around the leaf stable point
    double ultra_radius = 10.0;  // classifier disk around the ultra stable point

    const Rect& region(RegionId id) const { return regions[index_of(id)]; }
    /// Throws Input error on belt order, overlapping rectangles or misplaced stable points.
    void validate() const;
};

}  // namespace overlay_phase
