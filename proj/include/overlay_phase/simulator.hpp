#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "overlay_phase/core.hpp"
#include "overlay_phase/rng.hpp"

namespace overlay_phase::sim {

/// Mode-switch policy. The promotion decision procedure of real clients is
/// unknown, so promotion is a constant hazard; swap this struct's values (or
/// the Overlay::mode_rules hook) to try other policies.
struct ModePolicy {
    double promotion_rate = 0.01;   // leaf -> ultra, per hour
    double kickout_rate = 0.005;    // ultra drops almost everything and becomes a leaf, per hour
    int core_threshold = 10;        // ultra demotes when d_u stays below this after active connecting
};

struct SimConfig {
    std::size_t peers = 1000;              // crawled population
    double leaves_per_ultra = 14.0;        // alive leaves per alive ultra, topped up with uncrawled ones
    QueueLimits ultra_limits{30, 32, 20};  // B_l, B_u, L_u of ultra-mode peers
    int leaf_max_ultra = 3;                // leaf-mode cap on ultra connections
    int leaf_target_ultra = 2;             // leaf-mode active-connect target

    double leaf_connection_hours = 2.4;    // mean life of a leaf-ultra connection
    double ultra_connection_hours = 3.1;   // mean life of an ultra-ultra connection

    bool peer_churn = true;
    double ultra_peer_hours = 11.23;       // mean session of an ultra-mode peer
    double leaf_peer_hours = 7.8;          // mean session of a leaf-mode peer
    double offline_hours = 4.0;            // mean gap before a departed peer rejoins

    double leaf_attempt_rate = 0.1;        // passive proposals per leaf per hour
    double ultra_attempt_rate = 16.0;      // passive proposals per ultra per hour
    double attempt_scale = 1.0;            // multiplies both proposal rates
    double active_retry_rate = 2.0;        // retries per hour of a starved active connector

    ModePolicy policy;
    double initial_ultra_fraction = 0.5;

    std::int64_t crawl_interval = 1800;    // seconds
    double warmup_hours = 6.0;             // simulated before the first crawl
    double duration_hours = 23.0;          // crawl window
    std::uint64_t seed = 1;
    std::string software = "limewire-4.x";
    bool check_invariants = false;         // verify edge symmetry and caps at every crawl

    /// Throws Input error for negative rates, N < 2, or bad limits.
    void validate() const;
};

enum class SlotType { Leaf, Ultra };

enum class AdmitResult {
    Accepted,
    NoFreeSlot,
    TargetDeparted,
    InitiatorDeparted,
    AlreadyConnected,
    SelfConnection,
    WrongTargetMode,
};

enum class EventKind { ConnectAttempt = 0, ConnectionDrop, PeerJoin, PeerLeave, ModeSwitch, CrawlTick };

struct ModeSwitch {
    int peer = -1;
    PeerMode to = PeerMode::Leaf;
    bool kickout = false;
};

struct Peer {
    std::string id;
    bool crawled = true;
    bool alive = true;
    PeerMode mode = PeerMode::Leaf;
    std::vector<int> leaves;  // connections occupying this peer's leaf slots
    std::vector<int> ultras;  // connections to ultra peers
    bool starved = false;     // last active-connect pass ran out of candidates
    bool ever_ultra = false;
    std::uint64_t life_epoch = 0;
    std::uint64_t mode_epoch = 0;
};

struct SimStats {
    std::int64_t accepts = 0;
    std::int64_t drops = 0;              // every removed edge, whatever the cause
    std::int64_t lifetime_drops = 0;
    std::int64_t swap_drops = 0;
    std::int64_t churn_drops = 0;        // edges lost to departures and mode switches
    std::int64_t leaf_slot_attempts = 0; // proposals and active connects aimed at ultra leaf slots
    std::int64_t leaf_slot_rejects = 0;
    std::int64_t ultra_slot_attempts = 0;
    std::int64_t ultra_slot_rejects = 0;
    std::int64_t leaf_slot_departures = 0;  // leaf-slot edges ending while their ultra lives on
    std::int64_t promotions = 0;
    std::int64_t demotions = 0;
    std::int64_t kickouts = 0;
    std::int64_t starvations = 0;
    double ultra_hours = 0.0;            // integral of alive ultra count (crawled population)
    double leaf_connection_hours = 0.0;  // integral of leaf-slot occupancy over those ultras

    /// Leaf-slot attempts per ultra per crawl interval.
    double effective_leaf_lambda(double interval_hours) const;
    /// Leaf-slot departures per occupied slot per crawl interval.
    double effective_leaf_mu(double interval_hours) const;
};

/// Overlay state: peers, symmetric edges, and the slot rules.
class Overlay {
public:
    Overlay(const SimConfig& config, Rng& rng);

    int add_peer(std::string id, PeerMode mode, bool crawled);
    const Peer& peer(int index) const { return peers_[index]; }
    std::size_t size() const { return peers_.size(); }
    const SimStats& stats() const { return stats_; }
    SimStats& stats() { return stats_; }

    /// Admission by free slot at `target`. A leaf initiator requests a leaf
    /// slot, an ultra initiator an ultra slot. An initiator already at its
    /// target (leaf) or cap (ultra) swaps out one of its existing connections.
    AdmitResult admit(int initiator, int target, double now);

    /// Ultra below L_u connects to uniformly sampled ultras with free slots
    /// until it reaches L_u or runs out of candidates. Leaves do the same up
    /// to their target. Returns the number of attempts issued.
    int step_active_connect(int peer, double now);

    /// Demotion check for an ultra after an active-connect pass.
    std::optional<ModeSwitch> mode_rules(int peer) const;

    void apply_switch(const ModeSwitch& change, double now);
    /// Departure drops every connection; a rejoining peer keeps its last mode.
    void set_alive(int peer, bool alive, double now);
    /// Removes the edge if it still exists with the given id.
    bool drop_edge(int a, int b, std::uint64_t edge_id, double now);
    /// Removes all connections of `peer`.
    void disconnect_all(int peer, double now);

    std::size_t live_edges() const { return edges_.size(); }
    const std::vector<int>& alive_ultras() const { return ultras_; }
    const std::vector<int>& alive_leaves() const { return leaves_; }
    /// Throws Invariant error on asymmetric edges or exceeded slot caps.
    void check_invariants() const;
    /// Leaf/ultra degree of an alive peer.
    PhaseState state(int peer) const;

    /// True when the peer is alive and below its active-connect target.
    bool needs_active(int peer) const;
    /// Peers that lost a connection or changed mode since the last call.
    std::vector<int> take_touched();

    /// Edges created since the last call; the simulator schedules their drops.
    struct NewEdge {
        int a;
        int b;
        std::uint64_t id;
        SlotType type;
    };
    std::vector<NewEdge> take_new_edges();

    /// Integrates occupancy statistics up to `now`.
    void advance(double now);

private:
    bool connected(int a, int b) const;
    void connect(int a, int b, SlotType type, double now);
    void disconnect(int a, int b, double now, bool slot_departure = true);
    int free_slots(int target, SlotType type) const;
    void set_mode(int peer, PeerMode mode);
    void unindex(int peer);
    void reindex(int peer);
    /// Uniformly sampled alive ultras that accept `peer` on a free slot, up to `need`.
    std::vector<int> candidates(int peer, SlotType type, int need);

    const SimConfig& config_;
    Rng& rng_;
    std::vector<Peer> peers_;
    struct EdgeRec {
        std::uint64_t id;
        SlotType type;
    };
    std::unordered_map<std::uint64_t, EdgeRec> edges_;
    std::uint64_t next_edge_ = 1;
    std::vector<NewEdge> new_edges_;
    std::vector<int> ultras_, ultra_pos_;
    std::vector<int> leaves_, leaf_pos_;
    std::vector<int> touched_;
    SimStats stats_;
    double last_advance_ = 0.0;
    long long leaf_edges_ = 0;
    std::int64_t total_accepts_ = 0;
    std::int64_t total_drops_ = 0;
};

struct SimResult {
    std::vector<CrawlRecord> records;
    SimStats stats;
    std::size_t ever_ultra = 0;  // crawled peers seen in ultra mode during the crawl window
};

/// Runs the event loop and returns crawl records in ingest order (by time,
/// then peer). Deterministic for a fixed config and seed.
SimResult run(const SimConfig& config);

/// Parses a simulator config from TOML; keys absent from the text keep their
/// value in `base`.
SimConfig parse_sim_config(const std::string& toml_text, SimConfig base = {});

}  // namespace overlay_phase::sim
