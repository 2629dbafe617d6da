#include "overlay_phase/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

#include <toml.hpp>

namespace overlay_phase::sim {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

void erase_value(std::vector<int>& v, int x) {
    auto it = std::find(v.begin(), v.end(), x);
    if (it != v.end()) {
        *it = v.back();
        v.pop_back();
    }
}

bool has_value(const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

void require(bool ok, const std::string& what) {
    if (!ok) throw input_error("simulator config: " + what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void SimConfig::validate() const {
    require(peers >= 2, "need at least 2 crawled peers");
    ultra_limits.validate();
    require(leaf_target_ultra >= 1 && leaf_target_ultra <= leaf_max_ultra,
            "need 1 <= leaf_target_ultra <= leaf_max_ultra");
    require(positive(leaf_connection_hours) && positive(ultra_connection_hours),
            "connection lifetimes must be positive");
    require(positive(ultra_peer_hours) && positive(leaf_peer_hours) && positive(offline_hours),
            "peer lifetimes must be positive");
    require(nonnegative(leaf_attempt_rate) && nonnegative(ultra_attempt_rate) &&
                nonnegative(attempt_scale) && nonnegative(active_retry_rate),
            "attempt rates must be non-negative");
    require(nonnegative(policy.promotion_rate) && nonnegative(policy.kickout_rate),
            "mode-switch rates must be non-negative");
    require(policy.core_threshold >= 0 && policy.core_threshold <= ultra_limits.ultra_active,
            "need 0 <= core_threshold <= L_u");
    require(nonnegative(leaves_per_ultra), "leaves_per_ultra must be non-negative");
    require(initial_ultra_fraction >= 0.0 && initial_ultra_fraction <= 1.0,
            "initial_ultra_fraction must lie in [0, 1]");
    require(crawl_interval > 0, "crawl_interval must be positive");
    require(nonnegative(warmup_hours) && nonnegative(duration_hours),
            "warmup and duration must be non-negative");
}

double SimStats::effective_leaf_lambda(double interval_hours) const {
    return ultra_hours > 0.0 ? leaf_slot_attempts / ultra_hours * interval_hours : 0.0;
}

double SimStats::effective_leaf_mu(double interval_hours) const {
    return leaf_connection_hours > 0.0
               ? leaf_slot_departures / leaf_connection_hours * interval_hours
               : 0.0;
}

// ---------------------------------------------------------------- Overlay

Overlay::Overlay(const SimConfig& config, Rng& rng) : config_(config), rng_(rng) {}

int Overlay::add_peer(std::string id, PeerMode mode, bool crawled) {
    if (mode == PeerMode::Unknown) throw input_error("simulated peers need a mode");
    Peer p;
    p.id = std::move(id);
    p.crawled = crawled;
    p.mode = mode;
    p.ever_ultra = mode == PeerMode::Ultra;
    peers_.push_back(std::move(p));
    ultra_pos_.push_back(-1);
    leaf_pos_.push_back(-1);
    const int index = static_cast<int>(peers_.size()) - 1;
    reindex(index);
    return index;
}

void Overlay::unindex(int peer) {
    auto drop = [peer](std::vector<int>& list, std::vector<int>& pos) {
        const int at = pos[peer];
        if (at < 0) return;
        const int last = list.back();
        list[at] = last;
        pos[last] = at;
        list.pop_back();
        pos[peer] = -1;
    };
    drop(ultras_, ultra_pos_);
    drop(leaves_, leaf_pos_);
}

void Overlay::reindex(int peer) {
    unindex(peer);
    const Peer& p = peers_[peer];
    if (!p.alive) return;
    auto& list = p.mode == PeerMode::Ultra ? ultras_ : leaves_;
    auto& pos = p.mode == PeerMode::Ultra ? ultra_pos_ : leaf_pos_;
    pos[peer] = static_cast<int>(list.size());
    list.push_back(peer);
}

void Overlay::advance(double now) {
    if (now > last_advance_) {
        const double dt = now - last_advance_;
        stats_.ultra_hours += dt * static_cast<double>(ultras_.size());
        stats_.leaf_connection_hours += dt * static_cast<double>(leaf_edges_);
        last_advance_ = now;
    }
}

bool Overlay::connected(int a, int b) const { return edges_.count(edge_key(a, b)) != 0; }

int Overlay::free_slots(int target, SlotType type) const {
    const Peer& t = peers_[target];
    if (type == SlotType::Leaf) {
        return config_.ultra_limits.leaf_max - static_cast<int>(t.leaves.size());
    }
    return config_.ultra_limits.ultra_max - static_cast<int>(t.ultras.size());
}

void Overlay::connect(int a, int b, SlotType type, double now) {
    advance(now);
    const std::uint64_t id = next_edge_++;
    edges_.emplace(edge_key(a, b), EdgeRec{id, type});
    if (type == SlotType::Leaf) {
        peers_[b].leaves.push_back(a);
        peers_[a].ultras.push_back(b);
        ++leaf_edges_;
    } else {
        peers_[a].ultras.push_back(b);
        peers_[b].ultras.push_back(a);
    }
    new_edges_.push_back({a, b, id, type});
    ++stats_.accepts;
    ++total_accepts_;
}

void Overlay::disconnect(int a, int b, double now, bool slot_departure) {
    advance(now);
    auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end()) return;
    if (it->second.type == SlotType::Leaf) {
        // One endpoint holds the other in a leaf slot.
        const bool a_holds = has_value(peers_[a].leaves, b);
        const int ultra = a_holds ? a : b;
        const int leaf = a_holds ? b : a;
        erase_value(peers_[ultra].leaves, leaf);
        erase_value(peers_[leaf].ultras, ultra);
        --leaf_edges_;
        if (slot_departure) ++stats_.leaf_slot_departures;
    } else {
        erase_value(peers_[a].ultras, b);
        erase_value(peers_[b].ultras, a);
    }
    edges_.erase(it);
    ++stats_.drops;
    ++total_drops_;
    touched_.push_back(a);
    touched_.push_back(b);
}

AdmitResult Overlay::admit(int initiator, int target, double now) {
    if (initiator == target) return AdmitResult::SelfConnection;
    Peer& from = peers_[initiator];
    if (!from.alive) return AdmitResult::InitiatorDeparted;
    if (!peers_[target].alive) return AdmitResult::TargetDeparted;
    if (peers_[target].mode != PeerMode::Ultra) return AdmitResult::WrongTargetMode;
    if (connected(initiator, target)) return AdmitResult::AlreadyConnected;

    const SlotType type = from.mode == PeerMode::Ultra ? SlotType::Ultra : SlotType::Leaf;
    if (type == SlotType::Leaf) {
        ++stats_.leaf_slot_attempts;
    } else {
        ++stats_.ultra_slot_attempts;
    }
    if (free_slots(target, type) <= 0) {
        if (type == SlotType::Leaf) {
            ++stats_.leaf_slot_rejects;
        } else {
            ++stats_.ultra_slot_rejects;
        }
        return AdmitResult::NoFreeSlot;
    }
    // A satisfied initiator trades an old connection for the new one.
    const int full = type == SlotType::Leaf ? config_.leaf_target_ultra
                                            : config_.ultra_limits.ultra_max;
    if (static_cast<int>(from.ultras.size()) >= full) {
        const int victim = from.ultras[rng_.index(from.ultras.size())];
        disconnect(initiator, victim, now);
        ++stats_.swap_drops;
    }
    connect(initiator, target, type, now);
    return AdmitResult::Accepted;
}

std::vector<int> Overlay::candidates(int peer, SlotType type, int need) {
    std::vector<int> chosen;
    if (need <= 0 || ultras_.empty()) return chosen;
    auto& attempts = type == SlotType::Leaf ? stats_.leaf_slot_attempts : stats_.ultra_slot_attempts;
    auto& rejects = type == SlotType::Leaf ? stats_.leaf_slot_rejects : stats_.ultra_slot_rejects;
    auto reachable = [&](int c) { return c != peer && !connected(peer, c) && !has_value(chosen, c); };
    // Probe uniformly random ultras like a real client dialing its host
    // cache; full ones reject. Each probe counts as a slot attempt.
    const int probes = 8 * need + 16;
    for (int i = 0; i < probes && static_cast<int>(chosen.size()) < need; ++i) {
        const int c = ultras_[rng_.index(ultras_.size())];
        if (!reachable(c)) continue;
        ++attempts;
        if (free_slots(c, type) > 0) {
            chosen.push_back(c);
        } else {
            ++rejects;
        }
    }
    if (static_cast<int>(chosen.size()) < need) {
        // Few free slots left: fall back to an exhaustive search.
        std::vector<int> pool;
        for (int c : ultras_) {
            if (reachable(c) && free_slots(c, type) > 0) pool.push_back(c);
        }
        for (std::size_t i = 0; i < pool.size() && static_cast<int>(chosen.size()) < need; ++i) {
            const std::size_t j = i + rng_.index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            chosen.push_back(pool[i]);
            ++attempts;
        }
    }
    return chosen;
}

bool Overlay::needs_active(int peer) const {
    const Peer& p = peers_[peer];
    if (!p.alive) return false;
    const int have = static_cast<int>(p.ultras.size());
    if (p.mode == PeerMode::Ultra) return have < config_.ultra_limits.ultra_active;
    return have < config_.leaf_target_ultra;
}

int Overlay::step_active_connect(int peer, double now) {
    Peer& p = peers_[peer];
    if (!needs_active(peer)) {
        p.starved = false;
        return 0;
    }
    const bool ultra = p.mode == PeerMode::Ultra;
    const int goal = ultra ? config_.ultra_limits.ultra_active : config_.leaf_target_ultra;
    const int need = goal - static_cast<int>(p.ultras.size());
    const SlotType type = ultra ? SlotType::Ultra : SlotType::Leaf;
    const auto targets = candidates(peer, type, need);
    for (int t : targets) connect(peer, t, type, now);
    p.starved = static_cast<int>(targets.size()) < need;
    if (p.starved) ++stats_.starvations;
    return static_cast<int>(targets.size());
}

std::optional<ModeSwitch> Overlay::mode_rules(int peer) const {
    const Peer& p = peers_[peer];
    if (p.alive && p.mode == PeerMode::Ultra &&
        static_cast<int>(p.ultras.size()) < config_.policy.core_threshold) {
        return ModeSwitch{peer, PeerMode::Leaf, false};
    }
    return std::nullopt;
}

void Overlay::disconnect_all(int peer, double now) {
    const std::vector<int> leaves = peers_[peer].leaves;
    const std::vector<int> ultras = peers_[peer].ultras;
    // Slots vanishing with their owner are not departures an observer of
    // that owner could ever see.
    for (int x : leaves) {
        disconnect(peer, x, now, false);
        ++stats_.churn_drops;
    }
    for (int x : ultras) {
        disconnect(peer, x, now);
        ++stats_.churn_drops;
    }
}

void Overlay::set_mode(int peer, PeerMode mode) {
    Peer& p = peers_[peer];
    p.mode = mode;
    if (mode == PeerMode::Ultra) p.ever_ultra = true;
    ++p.mode_epoch;
    reindex(peer);
}

void Overlay::apply_switch(const ModeSwitch& change, double now) {
    Peer& p = peers_[change.peer];
    if (!p.alive || p.mode == change.to) return;
    advance(now);
    disconnect_all(change.peer, now);
    set_mode(change.peer, change.to);
    if (change.to == PeerMode::Ultra) {
        ++stats_.promotions;
    } else {
        ++stats_.demotions;
        if (change.kickout) ++stats_.kickouts;
    }
    touched_.push_back(change.peer);
}

void Overlay::set_alive(int peer, bool alive, double now) {
    Peer& p = peers_[peer];
    if (p.alive == alive) return;
    advance(now);
    if (!alive) disconnect_all(peer, now);
    p.alive = alive;
    p.starved = false;
    ++p.mode_epoch;
    reindex(peer);
    if (alive) touched_.push_back(peer);
}

bool Overlay::drop_edge(int a, int b, std::uint64_t edge_id, double now) {
    auto it = edges_.find(edge_key(a, b));
    if (it == edges_.end() || it->second.id != edge_id) return false;
    disconnect(a, b, now);
    return true;
}

PhaseState Overlay::state(int peer) const {
    const Peer& p = peers_[peer];
    return {static_cast<int>(p.leaves.size()), static_cast<int>(p.ultras.size())};
}

std::vector<Overlay::NewEdge> Overlay::take_new_edges() {
    std::vector<NewEdge> out;
    out.swap(new_edges_);
    return out;
}

std::vector<int> Overlay::take_touched() {
    std::vector<int> out;
    out.swap(touched_);
    return out;
}

void Overlay::check_invariants() const {
    std::size_t endpoints = 0;
    for (std::size_t i = 0; i < peers_.size(); ++i) {
        const Peer& p = peers_[i];
        const int self = static_cast<int>(i);
        if (!p.alive) {
            if (!p.leaves.empty() || !p.ultras.empty()) {
                throw invariant_error("departed peer " + p.id + " still has connections");
            }
            continue;
        }
        const int ultra_cap = p.mode == PeerMode::Ultra ? config_.ultra_limits.ultra_max
                                                        : config_.leaf_max_ultra;
        if (static_cast<int>(p.ultras.size()) > ultra_cap ||
            static_cast<int>(p.leaves.size()) > config_.ultra_limits.leaf_max) {
            throw invariant_error("slot cap exceeded at " + p.id);
        }
        if (p.mode != PeerMode::Ultra && !p.leaves.empty()) {
            throw invariant_error("leaf-mode peer " + p.id + " holds leaf slots");
        }
        for (int x : p.leaves) {
            if (!has_value(peers_[x].ultras, self) || peers_[x].mode != PeerMode::Leaf) {
                throw invariant_error("asymmetric leaf edge " + p.id + " - " + peers_[x].id);
            }
        }
        for (int x : p.ultras) {
            const Peer& q = peers_[x];
            const bool ok = q.mode == PeerMode::Ultra &&
                            (p.mode == PeerMode::Ultra ? has_value(q.ultras, self)
                                                       : has_value(q.leaves, self));
            if (!ok) throw invariant_error("asymmetric edge " + p.id + " - " + q.id);
        }
        endpoints += p.leaves.size() + p.ultras.size();
    }
    if (endpoints != 2 * edges_.size()) {
        throw invariant_error("edge registry out of sync with adjacency");
    }
    if (total_accepts_ - total_drops_ != static_cast<std::int64_t>(edges_.size())) {
        throw invariant_error("accepts minus drops differs from live edges");
    }
}

// ---------------------------------------------------------------- event loop

namespace {

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    int a = -1;
    int b = -1;
    std::uint64_t token = 0;
};

struct Later {
    bool operator()(const Event& x, const Event& y) const {
        if (x.time != y.time) return x.time > y.time;
        if (x.kind != y.kind) return x.kind > y.kind;
        return x.seq > y.seq;
    }
};

std::string padded(char prefix, std::size_t i, std::size_t n) {
    std::string digits = std::to_string(i);
    const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') +
           digits;
}

class Simulation {
public:
    explicit Simulation(const SimConfig& config)
        : config_(config), rng_(config.seed, 0), overlay_(config, rng_) {}

    SimResult run() {
        build();
        const double interval_h = static_cast<double>(config_.crawl_interval) / 3600.0;
        const auto ticks =
            static_cast<std::int64_t>(std::floor(config_.duration_hours / interval_h + 1e-9));
        for (std::int64_t k = 0; k <= ticks; ++k) {
            push(config_.warmup_hours + static_cast<double>(k) * interval_h, EventKind::CrawlTick,
                 static_cast<int>(k));
        }
        const double end = config_.warmup_hours + static_cast<double>(ticks) * interval_h;
        schedule_proposal(0.0);
        while (!queue_.empty()) {
            const Event e = queue_.top();
            if (e.time > end) break;
            queue_.pop();
            now_ = e.time;
            overlay_.advance(now_);
            dispatch(e);
            settle();
            if (overlay_.alive_ultras().size() != last_ultras_ ||
                overlay_.alive_leaves().size() != last_leaves_) {
                rebalance();
                settle();
                last_ultras_ = overlay_.alive_ultras().size();
                last_leaves_ = overlay_.alive_leaves().size();
            }
            schedule_new_edges();
        }
        result_.stats = overlay_.stats();
        for (std::size_t i = 0; i < config_.peers; ++i) {
            if (seen_ultra_[i]) ++result_.ever_ultra;
        }
        return std::move(result_);
    }

private:
    void push(double time, EventKind kind, int a = -1, int b = -1, std::uint64_t token = 0) {
        queue_.push(Event{time, kind, seq_++, a, b, token});
    }

    void build() {
        for (std::size_t i = 0; i < config_.peers; ++i) {
            const bool ultra = rng_.uniform() < config_.initial_ultra_fraction;
            overlay_.add_peer(padded('p', i, config_.peers),
                              ultra ? PeerMode::Ultra : PeerMode::Leaf, true);
        }
        // Background leaves: enough for every crawled peer to be an ultra.
        const auto pool = static_cast<std::size_t>(
            std::ceil(config_.leaves_per_ultra * static_cast<double>(config_.peers)));
        for (std::size_t i = 0; i < pool; ++i) {
            const int p = overlay_.add_peer(padded('b', i, pool), PeerMode::Leaf, false);
            overlay_.set_alive(p, false, 0.0);
            dormant_.push_back(p);
        }
        retry_pending_.assign(overlay_.size(), false);
        seen_ultra_.assign(config_.peers, false);
        // Ultras build their core first, then leaves attach.
        for (std::size_t i = 0; i < config_.peers; ++i) {
            const int p = static_cast<int>(i);
            if (overlay_.peer(p).mode == PeerMode::Ultra) overlay_.step_active_connect(p, 0.0);
        }
        overlay_.take_touched();
        rebalance();
        for (std::size_t i = 0; i < config_.peers; ++i) {
            const int p = static_cast<int>(i);
            if (overlay_.peer(p).mode == PeerMode::Leaf) overlay_.step_active_connect(p, 0.0);
        }
        settle();
        for (std::size_t i = 0; i < config_.peers; ++i) {
            schedule_timers(static_cast<int>(i));
        }
        for (std::size_t i = 0; i < overlay_.size(); ++i) {
            const int p = static_cast<int>(i);
            if (overlay_.peer(p).starved) schedule_retry(p);
        }
        schedule_new_edges();
        last_ultras_ = overlay_.alive_ultras().size();
        last_leaves_ = overlay_.alive_leaves().size();
    }

    /// Tops the alive leaves (crawled ones included) up to leaves_per_ultra
    /// per alive ultra by switching random background leaves on or off.
    void rebalance() {
        const auto wanted = std::llround(
            config_.leaves_per_ultra * static_cast<double>(overlay_.alive_ultras().size()));
        const auto crawled_leaves =
            static_cast<long long>(overlay_.alive_leaves().size() - active_.size());
        const auto target = static_cast<std::size_t>(std::max(0LL, wanted - crawled_leaves));
        while (active_.size() < target && !dormant_.empty()) {
            const int p = take_random(dormant_);
            overlay_.set_alive(p, true, now_);
            active_.push_back(p);
        }
        while (active_.size() > target) {
            const int p = take_random(active_);
            overlay_.set_alive(p, false, now_);
            dormant_.push_back(p);
        }
    }

    int take_random(std::vector<int>& list) {
        const std::size_t i = rng_.index(list.size());
        const int p = list[i];
        list[i] = list.back();
        list.pop_back();
        return p;
    }

    double after(double mean_hours) { return now_ + rng_.exponential(1.0 / mean_hours); }

    void schedule_timers(int p) {
        const Peer& peer = overlay_.peer(p);
        if (!peer.crawled || !peer.alive) return;
        const bool ultra = peer.mode == PeerMode::Ultra;
        if (config_.peer_churn) {
            const std::uint64_t token = ++leave_token_[p];
            push(after(ultra ? config_.ultra_peer_hours : config_.leaf_peer_hours),
                 EventKind::PeerLeave, p, -1, token);
        }
        const double rate = ultra ? config_.policy.kickout_rate : config_.policy.promotion_rate;
        if (rate > 0.0) {
            push(now_ + rng_.exponential(rate), EventKind::ModeSwitch, p, -1, peer.mode_epoch);
        }
    }

    void schedule_retry(int p) {
        if (retry_pending_[p] || config_.active_retry_rate <= 0.0) return;
        retry_pending_[p] = true;
        push(now_ + rng_.exponential(config_.active_retry_rate), EventKind::ConnectAttempt, p);
    }

    void schedule_proposal(double from) {
        const double rate = proposal_rate();
        // With nobody to propose, poll again an hour later.
        const double wait = rate > 0.0 ? rng_.exponential(rate) : 1.0;
        push(from + wait, EventKind::ConnectAttempt, -1);
    }

    double leaf_rate() const {
        return config_.attempt_scale * config_.leaf_attempt_rate *
               static_cast<double>(overlay_.alive_leaves().size());
    }
    double ultra_rate() const {
        return config_.attempt_scale * config_.ultra_attempt_rate *
               static_cast<double>(overlay_.alive_ultras().size());
    }
    double proposal_rate() const {
        return overlay_.alive_ultras().empty() ? 0.0 : leaf_rate() + ultra_rate();
    }

    void schedule_new_edges() {
        for (const auto& e : overlay_.take_new_edges()) {
            const double mean = e.type == SlotType::Leaf ? config_.leaf_connection_hours
                                                         : config_.ultra_connection_hours;
            push(after(mean), EventKind::ConnectionDrop, e.a, e.b, e.id);
        }
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::ConnectAttempt:
                if (e.a < 0) {
                    propose();
                    schedule_proposal(now_);
                } else {
                    retry_pending_[e.a] = false;
                    react(e.a);
                }
                break;
            case EventKind::ConnectionDrop:
                if (overlay_.drop_edge(e.a, e.b, e.token, now_)) {
                    ++overlay_.stats().lifetime_drops;
                }
                break;
            case EventKind::PeerLeave:
                if (overlay_.peer(e.a).alive && e.token == leave_token_[e.a]) {
                    overlay_.set_alive(e.a, false, now_);
                    push(after(config_.offline_hours), EventKind::PeerJoin, e.a);
                }
                break;
            case EventKind::PeerJoin:
                overlay_.set_alive(e.a, true, now_);
                schedule_timers(e.a);
                break;
            case EventKind::ModeSwitch: {
                const Peer& p = overlay_.peer(e.a);
                if (!p.alive || e.token != p.mode_epoch) break;
                const bool ultra = p.mode == PeerMode::Ultra;
                overlay_.apply_switch(
                    ModeSwitch{e.a, ultra ? PeerMode::Leaf : PeerMode::Ultra, ultra}, now_);
                schedule_timers(e.a);
                break;
            }
            case EventKind::CrawlTick:
                crawl(e.a);
                break;
        }
    }

    void propose() {
        const auto& ultras = overlay_.alive_ultras();
        const auto& leaves = overlay_.alive_leaves();
        if (ultras.empty()) return;
        const double l = leaf_rate();
        const double u = ultra_rate();
        if (l + u <= 0.0) return;
        const bool from_leaf = rng_.uniform() * (l + u) < l;
        const auto& pool = from_leaf ? leaves : ultras;
        const int initiator = pool[rng_.index(pool.size())];
        const int target = ultras[rng_.index(ultras.size())];
        overlay_.admit(initiator, target, now_);
    }

    void react(int p) {
        overlay_.step_active_connect(p, now_);
        if (auto change = overlay_.mode_rules(p)) {
            overlay_.apply_switch(*change, now_);
            schedule_timers(p);
        }
        if (overlay_.peer(p).starved) schedule_retry(p);
    }

    void settle() {
        // Reacting can touch more peers (demotion drops edges); it terminates
        // because only demotions remove edges and each removes an ultra.
        for (auto touched = overlay_.take_touched(); !touched.empty();
             touched = overlay_.take_touched()) {
            for (int p : touched) {
                if (overlay_.needs_active(p)) react(p);
            }
        }
    }

    void crawl(int tick) {
        if (tick == 0) {
            // Rate estimates cover the crawl window only.
            overlay_.stats() = SimStats{};
        }
        if (config_.check_invariants) overlay_.check_invariants();
        const std::int64_t t = static_cast<std::int64_t>(tick) * config_.crawl_interval;
        for (std::size_t i = 0; i < config_.peers; ++i) {
            const Peer& p = overlay_.peer(static_cast<int>(i));
            if (!p.alive) continue;
            if (p.mode == PeerMode::Ultra) seen_ultra_[i] = true;
            std::vector<std::string> leaves;
            std::vector<std::string> ultras;
            leaves.reserve(p.leaves.size());
            ultras.reserve(p.ultras.size());
            for (int x : p.leaves) leaves.push_back(overlay_.peer(x).id);
            for (int x : p.ultras) ultras.push_back(overlay_.peer(x).id);
            result_.records.emplace_back(p.id, t, p.mode, config_.software, std::move(leaves),
                                         std::move(ultras));
        }
    }

    const SimConfig& config_;
    Rng rng_;
    Overlay overlay_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    std::vector<bool> retry_pending_;
    std::vector<int> dormant_;  // background leaves currently offline
    std::vector<int> active_;
    std::size_t last_ultras_ = 0;
    std::size_t last_leaves_ = 0;
    std::vector<bool> seen_ultra_;
    std::unordered_map<int, std::uint64_t> leave_token_;
    SimResult result_;
};

}  // namespace

SimResult run(const SimConfig& config) {
    config.validate();
    Simulation sim(config);
    return sim.run();
}

SimConfig parse_sim_config(const std::string& toml_text, SimConfig base) {
    toml::table table;
    try {
        table = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "simulator config: " << e.description() << " at line " << e.source().begin.line;
        throw input_error(msg.str());
    }
    SimConfig c = std::move(base);
    auto number = [](const toml::node& node, const std::string& key) {
        if (auto v = node.value<double>()) return *v;
        throw input_error("simulator config: '" + key + "' must be a number");
    };
    auto integer = [](const toml::node& node, const std::string& key) {
        if (auto v = node.value<std::int64_t>()) return *v;
        throw input_error("simulator config: '" + key + "' must be an integer");
    };
    auto count = [&](const toml::node& node, const std::string& key) {
        const auto v = integer(node, key);
        if (v < 0) throw input_error("simulator config: '" + key + "' must be non-negative");
        return static_cast<std::size_t>(v);
    };
    const std::map<std::string, std::function<void(const toml::node&, const std::string&)>>
        setters{
            {"peers", [&](auto& n, auto& k) { c.peers = count(n, k); }},
            {"leaves_per_ultra", [&](auto& n, auto& k) { c.leaves_per_ultra = number(n, k); }},
            {"B_l", [&](auto& n, auto& k) { c.ultra_limits.leaf_max = static_cast<int>(integer(n, k)); }},
            {"B_u", [&](auto& n, auto& k) { c.ultra_limits.ultra_max = static_cast<int>(integer(n, k)); }},
            {"L_u", [&](auto& n, auto& k) { c.ultra_limits.ultra_active = static_cast<int>(integer(n, k)); }},
            {"leaf_max_ultra", [&](auto& n, auto& k) { c.leaf_max_ultra = static_cast<int>(integer(n, k)); }},
            {"leaf_target_ultra", [&](auto& n, auto& k) { c.leaf_target_ultra = static_cast<int>(integer(n, k)); }},
            {"leaf_connection_hours", [&](auto& n, auto& k) { c.leaf_connection_hours = number(n, k); }},
            {"ultra_connection_hours", [&](auto& n, auto& k) { c.ultra_connection_hours = number(n, k); }},
            {"peer_churn",
             [&](auto& n, auto& k) {
                 auto v = n.template value<bool>();
                 if (!v) throw input_error("simulator config: '" + k + "' must be a boolean");
                 c.peer_churn = *v;
             }},
            {"ultra_peer_hours", [&](auto& n, auto& k) { c.ultra_peer_hours = number(n, k); }},
            {"leaf_peer_hours", [&](auto& n, auto& k) { c.leaf_peer_hours = number(n, k); }},
            {"offline_hours", [&](auto& n, auto& k) { c.offline_hours = number(n, k); }},
            {"leaf_attempt_rate", [&](auto& n, auto& k) { c.leaf_attempt_rate = number(n, k); }},
            {"ultra_attempt_rate", [&](auto& n, auto& k) { c.ultra_attempt_rate = number(n, k); }},
            {"attempt_scale", [&](auto& n, auto& k) { c.attempt_scale = number(n, k); }},
            {"active_retry_rate", [&](auto& n, auto& k) { c.active_retry_rate = number(n, k); }},
            {"promotion_rate", [&](auto& n, auto& k) { c.policy.promotion_rate = number(n, k); }},
            {"kickout_rate", [&](auto& n, auto& k) { c.policy.kickout_rate = number(n, k); }},
            {"core_threshold", [&](auto& n, auto& k) { c.policy.core_threshold = static_cast<int>(integer(n, k)); }},
            {"initial_ultra_fraction", [&](auto& n, auto& k) { c.initial_ultra_fraction = number(n, k); }},
            {"crawl_interval", [&](auto& n, auto& k) { c.crawl_interval = integer(n, k); }},
            {"warmup_hours", [&](auto& n, auto& k) { c.warmup_hours = number(n, k); }},
            {"duration_hours", [&](auto& n, auto& k) { c.duration_hours = number(n, k); }},
            {"seed", [&](auto& n, auto& k) { c.seed = static_cast<std::uint64_t>(integer(n, k)); }},
            {"software",
             [&](auto& n, auto& k) {
                 auto v = n.template value<std::string>();
                 if (!v) throw input_error("simulator config: '" + k + "' must be a string");
                 c.software = *v;
             }},
            {"check_invariants",
             [&](auto& n, auto& k) {
                 auto v = n.template value<bool>();
                 if (!v) throw input_error("simulator config: '" + k + "' must be a boolean");
                 c.check_invariants = *v;
             }},
        };
    for (auto&& [key, node] : table) {
        const std::string name(key.str());
        auto it = setters.find(name);
        if (it == setters.end()) throw input_error("simulator config: unknown key '" + name + "'");
        it->second(node, name);
    }
    c.validate();
    return c;
}

}  // namespace overlay_phase::sim
