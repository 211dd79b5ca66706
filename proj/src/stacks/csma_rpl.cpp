#include "stacks/csma_rpl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshroll {

CsmaRplStack::CsmaRplStack(Engine& engine, Medium& medium, const Topology& topo,
                           const CsmaParams& csma, const RplConfig& rpl, PhyKind phy,
                           const LinkBudget& budget, const ReceptionParams& rx_params,
                           std::uint64_t run_seed)
    : engine_(engine),
      medium_(medium),
      topo_(topo),
      csma_(csma),
      rplcfg_(rpl),
      profile_(phy_profile(phy)),
      budget_(budget),
      rx_params_(rx_params),
      rng_(run_seed),
      root_(topo.source_id()),
      mac_(topo.nodes.size()),
      rpl_(topo.nodes.size()),
      children_(topo.nodes.size()),
      forwarded_(topo.nodes.size()) {
    if (csma_.min_be > csma_.max_be || csma_.max_backoffs < 0) {
        throw std::runtime_error("invalid CSMA parameters");
    }
    // Link-quality-aware, integral rank step derived from the expected
    // transmission count at the configured fade probability.
    double etx = rx_params_.fade_loss_prob < 1.0 ? 1.0 / (1.0 - rx_params_.fade_loss_prob) : 8.0;
    rank_increase_ = 256 + static_cast<int>(std::lround(256.0 * (etx - 1.0)));
    rpl_[root_].rank = rplcfg_.root_rank;
    rpl_[root_].joined_at = 0;
}

// ---------------------------------------------------------------------------
// MAC: unslotted CSMA-CA, one frame in flight per node
// ---------------------------------------------------------------------------

void CsmaRplStack::mac_enqueue(std::uint32_t node, const CsmaFrame& frame) {
    auto& mac = mac_[node];
    if (mac.queue.size() >= static_cast<std::size_t>(csma_.queue_limit)) {
        mac.counters.queue_drops++;
        return;
    }
    mac.queue.push_back(frame);
    if (!mac.busy) mac_start_attempt(node);
}

void CsmaRplStack::mac_start_attempt(std::uint32_t node) {
    auto& mac = mac_[node];
    mac.busy = true;
    mac.be = csma_.min_be;
    mac.attempts = 0;
    mac_backoff(node);
}

void CsmaRplStack::mac_backoff(std::uint32_t node) {
    auto& mac = mac_[node];
    std::uint32_t slots = rng_.stream("backoff", node).uniform_u32(1u << mac.be);
    engine_.schedule_in(static_cast<Duration>(slots) * csma_.unit_backoff, "csma", "cca",
                        [this, node] { mac_cca(node); });
}

void CsmaRplStack::mac_cca(std::uint32_t node) {
    auto& mac = mac_[node];
    if (mac.queue.empty()) {
        mac.busy = false;
        return;
    }
    if (medium_.channel_clear(node, csma_.channel, engine_.now(), csma_.cca_threshold_dbm)) {
        CsmaFrame frame = mac.queue.front();
        SimTime start = engine_.now();
        SimTime end = start + airtime(profile_, frame.bytes);
        medium_.transmit(
            ActiveTx{node, csma_.channel, start, end, 0, 0, next_frame_ref_++});
        engine_.schedule(end, "csma", "tx-end",
                         [this, node, frame, start, end] { mac_tx_done(node, frame, start, end); });
        return;
    }
    mac.attempts++;
    if (mac.attempts > csma_.max_backoffs) {
        mac.counters.access_failures++;
        mac_next(node);
        return;
    }
    mac.be = std::min(mac.be + 1, csma_.max_be);
    mac_backoff(node);
}

void CsmaRplStack::mac_tx_done(std::uint32_t node, const CsmaFrame& frame, SimTime start,
                               SimTime end) {
    auto& mac = mac_[node];
    if (frame.repeats_left > 0) {
        CsmaFrame again = frame;
        again.repeats_left--;
        if (mac.queue.size() < static_cast<std::size_t>(csma_.queue_limit)) {
            mac.queue.push_back(again);
        }
    }
    mac.counters.sent++;
    if (frame.kind == CsmaFrame::Kind::Dio) {
        mac.counters.sent_dio++;
    } else {
        mac.counters.sent_data++;
    }
    if (mac.counters.first_sent < 0) mac.counters.first_sent = start;
    mac.counters.last_sent = start;
    if (frame.dst == CsmaFrame::kBroadcast) {
        for (std::uint32_t nb : medium_.radio_map().neighbors(node, csma_.channel)) {
            resolve_at(nb, frame, start, end);
        }
    } else {
        resolve_at(frame.dst, frame, start, end);
    }
    mac_next(node);
}

void CsmaRplStack::mac_next(std::uint32_t node) {
    auto& mac = mac_[node];
    if (!mac.queue.empty()) mac.queue.pop_front();
    if (!mac.queue.empty()) {
        mac_start_attempt(node);
    } else {
        mac.busy = false;
    }
}

// ---------------------------------------------------------------------------
// Reception: capture-rule resolution at frame end
// ---------------------------------------------------------------------------

void CsmaRplStack::resolve_at(std::uint32_t receiver, const CsmaFrame& frame, SimTime start,
                              SimTime end) {
    if (receiver == frame.src || receiver >= rpl_.size()) return;
    if (topo_.nodes[receiver].indoor) return;
    // Half-duplex: a node transmitting during any part of the frame hears
    // nothing of it.
    if (medium_.node_tx_overlaps(receiver, start, end)) return;

    std::vector<RxCandidate> candidates;
    candidates.push_back(
        RxCandidate{frame.src, medium_.radio_map().rx_dbm(frame.src, receiver, csma_.channel),
                    start, 0, 0});
    for (const ActiveTx* tx : medium_.overlapping(csma_.channel, start, end)) {
        if (tx->sender == frame.src || tx->sender == receiver) continue;
        candidates.push_back(
            RxCandidate{tx->sender, medium_.radio_map().rx_dbm(tx->sender, receiver, csma_.channel),
                        tx->start, 0, 0});
    }
    double interference = medium_.interference_mw(csma_.channel, start, end);
    int winner = resolve_reception(candidates, RxMode::Capture, profile_, budget_, rx_params_,
                                   interference, rng_.stream("fade", receiver));
    if (winner != 0) return;  // this frame did not survive at this receiver

    double link_dbm = candidates[0].rx_dbm;
    if (frame.kind == CsmaFrame::Kind::Dio) {
        process_dio(receiver, frame, link_dbm, end);
    } else {
        process_data(receiver, frame, end);
    }
}

// ---------------------------------------------------------------------------
// RPL: DODAG formation over trickle-timed DIOs
// ---------------------------------------------------------------------------

void CsmaRplStack::process_dio(std::uint32_t receiver, const CsmaFrame& frame, double link_dbm,
                               SimTime now) {
    if (frozen_ || receiver == root_) return;
    // Routing needs the link in both directions; a node nobody can hear
    // cannot take a parent. Lite additionally requires margin on the
    // upward (DAO) direction, and cannot route past the source-routing
    // header budget.
    double floor = effective_sensitivity_dbm(profile_, budget_);
    double up_floor = floor;
    if (rplcfg_.variant == RplVariant::Lite) up_floor += rplcfg_.lite_margin_db;
    double uplink_dbm = medium_.radio_map().rx_dbm(receiver, frame.src, csma_.channel);
    if (link_dbm < floor || uplink_dbm < up_floor) return;
    auto& st = rpl_[receiver];
    const auto& parent_st = rpl_[frame.src];
    int cand_hops = parent_st.hops + 1;
    if (rplcfg_.max_route_hops > 0 && cand_hops > rplcfg_.max_route_hops) return;
    int cand_rank = frame.rank + rank_increase_;
    if (!st.parent) {
        st.parent = frame.src;
        st.rank = cand_rank;
        st.hops = cand_hops;
        st.joined_at = now;
        start_trickle(receiver);
    } else if (cand_rank < st.rank) {
        // Better parent: rank only ever decreases, which keeps the DODAG
        // loop-free without a full repair pass.
        st.parent = frame.src;
        st.rank = cand_rank;
        st.hops = cand_hops;
    }
}

void CsmaRplStack::start_trickle(std::uint32_t node) {
    trickle_interval(node, 0);
}

void CsmaRplStack::trickle_interval(std::uint32_t node, int k) {
    if (frozen_) return;
    Duration interval = rplcfg_.trickle_imin
                        << std::min(k, rplcfg_.trickle_doublings);
    Duration fire = static_cast<Duration>(
        rng_.stream("trickle", node).uniform(static_cast<double>(interval) / 2.0,
                                             static_cast<double>(interval)));
    engine_.schedule_in(fire, "rpl", "dio", [this, node] {
        if (frozen_) return;
        CsmaFrame dio;
        dio.kind = CsmaFrame::Kind::Dio;
        dio.src = node;
        dio.dst = CsmaFrame::kBroadcast;
        dio.bytes = rplcfg_.dio_bytes;
        dio.rank = rpl_[node].rank;
        mac_enqueue(node, dio);
    });
    engine_.schedule_in(interval, "rpl", "trickle",
                        [this, node, k] { trickle_interval(node, k + 1); });
}

bool CsmaRplStack::all_consumers_joined() const {
    for (const auto& n : topo_.nodes) {
        if (n.role != Role::Consumer || n.indoor) continue;
        if (!rpl_[n.id].joined_at) return false;
    }
    return true;
}

void CsmaRplStack::readiness_check() {
    if (frozen_) return;
    if (all_consumers_joined() || engine_.now() >= join_timeout_) {
        freeze_and_disseminate();
        return;
    }
    engine_.schedule_in(from_s(1), "rpl", "readiness", [this] { readiness_check(); });
}

int CsmaRplStack::tree_depth() const {
    int depth = 0;
    for (const auto& n : topo_.nodes) {
        if (n.role != Role::Consumer || !rpl_[n.id].joined_at) continue;
        int hops = 0;
        std::uint32_t cur = n.id;
        while (cur != root_ && rpl_[cur].parent && hops <= static_cast<int>(topo_.nodes.size())) {
            cur = *rpl_[cur].parent;
            ++hops;
        }
        depth = std::max(depth, hops);
    }
    return depth;
}

std::vector<std::uint32_t> CsmaRplStack::downward_route(std::uint32_t dest) const {
    if (!rpl_[dest].joined_at) throw std::runtime_error("no route: destination never joined");
    std::vector<std::uint32_t> hops;
    std::uint32_t cur = dest;
    while (cur != root_) {
        hops.push_back(cur);
        if (!rpl_[cur].parent || hops.size() > topo_.nodes.size()) {
            throw std::runtime_error("no route: broken parent chain");
        }
        cur = *rpl_[cur].parent;
    }
    hops.push_back(root_);
    std::reverse(hops.begin(), hops.end());
    return hops;
}

int CsmaRplStack::route_header_bytes(std::uint32_t dest) const {
    if (rplcfg_.variant != RplVariant::Lite) return 0;
    return 8 * static_cast<int>(downward_route(dest).size() - 1);
}

void CsmaRplStack::freeze_and_disseminate() {
    frozen_ = true;
    formation_end_ = engine_.now();

    for (const auto& n : topo_.nodes) {
        const auto& st = rpl_[n.id];
        if (n.id != root_ && st.parent) children_[*st.parent].push_back(n.id);
    }
    for (auto& kids : children_) std::sort(kids.begin(), kids.end());

    // Classic stores downward routes on every ancestor; Lite carries them in
    // the source-routing header instead, charged against the frame budget.
    if (rplcfg_.variant == RplVariant::Classic) {
        for (const auto& n : topo_.nodes) {
            if (n.id == root_ || !rpl_[n.id].joined_at) continue;
            std::uint32_t hop = n.id;
            std::uint32_t cur = *rpl_[n.id].parent;
            while (true) {
                rpl_[cur].routing_table[n.id] = hop;
                if (cur == root_) break;
                hop = cur;
                cur = *rpl_[cur].parent;
            }
        }
    }

    if (packets_.empty()) return;
    int payload = static_cast<int>(packets_[0].payload.size());
    int header = DataPacket::kHeaderBytes + 4;  // + src(2), dst(2)
    int route = rplcfg_.variant == RplVariant::Lite ? 8 * tree_depth() : 0;
    data_frame_bytes_ = payload + header + route;
    if (data_frame_bytes_ > profile_.mtu_bytes) {
        throw FragmentationError("CSMA data frame of " + std::to_string(data_frame_bytes_) +
                                 " B exceeds the " + std::to_string(profile_.mtu_bytes) +
                                 " B MTU (payload too large for this tree depth)");
    }
    engine_.schedule_in(interval_, "csma", "inject", [this] { inject_next_packet(); });
}

void CsmaRplStack::inject_next_packet() {
    if (next_packet_ >= packets_.size()) return;
    std::uint32_t idx = static_cast<std::uint32_t>(next_packet_++);
    for (std::uint32_t child : children_[root_]) {
        CsmaFrame frame;
        frame.kind = CsmaFrame::Kind::Data;
        frame.src = root_;
        frame.dst = child;
        frame.bytes = data_frame_bytes_;
        frame.pkt_index = idx;
        frame.repeats_left = csma_.link_retries;
        mac_enqueue(root_, frame);
    }
    if (next_packet_ < packets_.size()) {
        engine_.schedule_in(interval_, "csma", "inject", [this] { inject_next_packet(); });
    }
}

void CsmaRplStack::process_data(std::uint32_t receiver, const CsmaFrame& frame, SimTime now) {
    const DataPacket& pkt = packets_[frame.pkt_index];
    if (deliver_ && topo_.nodes[receiver].role == Role::Consumer) deliver_(receiver, pkt, now);
    // A repeated copy must not trigger a second forwarding wave.
    if (!forwarded_[receiver].insert(frame.pkt_index).second) return;
    for (std::uint32_t child : children_[receiver]) {
        CsmaFrame copy = frame;
        copy.src = receiver;
        copy.dst = child;
        copy.repeats_left = csma_.link_retries;
        mac_enqueue(receiver, copy);
    }
}

void CsmaRplStack::start(SimTime join_timeout, Duration drain, Duration interval) {
    join_timeout_ = join_timeout;
    drain_ = drain;
    interval_ = interval;
    start_trickle(root_);
    engine_.schedule_in(from_s(1), "rpl", "readiness", [this] { readiness_check(); });
}

}  // namespace meshroll
