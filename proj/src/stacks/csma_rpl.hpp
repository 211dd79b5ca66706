#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "app/firmware.hpp"
#include "core/engine.hpp"
#include "core/rng.hpp"
#include "medium/medium.hpp"
#include "phy/phy.hpp"
#include "phy/reception.hpp"
#include "topo/topology.hpp"

namespace meshroll {

// Unslotted CSMA-CA with the 802.15.4 standard constants. Link retries stay
// at zero: a failed hop is a lost copy.
struct CsmaParams {
    int min_be = 3;
    int max_be = 5;
    int max_backoffs = 4;
    Duration unit_backoff = from_us(320);  // 20 symbols
    double cca_threshold_dbm = -85.0;
    int link_retries = 0;
    int queue_limit = 8;
    int channel = 26;
};

enum class RplVariant { Classic, Lite };

struct RplConfig {
    RplVariant variant = RplVariant::Classic;
    Duration trickle_imin = from_ms(4096);  // Contiki-NG DIO interval min
    int trickle_doublings = 8;  // i_max; k is infinite (no suppression)
    // Lite admits a parent only when the upward link (DAO direction) clears
    // this margin on top of sensitivity.
    double lite_margin_db = 6.0;
    // Non-storing routes ride in the source-routing header; hops beyond
    // what fits the MTU next to the payload cannot be expressed, so such
    // nodes never become part of the routed network. 0: unlimited.
    int max_route_hops = 0;
    int root_rank = 256;
    int dio_bytes = 32;
};

struct RplState {
    int rank = 0x7fffffff;
    int hops = 0;  // depth below the root along the parent chain
    std::optional<std::uint32_t> parent;
    std::optional<SimTime> joined_at;
    // Classic (storing) only: destination -> next hop, for every downward
    // destination in this node's subtree.
    std::map<std::uint32_t, std::uint32_t> routing_table;
};

struct MacCounters {
    std::uint64_t sent = 0;
    std::uint64_t sent_dio = 0;
    std::uint64_t sent_data = 0;
    std::uint64_t access_failures = 0;
    std::uint64_t queue_drops = 0;
    SimTime first_sent = -1;
    SimTime last_sent = -1;
};

struct CsmaFrame {
    enum class Kind { Dio, Data };
    Kind kind = Kind::Dio;
    std::uint32_t src = 0;
    std::uint32_t dst = kBroadcast;
    int bytes = 0;  // MAC frame bytes on air (PHY overhead added by airtime)
    int rank = 0;   // DIO
    std::uint32_t pkt_index = 0;
    int repeats_left = 0;  // blind link-layer repeats (there are no ACKs)

    static constexpr std::uint32_t kBroadcast = 0xffffffff;
};

// The comparison stack: DIO-driven DODAG formation over trickle, then
// worst-case per-child unicast dissemination down the frozen tree.
class CsmaRplStack {
public:
    CsmaRplStack(Engine& engine, Medium& medium, const Topology& topo, const CsmaParams& csma,
                 const RplConfig& rpl, PhyKind phy, const LinkBudget& budget,
                 const ReceptionParams& rx_params, std::uint64_t run_seed);

    using Delivery = std::function<void(std::uint32_t node, const DataPacket&, SimTime)>;
    void set_delivery(Delivery fn) { deliver_ = std::move(fn); }
    void set_packets(std::vector<DataPacket> packets) { packets_ = std::move(packets); }

    // Starts DODAG formation at t=0. Dissemination begins one interval after
    // formation settles (everyone joined, or join_timeout).
    void start(SimTime join_timeout, Duration drain, Duration interval);

    bool all_consumers_joined() const;
    const RplState& rpl(std::uint32_t id) const { return rpl_[id]; }
    const MacCounters& counters(std::uint32_t id) const { return mac_[id].counters; }
    std::optional<SimTime> formation_end() const { return formation_end_; }
    int tree_depth() const;  // hops, after freeze
    int data_frame_bytes() const { return data_frame_bytes_; }

    // Hop list root -> dest along DODAG edges; throws if dest never joined.
    std::vector<std::uint32_t> downward_route(std::uint32_t dest) const;
    // Source-routing header charge for one frame to dest (Lite only).
    int route_header_bytes(std::uint32_t dest) const;

    // Direct MAC access for tests: enqueue an arbitrary frame on a node.
    void mac_enqueue(std::uint32_t node, const CsmaFrame& frame);

private:
    struct MacState {
        std::deque<CsmaFrame> queue;
        bool busy = false;
        int be = 3;
        int attempts = 0;
        MacCounters counters;
    };

    void mac_start_attempt(std::uint32_t node);
    void mac_backoff(std::uint32_t node);
    void mac_cca(std::uint32_t node);
    void mac_tx_done(std::uint32_t node, const CsmaFrame& frame, SimTime start, SimTime end);
    void mac_next(std::uint32_t node);

    void resolve_at(std::uint32_t receiver, const CsmaFrame& frame, SimTime start, SimTime end);
    void process_dio(std::uint32_t receiver, const CsmaFrame& frame, double link_dbm, SimTime now);
    void process_data(std::uint32_t receiver, const CsmaFrame& frame, SimTime now);

    void start_trickle(std::uint32_t node);
    void trickle_interval(std::uint32_t node, int k);
    void readiness_check();
    void freeze_and_disseminate();
    void inject_next_packet();

    Engine& engine_;
    Medium& medium_;
    const Topology& topo_;
    CsmaParams csma_;
    RplConfig rplcfg_;
    const PhyProfile& profile_;
    LinkBudget budget_;
    ReceptionParams rx_params_;
    RngManager rng_;
    std::uint32_t root_;
    int rank_increase_;

    std::vector<MacState> mac_;
    std::vector<RplState> rpl_;
    std::vector<std::vector<std::uint32_t>> children_;
    std::vector<std::set<std::uint32_t>> forwarded_;  // per node, packet ids
    std::vector<DataPacket> packets_;
    std::size_t next_packet_ = 0;
    Delivery deliver_;

    bool frozen_ = false;
    std::optional<SimTime> formation_end_;
    SimTime join_timeout_ = 0;
    Duration drain_ = 0;
    Duration interval_ = from_ms(31);
    int data_frame_bytes_ = 0;
    std::uint64_t next_frame_ref_ = 1;
};

}  // namespace meshroll
