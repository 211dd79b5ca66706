#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "app/firmware.hpp"
#include "core/engine.hpp"
#include "core/rng.hpp"
#include "medium/medium.hpp"
#include "phy/phy.hpp"
#include "phy/reception.hpp"
#include "topo/topology.hpp"

namespace meshroll {

// The synchronous-flooding schedule unit. Periods repeat every `period` ns;
// each one leads with a short control flood (schedule + timing beacon) and,
// once dissemination is open, carries one data flood.
struct FloodConfig {
    Duration period = from_ms(250);
    int max_tx = 12;
    int max_slots = 8;
    PhyKind phy = PhyKind::Ble500k;
    std::vector<int> hop_channels = {11, 16, 21, 26};
    Duration guard = from_us(200);
    int sync_slots = 2;
    int desync_limit = 16;   // consecutive missed control floods before drop
    int ctl_payload_bytes = 8;
    int ctl_max_tx = 1;
    // Cold timing acquisition from a short beacon is probabilistic near the
    // floor: detection ramps linearly from 0 at plain sensitivity to 1 at
    // this margin above it. Data slots track an already-known schedule and
    // pay no such penalty. 0 disables the ramp.
    double ctl_margin_db = 0.0;
    double drift_ppm_max = 40.0;
    bool hop_per_slot = false;  // default hops per period
};

// Data slot: airtime of a full MTU frame plus the guard.
Duration slot_len(const FloodConfig& config);
// Control slots carry only the beacon, so they are much shorter.
Duration ctl_slot_len(const FloodConfig& config);

int channel_for(const FloodConfig& config, std::int64_t period_index, int slot_index);

// Static check of the period budget at the configured ceiling
// ((sync_slots + max_slots) data slots). Tight configs still run: the data
// window truncates instead (see plan_period), which is exactly what squeezes
// participation at short periods.
enum class PeriodBudget { Ok, Tight, Infeasible };
PeriodBudget period_budget(const FloodConfig& config);

// The fixed per-period slot layout, a pure function of the config: every
// synced node derives the same plan. data_slots is the largest window
// <= max_slots that fits behind the control flood.
struct PeriodPlan {
    int ctl_slots = 0;
    int data_slots = 0;
    Duration ctl_slot = 0;
    Duration data_slot = 0;
    Duration data_start = 0;  // offset from period start
};
PeriodPlan plan_period(const FloodConfig& config);  // throws if nothing fits

struct FloodResult {
    struct PerNode {
        int first_rx_slot = -1;  // -1: not reached by this flood
        int tx_slots = 0;
    };
    std::vector<PerNode> nodes;
    std::uint32_t initiator = 0;
    std::uint64_t flood_id = 0;
};

struct AtomicNodeState {
    bool synced = false;
    bool dropped = false;  // desynced out after joining
    bool ever_dropped = false;
    int missed_control = 0;
    std::optional<SimTime> joined_at;
    double drift_ppm = 0.0;
    SimTime last_sync = 0;  // last decoded control flood
};

// Runs the whole Atomic life cycle on the engine: per-period control floods,
// join/re-sync of scanning nodes, clock-drift desynchronisation, and one
// data flood per period once dissemination opens.
class AtomicStack {
public:
    AtomicStack(Engine& engine, Medium& medium, const Topology& topo, const FloodConfig& config,
                const LinkBudget& budget, const ReceptionParams& rx_params, std::uint64_t run_seed);

    using Delivery = std::function<void(std::uint32_t node, const DataPacket&, SimTime)>;
    void set_delivery(Delivery fn) { deliver_ = std::move(fn); }
    void set_packets(std::vector<DataPacket> packets) { packets_ = std::move(packets); }

    // Periods run from t=0. Dissemination opens at the first period boundary
    // after every consumer has joined, or at join_timeout, whichever comes
    // first; floods continue until drain expires after the last packet.
    void start(SimTime join_timeout, Duration drain);

    bool all_consumers_joined() const;
    std::optional<SimTime> dissemination_start() const { return dissem_start_; }
    const AtomicNodeState& node(std::uint32_t id) const { return nodes_[id]; }
    const PeriodPlan& plan() const { return plan_; }

    // Test hooks.
    AtomicNodeState& node_mut(std::uint32_t id) { return nodes_[id]; }
    void force_sync_all();

    // One flood, executed synchronously at t0 (slot times are computed, not
    // event-driven; nothing else shares the medium in an Atomic run).
    // Control floods can be decoded by scanning nodes camped on the right
    // channel; data floods only by synced nodes whose clock offset fits the
    // guard. Decoders relay from the slot after their first reception.
    FloodResult run_flood_at(SimTime t0, std::uint32_t initiator, int window_slots, int max_tx,
                             int channel, int frame_bytes, Duration slot, bool control,
                             const DataPacket* packet, std::int64_t period_index = 0);

private:
    void run_period(std::int64_t p);
    void schedule_period(std::int64_t p);
    bool rx_gate_ok(std::uint32_t id, SimTime t) const;
    int camp_channel(std::uint32_t id, SimTime t) const;

    Engine& engine_;
    Medium& medium_;
    const Topology& topo_;
    FloodConfig config_;
    const PhyProfile& profile_;
    LinkBudget budget_;
    ReceptionParams rx_params_;
    std::uint64_t seed_;
    RngManager rng_;
    PeriodPlan plan_;
    std::uint32_t source_;
    std::vector<AtomicNodeState> nodes_;
    std::vector<DataPacket> packets_;
    std::size_t next_packet_ = 0;
    Delivery deliver_;
    std::optional<SimTime> dissem_start_;
    SimTime join_timeout_ = 0;
    Duration drain_ = 0;
    std::optional<SimTime> last_inject_;
    std::uint64_t next_flood_id_ = 1;
};

}  // namespace meshroll
