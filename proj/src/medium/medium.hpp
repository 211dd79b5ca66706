#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "core/engine.hpp"
#include "core/time.hpp"
#include "medium/radio_map.hpp"
#include "phy/phy.hpp"

namespace meshroll {

// A frame in flight. The payload is owned by the stack; the medium tracks
// occupancy for CCA and overlap queries.
struct ActiveTx {
    std::uint32_t sender = 0;
    int channel = 26;
    SimTime start = 0;
    SimTime end = 0;
    std::uint64_t flood_id = 0;
    std::uint64_t payload_tag = 0;
    std::uint64_t frame_ref = 0;  // stack-side handle
};

// Optional on/off external interferer, a square wave from t=0: ON during
// [k*period, k*period + duty*period).
struct InterferenceConfig {
    bool enabled = false;
    int channel = 26;
    Duration period = from_ms(10);
    double duty = 0.0;
    double power_dbm = -60.0;
};

// Shared radio medium for one run: active transmissions, energy queries and
// overlap lookups. Owned by the single-threaded engine; stacks register
// transmissions and resolve receptions themselves.
class Medium {
public:
    Medium(Engine& engine, const RadioMap& map, InterferenceConfig interference = {})
        : engine_(engine), map_(map), interference_(interference) {}

    void transmit(const ActiveTx& tx);

    // Total in-band power seen by `node` at time t from other senders plus
    // the external interferer, in mW.
    double busy_power_mw(std::uint32_t node, int channel, SimTime t,
                         std::uint32_t exclude_sender) const;

    // CCA: true iff busy power stays below the threshold.
    bool channel_clear(std::uint32_t node, int channel, SimTime t, double cca_threshold_dbm) const;

    // All transmissions on `channel` whose [start,end) intersects [t0,t1).
    std::vector<const ActiveTx*> overlapping(int channel, SimTime t0, SimTime t1,
                                             std::uint64_t exclude_frame_ref = 0) const;

    bool node_tx_overlaps(std::uint32_t node, SimTime t0, SimTime t1) const;

    double interference_mw(int channel, SimTime t0, SimTime t1) const;

    const RadioMap& radio_map() const { return map_; }

private:
    void prune(SimTime now) const;

    Engine& engine_;
    const RadioMap& map_;
    InterferenceConfig interference_;
    mutable std::deque<ActiveTx> active_;
};

}  // namespace meshroll
