#include "medium/medium.hpp"

#include <algorithm>

namespace meshroll {

void Medium::transmit(const ActiveTx& tx) {
    prune(engine_.now());
    active_.push_back(tx);
}

void Medium::prune(SimTime now) const {
    // Keep a short history: end-of-frame resolution looks back at frames
    // that overlapped the one just finished.
    while (!active_.empty() && active_.front().end + from_ms(50) < now) active_.pop_front();
}

double Medium::busy_power_mw(std::uint32_t node, int channel, SimTime t,
                             std::uint32_t exclude_sender) const {
    double mw = 0.0;
    for (const auto& tx : active_) {
        if (tx.channel != channel || tx.sender == exclude_sender) continue;
        if (tx.start <= t && t < tx.end) mw += dbm_to_mw(map_.rx_dbm(tx.sender, node, channel));
    }
    mw += interference_mw(channel, t, t + 1);
    return mw;
}

bool Medium::channel_clear(std::uint32_t node, int channel, SimTime t,
                           double cca_threshold_dbm) const {
    return busy_power_mw(node, channel, t, node) < dbm_to_mw(cca_threshold_dbm);
}

std::vector<const ActiveTx*> Medium::overlapping(int channel, SimTime t0, SimTime t1,
                                                 std::uint64_t exclude_frame_ref) const {
    std::vector<const ActiveTx*> out;
    for (const auto& tx : active_) {
        if (tx.channel != channel) continue;
        if (exclude_frame_ref != 0 && tx.frame_ref == exclude_frame_ref) continue;
        if (tx.start < t1 && t0 < tx.end) out.push_back(&tx);
    }
    return out;
}

bool Medium::node_tx_overlaps(std::uint32_t node, SimTime t0, SimTime t1) const {
    for (const auto& tx : active_) {
        if (tx.sender == node && tx.start < t1 && t0 < tx.end) return true;
    }
    return false;
}

double Medium::interference_mw(int channel, SimTime t0, SimTime t1) const {
    if (!interference_.enabled || interference_.channel != channel || interference_.duty <= 0.0) {
        return 0.0;
    }
    if (interference_.duty >= 1.0) return dbm_to_mw(interference_.power_dbm);
    // Present if the ON phase intersects [t0, t1].
    const Duration period = interference_.period;
    const Duration on = static_cast<Duration>(static_cast<double>(period) * interference_.duty);
    SimTime k0 = t0 / period;
    for (SimTime k = k0; k * period <= t1; ++k) {
        SimTime on_start = k * period;
        SimTime on_end = on_start + on;
        if (on_start < t1 + 1 && t0 < on_end) return dbm_to_mw(interference_.power_dbm);
    }
    return 0.0;
}

}  // namespace meshroll
