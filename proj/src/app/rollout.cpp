#include "app/rollout.hpp"

#include <cstdio>
#include <cstdlib>

namespace meshroll {

void on_receive(RolloutState& state, const DataPacket& packet, SimTime now, bool checksum_ok) {
    const std::uint32_t seq = packet.seq;
    if (state.received_ids.count(seq)) return;  // duplicate delivery

    if (!checksum_ok) {
        state.lost_ids.insert(seq);
        return;
    }
    if (static_cast<std::int64_t>(seq) < state.last_seq_seen) {
        // Arrived out of order: its id already sits in the lost list and,
        // with zero retransmissions, stays there.
        return;
    }
    for (std::int64_t gap = state.last_seq_seen + 1; gap < static_cast<std::int64_t>(seq); ++gap) {
        state.lost_ids.insert(static_cast<std::uint32_t>(gap));
    }
    state.last_seq_seen = seq;
    state.lost_ids.erase(seq);  // a checksum-failed copy may have charged it
    state.received_ids.insert(seq);
    state.payload_bytes += packet.payload.size();
    if (!state.t_first) state.t_first = now;
    state.t_last = now;
    if (state.keep_payload) state.stored.emplace_back(seq, packet.payload);
}

double round6g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::strtod(buf, nullptr);
}

ConsumerReport finalize(RolloutState& state, std::uint32_t total_packets) {
    for (std::uint32_t seq = 0; seq < total_packets; ++seq) {
        if (!state.received_ids.count(seq)) state.lost_ids.insert(seq);
    }
    ConsumerReport report;
    report.received = static_cast<std::uint32_t>(state.received_ids.size());
    report.lost = static_cast<std::uint32_t>(state.lost_ids.size());
    report.pdr =
        total_packets == 0 ? 0.0 : round6g(static_cast<double>(report.received) / total_packets);
    if (report.received >= 2 && state.t_first && state.t_last && *state.t_last > *state.t_first) {
        double secs = to_s(*state.t_last - *state.t_first);
        report.goodput_bps = round6g(static_cast<double>(state.payload_bytes) * 8.0 / secs);
    }
    report.complete = report.received == total_packets && total_packets > 0;
    return report;
}

}  // namespace meshroll
