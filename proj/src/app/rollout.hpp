#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "app/firmware.hpp"
#include "core/time.hpp"

namespace meshroll {

// Per-consumer reception accounting: the two id lists plus the stopwatch.
// With retransmissions fixed at zero, a skipped or out-of-order id is lost
// for good; all anomalies are data, not faults.
struct RolloutState {
    std::set<std::uint32_t> received_ids;
    std::set<std::uint32_t> lost_ids;
    std::optional<SimTime> t_first;
    std::optional<SimTime> t_last;
    std::int64_t last_seq_seen = -1;  // highest good seq so far
    std::uint64_t payload_bytes = 0;
    bool keep_payload = false;  // tests: retain bytes for reassembly checks
    std::vector<std::pair<std::uint32_t, std::vector<std::uint8_t>>> stored;
};

// Gap rule: ids skipped between the last good packet and this one go to the
// lost list; a packet older than the watermark stays lost (no recovery);
// duplicates are ignored; checksum failures count the id as lost without
// moving the watermark.
void on_receive(RolloutState& state, const DataPacket& packet, SimTime now, bool checksum_ok);

struct ConsumerReport {
    std::uint32_t node_id = 0;
    std::optional<double> joined_at_s;
    double pdr = 0.0;
    std::optional<double> goodput_bps;  // needs >= 2 received packets
    bool complete = false;
    bool dropped = false;  // left the mesh at some point during the roll-out
    std::uint32_t received = 0;
    std::uint32_t lost = 0;
};

// Charges every never-observed id to the lost list (the drain timeout has
// passed), then computes PDR and the stopwatch goodput. Numeric fields are
// normalized to 6 significant digits so CSV round-trips are exact.
ConsumerReport finalize(RolloutState& state, std::uint32_t total_packets);

double round6g(double v);

}  // namespace meshroll
