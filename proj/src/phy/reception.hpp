#pragma once

#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "core/time.hpp"
#include "phy/phy.hpp"

namespace meshroll {

// Knobs for resolving overlapping transmissions at one receiver. The
// concurrent-transmission physics is modelled abstractly, so all three are
// sweep-able scenario parameters.
struct ReceptionParams {
    double capture_threshold_db = 3.0;
    Duration sync_tolerance_ns = 0;  // 0 -> 0.5 * symbol time of the profile
    double fade_loss_prob = 0.02;    // independent per decoded frame
};

Duration sync_tolerance(const ReceptionParams& params, const PhyProfile& profile);

struct RxCandidate {
    std::uint32_t sender = 0;
    double rx_dbm = 0.0;
    SimTime start = 0;
    std::uint64_t flood_id = 0;     // 0: not part of a flood
    std::uint64_t payload_tag = 0;  // distinguishes differing payloads
};

enum class RxMode { Capture, Constructive };

// Resolves one set of time-overlapping transmissions on the receiver's
// channel. Returns the index of the decoded candidate, or -1 when nothing
// survives. At most one frame is decoded per call.
//
// Capture: the strongest frame wins iff it is decodable and its power beats
// noise + the linear sum of all other frames by the capture threshold.
//
// Constructive: frames sharing a flood id and payload, mutually offset by at
// most the sync tolerance, combine as a linear power sum. The strongest
// group wins iff the combined power is decodable and beats noise + all
// non-group power by the capture threshold. Differing payloads never
// combine, which degenerates to Capture.
//
// A winning frame is additionally dropped with fade_loss_prob (one draw from
// fade_rng, taken only when a decode would otherwise succeed). Because group
// power dominates any single member and non-group interference shrinks,
// Constructive's success set always contains Capture's on identical inputs.
//
// winner_dbm, when non-null, receives the decoded signal power (the group
// sum in Constructive mode) whenever a winner exists pre-fade.
int resolve_reception(const std::vector<RxCandidate>& overlapping, RxMode mode,
                      const PhyProfile& profile, const LinkBudget& budget,
                      const ReceptionParams& params, double extra_interference_mw,
                      RngStream& fade_rng, double* winner_dbm = nullptr);

}  // namespace meshroll
