#include "stacks/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace meshroll {

Duration slot_len(const FloodConfig& config) {
    const auto& profile = phy_profile(config.phy);
    return airtime(profile, profile.mtu_bytes) + config.guard;
}

Duration ctl_slot_len(const FloodConfig& config) {
    const auto& profile = phy_profile(config.phy);
    return airtime(profile, config.ctl_payload_bytes) + config.guard;
}

int channel_for(const FloodConfig& config, std::int64_t period_index, int slot_index) {
    if (config.hop_channels.empty()) throw std::runtime_error("hop_channels is empty");
    std::size_t n = config.hop_channels.size();
    std::size_t idx = config.hop_per_slot
                          ? static_cast<std::size_t>(period_index + slot_index) % n
                          : static_cast<std::size_t>(period_index) % n;
    return config.hop_channels[idx];
}

PeriodBudget period_budget(const FloodConfig& config) {
    Duration ceiling = static_cast<Duration>(config.sync_slots + config.max_slots) * slot_len(config);
    if (ceiling <= config.period) return PeriodBudget::Ok;
    const Duration ctl = ctl_slot_len(config);
    const Duration data = slot_len(config);
    if ((config.sync_slots + 1) * ctl + data <= config.period) return PeriodBudget::Tight;
    return PeriodBudget::Infeasible;
}

PeriodPlan plan_period(const FloodConfig& config) {
    PeriodPlan plan;
    plan.ctl_slot = ctl_slot_len(config);
    plan.data_slot = slot_len(config);
    for (int w = config.max_slots; w >= 1; --w) {
        Duration need = static_cast<Duration>(config.sync_slots + w) * plan.ctl_slot +
                        static_cast<Duration>(w) * plan.data_slot;
        if (need <= config.period) {
            plan.data_slots = w;
            plan.ctl_slots = config.sync_slots + w;
            plan.data_start = static_cast<Duration>(plan.ctl_slots) * plan.ctl_slot;
            return plan;
        }
    }
    throw std::runtime_error("period too short for even one data slot at this PHY");
}

AtomicStack::AtomicStack(Engine& engine, Medium& medium, const Topology& topo,
                         const FloodConfig& config, const LinkBudget& budget,
                         const ReceptionParams& rx_params, std::uint64_t run_seed)
    : engine_(engine),
      medium_(medium),
      topo_(topo),
      config_(config),
      profile_(phy_profile(config.phy)),
      budget_(budget),
      rx_params_(rx_params),
      seed_(run_seed),
      rng_(run_seed),
      plan_(plan_period(config)),
      source_(topo.source_id()),
      nodes_(topo.nodes.size()) {
    if (config_.max_tx < 1 || config_.max_slots < 1 || config_.sync_slots < 0) {
        throw std::runtime_error("invalid flood config");
    }
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        auto rng = RngManager::derive(seed_, "drift", i);
        nodes_[i].drift_ppm = config_.drift_ppm_max > 0.0
                                  ? rng.uniform(-config_.drift_ppm_max, config_.drift_ppm_max)
                                  : 0.0;
    }
    // The initiator owns the schedule and is the time reference.
    nodes_[source_].synced = true;
    nodes_[source_].joined_at = 0;
    nodes_[source_].drift_ppm = 0.0;
}

bool AtomicStack::all_consumers_joined() const {
    for (const auto& n : topo_.nodes) {
        if (n.role != Role::Consumer || n.indoor) continue;
        if (!nodes_[n.id].joined_at) return false;
    }
    return true;
}

void AtomicStack::force_sync_all() {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i].synced = true;
        nodes_[i].last_sync = engine_.now();
        if (!nodes_[i].joined_at) nodes_[i].joined_at = engine_.now();
    }
}

bool AtomicStack::rx_gate_ok(std::uint32_t id, SimTime t) const {
    const auto& st = nodes_[id];
    if (!st.synced) return true;  // scanning: wide listen window
    double offset_ns = st.drift_ppm * 1e-6 * static_cast<double>(t - st.last_sync);
    return std::fabs(offset_ns) <= static_cast<double>(config_.guard) / 2.0;
}

int AtomicStack::camp_channel(std::uint32_t id, SimTime t) const {
    // Scanning nodes camp on a random hop channel, one dwell per period
    // length, with a per-node phase so dwells do not lock step with the
    // flood schedule.
    auto phase_rng = RngManager::derive(seed_, "scanphase", id);
    auto phase = static_cast<SimTime>(phase_rng.uniform() * static_cast<double>(config_.period));
    std::uint64_t dwell = static_cast<std::uint64_t>((t + phase) / config_.period);
    auto rng = RngManager::derive(seed_, "scan", id, dwell);
    return config_.hop_channels[rng.uniform_u32(
        static_cast<std::uint32_t>(config_.hop_channels.size()))];
}

FloodResult AtomicStack::run_flood_at(SimTime t0, std::uint32_t initiator, int window_slots,
                                      int max_tx, int channel, int frame_bytes, Duration slot,
                                      bool control, const DataPacket* packet,
                                      std::int64_t period_index) {
    FloodResult result;
    result.nodes.resize(nodes_.size());
    result.initiator = initiator;
    result.flood_id = next_flood_id_++;
    const std::uint64_t payload_tag = packet ? (std::uint64_t(packet->seq) + 1) : result.flood_id;
    const Duration on_air = airtime(profile_, frame_bytes);
    const double eff_sens = effective_sensitivity_dbm(profile_, budget_);

    // tx_until[i]: one past the last slot node i repeats in.
    std::vector<int> tx_from(nodes_.size(), -1);
    std::vector<int> tx_until(nodes_.size(), -1);
    tx_from[initiator] = 0;
    tx_until[initiator] = std::min(max_tx, window_slots);

    std::vector<std::uint32_t> transmitters;
    std::vector<RxCandidate> candidates;

    for (int s = 0; s < window_slots; ++s) {
        const SimTime slot_start = t0 + static_cast<Duration>(s) * slot;
        const int ch = config_.hop_per_slot ? channel_for(config_, period_index, s) : channel;

        transmitters.clear();
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            if (tx_from[i] >= 0 && tx_from[i] <= s && s < tx_until[i]) transmitters.push_back(i);
        }
        if (transmitters.empty()) break;  // flood died or completed early

        for (std::uint32_t tx : transmitters) {
            medium_.transmit(ActiveTx{tx, ch, slot_start, slot_start + on_air, result.flood_id,
                                      payload_tag, result.flood_id * 1000 + s});
            result.nodes[tx].tx_slots++;
        }

        // Candidate listeners: anyone audible from a transmitter that has
        // not yet received this flood.
        std::unordered_set<std::uint32_t> listeners;
        for (std::uint32_t tx : transmitters) {
            for (std::uint32_t nb : medium_.radio_map().neighbors(tx, ch)) {
                if (tx_from[nb] < 0 && result.nodes[nb].first_rx_slot < 0) listeners.insert(nb);
            }
        }
        std::vector<std::uint32_t> ordered(listeners.begin(), listeners.end());
        std::sort(ordered.begin(), ordered.end());

        const SimTime rx_done = slot_start + on_air;
        const double interference = medium_.interference_mw(ch, slot_start, rx_done);

        for (std::uint32_t lst : ordered) {
            const auto& st = nodes_[lst];
            const auto& node_spec = topo_.nodes[lst];
            if (node_spec.indoor) continue;
            if (control) {
                // Synced nodes follow the schedule (subject to clock drift);
                // unsynced ones must be camped on this channel.
                if (st.synced) {
                    if (!rx_gate_ok(lst, slot_start)) continue;
                } else if (camp_channel(lst, slot_start) != ch) {
                    continue;
                }
            } else {
                if (!st.synced || !rx_gate_ok(lst, slot_start)) continue;
            }

            candidates.clear();
            for (std::uint32_t tx : transmitters) {
                candidates.push_back(RxCandidate{tx, medium_.radio_map().rx_dbm(tx, lst, ch),
                                                 slot_start, result.flood_id, payload_tag});
            }
            double winner_dbm = 0.0;
            int winner = resolve_reception(candidates, RxMode::Constructive, profile_, budget_,
                                           rx_params_, interference, rng_.stream("fade", lst),
                                           &winner_dbm);
            if (winner < 0) continue;
            if (control && config_.ctl_margin_db > 0.0) {
                // Cold acquisition of the short timing beacon: detection
                // probability ramps from zero at plain sensitivity to one
                // at ctl_margin above it.
                double p = (winner_dbm - eff_sens) / config_.ctl_margin_db;
                if (p < 1.0 && !rng_.stream("acq", lst).bernoulli(p)) continue;
            }

            result.nodes[lst].first_rx_slot = s;
            tx_from[lst] = s + 1;
            tx_until[lst] = std::min(s + 1 + max_tx, window_slots);

            if (control) {
                auto& mst = nodes_[lst];
                mst.synced = true;
                if (mst.dropped) mst.dropped = false;
                mst.missed_control = 0;
                mst.last_sync = rx_done;
                if (!mst.joined_at) mst.joined_at = rx_done;
            } else if (packet && deliver_ && node_spec.role == Role::Consumer) {
                deliver_(lst, *packet, rx_done);
            }
        }
    }
    return result;
}

void AtomicStack::run_period(std::int64_t p) {
    const SimTime t0 = static_cast<SimTime>(p) * config_.period;
    const int ch = channel_for(config_, p, 0);

    if (!dissem_start_ && (all_consumers_joined() || t0 >= join_timeout_)) {
        dissem_start_ = t0;
    }

    // Control flood: beacon from the schedule owner.
    auto ctl = run_flood_at(t0, source_, plan_.ctl_slots, config_.ctl_max_tx, ch,
                            config_.ctl_payload_bytes, plan_.ctl_slot, true, nullptr, p);
    for (const auto& n : topo_.nodes) {
        auto& st = nodes_[n.id];
        if (n.id == source_ || !st.synced) continue;
        if (ctl.nodes[n.id].first_rx_slot < 0) {
            if (++st.missed_control > config_.desync_limit) {
                st.synced = false;
                st.dropped = true;
                st.ever_dropped = true;
            }
        }
    }

    // Data flood: one packet per period once dissemination is open.
    if (dissem_start_ && next_packet_ < packets_.size()) {
        const DataPacket& pkt = packets_[next_packet_++];
        const int frame = DataPacket::kHeaderBytes + static_cast<int>(pkt.payload.size());
        run_flood_at(t0 + plan_.data_start, source_, plan_.data_slots, config_.max_tx, ch, frame,
                     plan_.data_slot, false, &pkt, p);
        last_inject_ = t0 + plan_.data_start;
    }

    // Keep flooding control during the drain so late re-syncs stay possible.
    bool done = false;
    if (dissem_start_ && next_packet_ >= packets_.size()) {
        SimTime ref = last_inject_ ? *last_inject_ : *dissem_start_;
        done = t0 + config_.period > ref + drain_;
    }
    if (!done) schedule_period(p + 1);
}

void AtomicStack::schedule_period(std::int64_t p) {
    engine_.schedule(static_cast<SimTime>(p) * config_.period, "atomic", "period",
                     [this, p] { run_period(p); });
}

void AtomicStack::start(SimTime join_timeout, Duration drain) {
    join_timeout_ = join_timeout;
    drain_ = drain;
    schedule_period(0);
}

}  // namespace meshroll
