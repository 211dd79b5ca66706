#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "core/rng.hpp"
#include "phy/phy.hpp"
#include "topo/topology.hpp"

namespace meshroll {

// Frozen per-run radio geometry: log-distance path loss, a per-(link,
// channel) shadowing term (frequency-selective multipath, symmetric in the
// pair), and a per-node receive attenuation with a bounded tail (antenna
// placement / obstruction; this is what makes some lampposts "very low
// RSSI" nodes). All draws are keyed by run seed + ids, never by call order.
class RadioMap {
public:
    RadioMap(const Topology& topo, const LinkBudget& budget, std::uint64_t run_seed);

    double rx_dbm(std::uint32_t tx, std::uint32_t rx, int channel) const;
    // TX-side penalty of the node's own transmissions.
    double node_atten_db(std::uint32_t node) const { return atten_[node]; }
    double node_rx_atten_db(std::uint32_t node) const { return rx_atten_[node]; }
    std::size_t node_count() const { return n_; }

    // Senders' audible sets, per channel: receivers whose rx power is within
    // reach of the weakest usable threshold (a combining margin below the
    // best effective sensitivity).
    const std::vector<std::uint32_t>& neighbors(std::uint32_t tx, int channel) const;

    void set_reach_floor_dbm(double dbm);  // rebuilds neighbor lists lazily

private:
    double shadow_db(std::uint32_t a, std::uint32_t b, int channel) const;
    void build_neighbors(int channel) const;

    std::size_t n_;
    LinkBudget budget_;
    std::uint64_t seed_;
    double reach_floor_dbm_ = -130.0;
    std::vector<double> base_dbm_;   // tx+fem-pl per pair (no shadow/atten)
    std::vector<double> atten_;      // per sending node
    std::vector<double> rx_atten_;   // per receiving node
    mutable std::unordered_map<int, std::vector<double>> per_channel_;  // rx powers
    mutable std::unordered_map<int, std::vector<std::vector<std::uint32_t>>> neigh_;
};

}  // namespace meshroll
