#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "core/time.hpp"

namespace meshroll {

enum class PhyKind { Ble2M, Ble1M, Ble500k, Ble125k, Ieee802154_250k };

// One radio mode. bitrate is the effective (post-coding) rate, so airtime is
// simply bits / bitrate; coded-PHY preamble expansion is folded into the
// frame overhead.
struct PhyProfile {
    PhyKind kind;
    const char* name;
    std::int64_t bitrate_bps;
    int mtu_bytes;
    int frame_overhead_bytes;     // preamble + PHY header, charged on air
    double base_sensitivity_dbm;  // before the FEM's RX gain
    Duration symbol_time_ns;
};

const PhyProfile& phy_profile(PhyKind kind);
PhyKind phy_from_name(const std::string& name);  // throws on unknown name

class FragmentationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// (overhead + nbytes) * 8 / bitrate, exact in integer nanoseconds for every
// supported bitrate. Throws FragmentationError when nbytes exceeds the MTU.
Duration airtime(const PhyProfile& profile, int nbytes);

// IEEE 802.15.4 2.4 GHz grid; BLE profiles are mapped onto the same 16
// channels (11..26).
struct Channel {
    int index = 26;
    double center_freq_mhz() const { return 2405.0 + 5.0 * (index - 11); }
};
constexpr int kChannelMin = 11;
constexpr int kChannelMax = 26;

// Path loss model plus the RF front-end gains. Shadowing sigma and the
// per-node attenuation spread are link-budget knobs too; every value here
// is scenario-configurable.
struct LinkBudget {
    double tx_power_dbm = 0.0;
    double fem_tx_gain_db = 22.0;
    double fem_rx_gain_db = 6.0;
    double path_loss_exponent = 2.9;
    double pl0_at_1m_db = 40.0;
    double noise_floor_dbm = -120.0;
    double shadow_sigma_db = 0.0;  // per (link, channel), frozen per run
    // A fraction of installations suffer an obstructed or detuned antenna:
    // their transmissions carry a bounded uniform penalty, everyone else
    // stays clean. Weak-TX nodes still hear the mesh but are hard to hear,
    // which is what strands them under bidirectional route admission.
    // Default off.
    double node_atten_prob = 0.0;
    double node_atten_min_db = 0.0;
    double node_atten_max_db = 0.0;
    // Mild per-node receive degradation, uniform over [0, max] for every
    // consumer: mounting height, cable and connector spread. Default off.
    double rx_atten_max_db = 0.0;
};

// pl0 + 10 n log10(d); distances under 1 m clamp to the reference point
// (co-located lab preset).
double path_loss_db(double distance_m, const LinkBudget& budget);

double rx_power_dbm(double distance_m, const LinkBudget& budget);

// rx >= base sensitivity - FEM RX gain (boundary inclusive).
bool decodable(double rx_dbm, const PhyProfile& profile, const LinkBudget& budget);

inline double effective_sensitivity_dbm(const PhyProfile& profile, const LinkBudget& budget) {
    return profile.base_sensitivity_dbm - budget.fem_rx_gain_db;
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

}  // namespace meshroll
