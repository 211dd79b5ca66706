#include "phy/phy.hpp"

namespace meshroll {

namespace {

// Sensitivities are typical for the nRF52-class SoC; the overheads follow
// the uncoded/coded BLE framing and the 802.15.4 SHR+PHR.
const PhyProfile kProfiles[] = {
    {PhyKind::Ble2M, "ble2m", 2'000'000, 256, 10, -93.0, 500},
    {PhyKind::Ble1M, "ble1m", 1'000'000, 256, 10, -96.0, 1'000},
    {PhyKind::Ble500k, "ble500k", 500'000, 256, 22, -101.0, 2'000},
    {PhyKind::Ble125k, "ble125k", 125'000, 256, 22, -103.0, 8'000},
    {PhyKind::Ieee802154_250k, "ieee802154", 250'000, 127, 6, -100.0, 16'000},
};

}  // namespace

const PhyProfile& phy_profile(PhyKind kind) {
    return kProfiles[static_cast<int>(kind)];
}

PhyKind phy_from_name(const std::string& name) {
    for (const auto& p : kProfiles) {
        if (name == p.name) return p.kind;
    }
    throw std::runtime_error("unknown PHY profile: " + name);
}

Duration airtime(const PhyProfile& profile, int nbytes) {
    if (nbytes <= 0) {
        throw FragmentationError("airtime: payload must be positive");
    }
    if (nbytes > profile.mtu_bytes) {
        throw FragmentationError("airtime: " + std::to_string(nbytes) + " B exceeds " +
                                 std::to_string(profile.mtu_bytes) + " B MTU for " + profile.name);
    }
    std::int64_t bits = static_cast<std::int64_t>(profile.frame_overhead_bytes + nbytes) * 8;
    // 1e9 is divisible by every supported bitrate, so this is exact.
    return bits * (kSecond / profile.bitrate_bps);
}

double path_loss_db(double distance_m, const LinkBudget& budget) {
    if (distance_m < 1.0) distance_m = 1.0;
    return budget.pl0_at_1m_db + 10.0 * budget.path_loss_exponent * std::log10(distance_m);
}

double rx_power_dbm(double distance_m, const LinkBudget& budget) {
    return budget.tx_power_dbm + budget.fem_tx_gain_db - path_loss_db(distance_m, budget);
}

bool decodable(double rx_dbm, const PhyProfile& profile, const LinkBudget& budget) {
    return rx_dbm >= effective_sensitivity_dbm(profile, budget);
}

}  // namespace meshroll
