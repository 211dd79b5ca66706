#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "phy/phy.hpp"
#include "phy/reception.hpp"

using namespace meshroll;
using doctest::Approx;

TEST_CASE("airtime matches the direct formula") {
    // 802.15.4: (6 + 127) * 8 / 250 kbps = 4.256 ms
    CHECK(airtime(phy_profile(PhyKind::Ieee802154_250k), 127) == 4'256'000);
    // BLE 2M: (10 + 256) * 8 / 2 Mbps = 1.064 ms
    CHECK(airtime(phy_profile(PhyKind::Ble2M), 256) == 1'064'000);
    CHECK_THROWS_AS(airtime(phy_profile(PhyKind::Ble2M), 300), FragmentationError);
    CHECK_THROWS_AS(airtime(phy_profile(PhyKind::Ieee802154_250k), 128), FragmentationError);
}

TEST_CASE("airtime is linear in nbytes with slope 8/bitrate") {
    for (auto kind : {PhyKind::Ble2M, PhyKind::Ble1M, PhyKind::Ble500k, PhyKind::Ble125k,
                      PhyKind::Ieee802154_250k}) {
        const auto& p = phy_profile(kind);
        Duration slope = airtime(p, 2) - airtime(p, 1);
        CHECK(slope == 8 * kSecond / p.bitrate_bps);
        Duration base = airtime(p, 1);
        for (int n = 2; n <= p.mtu_bytes; n += 13) {
            CHECK(airtime(p, n) == base + slope * (n - 1));
        }
    }
}

TEST_CASE("path loss: reference point, derived value, decade symmetry") {
    LinkBudget budget;  // pl0 40, exponent 2.9
    CHECK(path_loss_db(1.0, budget) == Approx(40.0));
    // 40 + 29*log10(87) = 96.25 dB (independent calculator)
    CHECK(path_loss_db(87.0, budget) == Approx(96.2476).epsilon(1e-4));
    CHECK(path_loss_db(100.0, budget) - path_loss_db(10.0, budget) == Approx(29.0));
    // sub-metre distances clamp to the 1 m reference
    CHECK(path_loss_db(0.0, budget) == Approx(40.0));
}

TEST_CASE("rx power composes budget terms") {
    LinkBudget budget;
    CHECK(rx_power_dbm(87.0, budget) == Approx(0.0 + 22.0 - 96.2476).epsilon(1e-4));
    LinkBudget no_gain = budget;
    no_gain.fem_tx_gain_db = 0.0;
    CHECK(rx_power_dbm(1.0, no_gain) == Approx(budget.tx_power_dbm - 40.0));
    // an overall gain shift moves every link equally
    LinkBudget boosted = budget;
    boosted.fem_tx_gain_db = 44.0;
    for (double d : {10.0, 87.0, 400.0}) {
        CHECK(rx_power_dbm(d, boosted) - rx_power_dbm(d, budget) == Approx(22.0));
    }
}

TEST_CASE("decodable: threshold arithmetic, boundary inclusive, monotone") {
    LinkBudget budget;  // fem_rx 6
    const auto& p154 = phy_profile(PhyKind::Ieee802154_250k);  // base -100
    CHECK(effective_sensitivity_dbm(p154, budget) == Approx(-106.0));
    const auto& p1m = phy_profile(PhyKind::Ble1M);  // base -96
    CHECK(decodable(-99.0, p1m, budget));           // effective -102
    CHECK(decodable(-102.0, p1m, budget));          // exactly at threshold
    CHECK_FALSE(decodable(-102.001, p1m, budget));
    LinkBudget no_fem = budget;
    no_fem.fem_rx_gain_db = 0.0;
    CHECK_FALSE(decodable(-99.0, p1m, no_fem));
    // monotone in rx power
    for (double r = -120.0; r < -80.0; r += 0.5) {
        if (decodable(r, p1m, budget)) CHECK(decodable(r + 0.5, p1m, budget));
    }
}

TEST_CASE("range doubling: FEM gains buy at least 2x reach") {
    LinkBudget with_fem;  // 22 dB TX, 6 dB RX, exponent 2.9
    LinkBudget without = with_fem;
    without.fem_tx_gain_db = 0.0;
    without.fem_rx_gain_db = 0.0;
    const auto& profile = phy_profile(PhyKind::Ieee802154_250k);
    auto max_range = [&](const LinkBudget& b) {
        double d = 1.0;
        while (decodable(rx_power_dbm(d, b), profile, b) && d < 1e7) d *= 1.01;
        return d;
    };
    double factor = max_range(with_fem) / max_range(without);
    CHECK(factor > 2.0);
    // 28 dB of combined budget at exponent 2.9 is close to a decade
    CHECK(factor == Approx(std::pow(10.0, 28.0 / 29.0)).epsilon(0.02));
}

namespace {

RxCandidate cand(std::uint32_t sender, double dbm, std::uint64_t flood = 0,
                 std::uint64_t tag = 0, SimTime start = 0) {
    return RxCandidate{sender, dbm, start, flood, tag};
}

struct Fixture {
    LinkBudget budget;          // noise -120 dBm
    ReceptionParams params;     // capture 3 dB
    const PhyProfile& profile = phy_profile(PhyKind::Ble1M);  // eff. sens -102
    RngStream rng = RngManager::derive(11, "fade-test");
    Fixture() { params.fade_loss_prob = 0.0; }
    int resolve(const std::vector<RxCandidate>& c, RxMode mode) {
        return resolve_reception(c, mode, profile, budget, params, 0.0, rng);
    }
};

}  // namespace

TEST_CASE("resolve_reception: single frame above sensitivity decodes") {
    Fixture f;
    CHECK(f.resolve({cand(1, -90.0)}, RxMode::Capture) == 0);
    CHECK(f.resolve({cand(1, -90.0)}, RxMode::Constructive) == 0);
    CHECK(f.resolve({cand(1, -105.0)}, RxMode::Capture) == -1);  // below -102
    CHECK(f.resolve({}, RxMode::Capture) == -1);
}

TEST_CASE("resolve_reception: symmetric capture fails, both frames lost") {
    Fixture f;
    CHECK(f.resolve({cand(1, -80.0, 0, 1), cand(2, -80.0, 0, 2)}, RxMode::Capture) == -1);
    // 6 dB of dominance beats the 3 dB threshold
    CHECK(f.resolve({cand(1, -80.0, 0, 1), cand(2, -86.0, 0, 2)}, RxMode::Capture) == 0);
}

TEST_CASE("resolve_reception: coherent sum lifts two weak frames over the floor") {
    Fixture f;
    // two -105 dBm copies, individually below -102: combined
    // 10*log10(2*10^-10.5) = -101.99 dBm, decodable
    auto got = f.resolve({cand(1, -105.0, 7, 1), cand(2, -105.0, 7, 1)}, RxMode::Constructive);
    CHECK(got >= 0);
    // capture mode on the same inputs fails both
    CHECK(f.resolve({cand(1, -105.0, 7, 1), cand(2, -105.0, 7, 1)}, RxMode::Capture) == -1);
    // differing payloads never combine
    CHECK(f.resolve({cand(1, -105.0, 7, 1), cand(2, -105.0, 7, 2)}, RxMode::Constructive) == -1);
}

TEST_CASE("resolve_reception: flood group must beat non-flood interference") {
    Fixture f;
    // combined flood power -79.0+3.01 = -76 dBm vs -75 dBm interferer: short
    // of the 3 dB margin
    CHECK(f.resolve({cand(1, -79.0, 7, 1), cand(2, -79.0, 7, 1), cand(3, -75.0)},
                    RxMode::Constructive) == -1);
    // with a -85 dBm interferer the group clears it
    auto got =
        f.resolve({cand(1, -79.0, 7, 1), cand(2, -79.0, 7, 1), cand(3, -85.0)}, RxMode::Constructive);
    CHECK(got >= 0);
}

TEST_CASE("resolve_reception: stragglers outside sync tolerance fall out of the group") {
    Fixture f;
    Duration tol = sync_tolerance(f.params, f.profile);  // 0.5 us for BLE 1M
    // Three aligned copies combine to -101.99 + 1.76 dB and decode easily.
    CHECK(f.resolve({cand(1, -105.0, 7, 1, 0), cand(2, -105.0, 7, 1, 0),
                     cand(3, -105.0, 7, 1, tol / 2)},
                    RxMode::Constructive) >= 0);
    // A late third copy degrades into interference: the remaining pair at
    // -101.99 dBm only clears it by 2.9 dB, under the 3 dB threshold.
    CHECK(f.resolve({cand(1, -105.0, 7, 1, 0), cand(2, -105.0, 7, 1, 0),
                     cand(3, -105.0, 7, 1, tol * 10)},
                    RxMode::Constructive) == -1);
}

TEST_CASE("constructive success set contains capture success set (1000 instances)") {
    Fixture f;
    auto rng = RngManager::derive(99, "prop");
    int capture_wins = 0, constructive_wins = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + rng.uniform_u32(6);
        std::vector<RxCandidate> set;
        for (int i = 0; i < n; ++i) {
            double dbm = -110.0 + rng.uniform(0.0, 25.0);
            std::uint64_t flood = rng.uniform_u32(3);           // 0: plain interferer
            std::uint64_t tag = flood ? 1 + rng.uniform_u32(2) : 0;
            SimTime start = rng.uniform_u32(2) ? 0 : 100;        // some stragglers
            set.push_back(cand(static_cast<std::uint32_t>(i), dbm, flood, tag, start));
        }
        bool cap = f.resolve(set, RxMode::Capture) >= 0;
        bool con = f.resolve(set, RxMode::Constructive) >= 0;
        if (cap) {
            ++capture_wins;
            CHECK(con);  // adding coherent power never removes a decode
        }
        if (con) ++constructive_wins;
    }
    CHECK(capture_wins > 100);                  // the property was actually exercised
    CHECK(constructive_wins >= capture_wins);
}

TEST_CASE("fade draw only fires on otherwise-successful decodes") {
    Fixture f;
    f.params.fade_loss_prob = 1.0;  // every decode fades away
    CHECK(f.resolve({cand(1, -80.0)}, RxMode::Capture) == -1);
    f.params.fade_loss_prob = 0.0;
    CHECK(f.resolve({cand(1, -80.0)}, RxMode::Capture) == 0);
}

TEST_CASE("channel grid maps 11..26 onto 2.4 GHz") {
    CHECK(Channel{11}.center_freq_mhz() == Approx(2405.0));
    CHECK(Channel{26}.center_freq_mhz() == Approx(2480.0));
}
