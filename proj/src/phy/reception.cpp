#include "phy/reception.hpp"

#include <algorithm>
#include <cstdlib>

namespace meshroll {

Duration sync_tolerance(const ReceptionParams& params, const PhyProfile& profile) {
    if (params.sync_tolerance_ns > 0) return params.sync_tolerance_ns;
    return profile.symbol_time_ns / 2;
}

namespace {

struct Group {
    double sum_mw = 0.0;
    int strongest = -1;       // candidate index
    double strongest_dbm = -1e9;
};

}  // namespace

int resolve_reception(const std::vector<RxCandidate>& overlapping, RxMode mode,
                      const PhyProfile& profile, const LinkBudget& budget,
                      const ReceptionParams& params, double extra_interference_mw,
                      RngStream& fade_rng, double* winner_dbm_out) {
    if (overlapping.empty()) return -1;

    const double noise_mw = dbm_to_mw(budget.noise_floor_dbm) + extra_interference_mw;
    const double thresh_lin = std::pow(10.0, params.capture_threshold_db / 10.0);
    double total_mw = noise_mw;
    for (const auto& c : overlapping) total_mw += dbm_to_mw(c.rx_dbm);

    int winner = -1;
    double winner_dbm = 0.0;
    double winner_mw = 0.0;

    if (mode == RxMode::Capture) {
        int best = -1;
        for (std::size_t i = 0; i < overlapping.size(); ++i) {
            const auto& c = overlapping[i];
            // ties break toward the lower sender id for reproducibility
            if (best < 0 || c.rx_dbm > overlapping[best].rx_dbm ||
                (c.rx_dbm == overlapping[best].rx_dbm && c.sender < overlapping[best].sender)) {
                best = static_cast<int>(i);
            }
        }
        winner = best;
        winner_dbm = overlapping[best].rx_dbm;
        winner_mw = dbm_to_mw(winner_dbm);
    } else {
        // Partition into coherent groups: same flood id and payload, start
        // offsets within the sync tolerance of the group's anchor.
        // Stragglers become singleton groups (pure interferers).
        const Duration tol = sync_tolerance(params, profile);
        std::vector<Group> groups;
        std::vector<int> group_of(overlapping.size(), -1);
        std::vector<SimTime> anchor;
        std::vector<std::uint64_t> gflood, gtag;
        for (std::size_t i = 0; i < overlapping.size(); ++i) {
            const auto& c = overlapping[i];
            int g = -1;
            if (c.flood_id != 0) {
                for (std::size_t j = 0; j < groups.size(); ++j) {
                    if (gflood[j] == c.flood_id && gtag[j] == c.payload_tag &&
                        std::llabs(c.start - anchor[j]) <= tol) {
                        g = static_cast<int>(j);
                        break;
                    }
                }
            }
            if (g < 0) {
                g = static_cast<int>(groups.size());
                groups.push_back({});
                anchor.push_back(c.start);
                gflood.push_back(c.flood_id);
                gtag.push_back(c.flood_id != 0 ? c.payload_tag : ~std::uint64_t(i));
            }
            group_of[i] = g;
            double mw = dbm_to_mw(c.rx_dbm);
            groups[g].sum_mw += mw;
            if (groups[g].strongest < 0 || c.rx_dbm > groups[g].strongest_dbm ||
                (c.rx_dbm == groups[g].strongest_dbm &&
                 c.sender < overlapping[groups[g].strongest].sender)) {
                groups[g].strongest = static_cast<int>(i);
                groups[g].strongest_dbm = c.rx_dbm;
            }
        }
        int best_g = 0;
        for (std::size_t j = 1; j < groups.size(); ++j) {
            if (groups[j].sum_mw > groups[best_g].sum_mw) best_g = static_cast<int>(j);
        }
        winner = groups[best_g].strongest;
        winner_mw = groups[best_g].sum_mw;
        winner_dbm = mw_to_dbm(winner_mw);
    }

    if (!decodable(winner_dbm, profile, budget)) return -1;
    const double interference_mw = total_mw - winner_mw;
    if (winner_mw < interference_mw * thresh_lin) return -1;
    if (winner_dbm_out) *winner_dbm_out = winner_dbm;
    if (params.fade_loss_prob > 0.0 && fade_rng.bernoulli(params.fade_loss_prob)) return -1;
    return winner;
}

}  // namespace meshroll
