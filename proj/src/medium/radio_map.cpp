#include "medium/radio_map.hpp"

#include <algorithm>
#include <cmath>

namespace meshroll {

RadioMap::RadioMap(const Topology& topo, const LinkBudget& budget, std::uint64_t run_seed)
    : n_(topo.nodes.size()), budget_(budget), seed_(run_seed) {
    base_dbm_.assign(n_ * n_, -300.0);
    for (std::uint32_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < n_; ++j) {
            if (i == j) continue;
            base_dbm_[i * n_ + j] = rx_power_dbm(topo.distance(i, j), budget_);
        }
    }
    rx_atten_.assign(n_, 0.0);
    if (budget_.rx_atten_max_db > 0.0) {
        for (std::uint32_t i = 0; i < n_; ++i) {
            if (topo.nodes[i].role == Role::Source) continue;
            auto rng = RngManager::derive(seed_, "rxatten", i);
            rx_atten_[i] = rng.uniform(0.0, budget_.rx_atten_max_db);
        }
    }
    atten_.assign(n_, 0.0);
    if (budget_.node_atten_prob > 0.0) {
        for (std::uint32_t i = 0; i < n_; ++i) {
            // The roll-out source is an operator-chosen healthy install.
            if (topo.nodes[i].role == Role::Source) continue;
            auto rng = RngManager::derive(seed_, "atten", i);
            if (rng.uniform() < budget_.node_atten_prob) {
                atten_[i] = rng.uniform(budget_.node_atten_min_db, budget_.node_atten_max_db);
            }
        }
    }
}

double RadioMap::shadow_db(std::uint32_t a, std::uint32_t b, int channel) const {
    if (budget_.shadow_sigma_db <= 0.0) return 0.0;
    std::uint32_t lo = std::min(a, b), hi = std::max(a, b);
    auto rng = RngManager::derive(seed_, "shadow", (std::uint64_t(lo) << 32) | hi,
                                  static_cast<std::uint64_t>(channel));
    return rng.normal(0.0, budget_.shadow_sigma_db);
}

double RadioMap::rx_dbm(std::uint32_t tx, std::uint32_t rx, int channel) const {
    auto it = per_channel_.find(channel);
    if (it == per_channel_.end()) {
        std::vector<double> m(n_ * n_, -300.0);
        for (std::uint32_t i = 0; i < n_; ++i) {
            for (std::uint32_t j = 0; j < n_; ++j) {
                if (i == j) continue;
                m[i * n_ + j] = base_dbm_[i * n_ + j] + shadow_db(i, j, channel) - atten_[i] - rx_atten_[j];
            }
        }
        it = per_channel_.emplace(channel, std::move(m)).first;
        build_neighbors(channel);
    }
    return it->second[tx * n_ + rx];
}

void RadioMap::build_neighbors(int channel) const {
    const auto& m = per_channel_.at(channel);
    std::vector<std::vector<std::uint32_t>> lists(n_);
    for (std::uint32_t i = 0; i < n_; ++i) {
        for (std::uint32_t j = 0; j < n_; ++j) {
            if (i != j && m[i * n_ + j] >= reach_floor_dbm_) lists[i].push_back(j);
        }
    }
    neigh_[channel] = std::move(lists);
}

const std::vector<std::uint32_t>& RadioMap::neighbors(std::uint32_t tx, int channel) const {
    if (!neigh_.count(channel)) rx_dbm(0, n_ > 1 ? 1 : 0, channel);  // force build
    return neigh_.at(channel)[tx];
}

void RadioMap::set_reach_floor_dbm(double dbm) {
    reach_floor_dbm_ = dbm;
    for (const auto& [ch, m] : per_channel_) {
        (void)m;
        build_neighbors(ch);
    }
}

}  // namespace meshroll
