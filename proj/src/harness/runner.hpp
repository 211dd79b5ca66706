#pragma once

#include <optional>
#include <string>
#include <vector>

#include "app/rollout.hpp"
#include "harness/scenario.hpp"

namespace meshroll {

// One per-run aggregate, mirroring the large-scale comparison figures. All
// values are a pure fold over the per-consumer reports (+ side labels), so
// a summary can be recomputed bit-exactly from the node CSV.
struct KpiRecord {
    int consumers = 0;
    int unreachable = 0;  // never joined within the timeout
    int dropped = 0;      // joined, then fell out of the mesh at least once
    std::optional<double> mean_join_s;
    std::optional<double> max_goodput_bps;
    double mean_pdr = 0.0;
    // Dense/sparse split relative to the source.
    std::optional<double> mean_join_east_s;
    std::optional<double> mean_join_west_s;
    int dropped_east = 0;
    int dropped_west = 0;
    int unreachable_east = 0;
    int unreachable_west = 0;
};

struct NodeRow {
    ConsumerReport report;
    Side side = Side::East;
};

KpiRecord kpi_fold(const std::vector<NodeRow>& rows);

struct RunResult {
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::string axis_key;    // set by sweeps
    std::string axis_value;  // set by sweeps
    KpiRecord kpi;
    std::vector<NodeRow> nodes;
    std::string error;  // non-empty: the run failed and kpi/nodes are empty
    std::uint64_t trace_hash = 0;
    double csma_interval_ms = 0.0;  // as used (auto-calibrated or fixed)
    SimTime formation_end = 0;
};

RunResult run_scenario(const Scenario& scenario, std::uint64_t seed);

// Smallest injection interval (integer ms) that still delivers every packet
// on a clean 3-node chain at this scenario's PHY and frame sizing; applied
// network-wide when csma.interval_ms is left at auto.
Duration calibrate_interval(const Scenario& scenario, std::uint64_t seed);

// Cartesian product of axis values x seeds, run as independent simulations
// (optionally in parallel); failures are recorded per point and the sweep
// continues. Results arrive in deterministic (value, seed) order regardless
// of the worker count.
std::vector<RunResult> run_sweep(const Config& base, const std::string& axis_key,
                                 const std::vector<std::string>& values,
                                 const std::vector<std::uint64_t>& seeds, int parallel);

}  // namespace meshroll
