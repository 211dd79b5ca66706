// extern-C face of the simulator core. Exceptions stop here and turn into
// status codes plus a thread-local message.

#include "meshroll.h"

#include <cstring>
#include <string>

#include "harness/emit.hpp"
#include "harness/runner.hpp"
#include "harness/scenario.hpp"

using namespace meshroll;

struct mr_scenario {
    Config config;
};

struct mr_result {
    std::vector<RunResult> runs;
};

namespace {

thread_local std::string t_last_error;

mr_status fail(mr_status code, const char* what) {
    t_last_error = what;
    return code;
}

mr_status classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return fail(MR_ERR_PARSE, e.what());
    if (dynamic_cast<const ValidationError*>(&e)) return fail(MR_ERR_VALIDATION, e.what());
    if (dynamic_cast<const TopologyError*>(&e)) return fail(MR_ERR_VALIDATION, e.what());
    if (dynamic_cast<const EmitError*>(&e)) return fail(MR_ERR_IO, e.what());
    return fail(MR_ERR_RUNTIME, e.what());
}

bool bad(const void* p) { return p == nullptr; }

}  // namespace

extern "C" {

const char* mr_version(void) { return "0.1.0"; }

const char* mr_last_error(void) { return t_last_error.c_str(); }

mr_status mr_scenario_from_file(const char* path, mr_scenario** out) {
    if (bad(path) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Config cfg = Config::parse_file(path);
        Scenario::from_config(cfg);  // validate eagerly
        *out = new mr_scenario{std::move(cfg)};
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_scenario_from_string(const char* text, mr_scenario** out) {
    if (bad(text) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Config cfg = Config::parse_string(text);
        Scenario::from_config(cfg);
        *out = new mr_scenario{std::move(cfg)};
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_scenario_from_preset(const char* name, mr_scenario** out) {
    if (bad(name) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Config cfg = scenario_preset(name);
        Scenario::from_config(cfg);
        *out = new mr_scenario{std::move(cfg)};
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_scenario_set(mr_scenario* sc, const char* key, const char* value) {
    if (bad(sc) || bad(key) || bad(value)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Config copy = sc->config;
        copy.set(key, value);
        Scenario::from_config(copy);  // reject inconsistent updates atomically
        sc->config = std::move(copy);
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_scenario_echo(const mr_scenario* sc, char* buf, size_t buflen, size_t* need) {
    if (bad(sc) || bad(need)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        std::string echo = sc->config.serialize();
        *need = echo.size() + 1;
        if (buf && buflen > 0) {
            size_t n = buflen - 1 < echo.size() ? buflen - 1 : echo.size();
            std::memcpy(buf, echo.data(), n);
            buf[n] = '\0';
        }
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

void mr_scenario_free(mr_scenario* sc) { delete sc; }

mr_status mr_topology_generate(const char* preset, uint64_t seed, const char* out_path) {
    if (bad(preset) || bad(out_path)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        auto rng = RngManager::derive(seed, "topology");
        Topology topo = topology_preset(preset, rng);
        topo.save(out_path);
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_topology_validate(const char* path) {
    if (bad(path)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        load_topology(path);
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_run(const mr_scenario* sc, uint64_t seed, mr_result** out) {
    if (bad(sc) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Scenario scenario = Scenario::from_config(sc->config);
        auto res = new mr_result;
        res->runs.push_back(run_scenario(scenario, seed));
        *out = res;
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_sweep(const mr_scenario* sc, const char* axis_key, const char* const* values,
                   size_t nvalues, const uint64_t* seeds, size_t nseeds, int parallel,
                   mr_result** out) {
    if (bad(sc) || bad(axis_key) || bad(values) || bad(seeds) || bad(out) || nvalues == 0 ||
        nseeds == 0) {
        return fail(MR_ERR_INVALID_ARGUMENT, "null or empty sweep argument");
    }
    try {
        std::vector<std::string> vals(values, values + nvalues);
        std::vector<std::uint64_t> sds(seeds, seeds + nseeds);
        auto res = new mr_result;
        res->runs = run_sweep(sc->config, axis_key, vals, sds, parallel);
        *out = res;
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_calibrate_interval(const mr_scenario* sc, uint64_t seed, double* out_ms) {
    if (bad(sc) || bad(out_ms)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        Scenario scenario = Scenario::from_config(sc->config);
        if (scenario.stack == StackKind::Atomic) {
            return fail(MR_ERR_VALIDATION, "interval calibration applies to CSMA stacks");
        }
        *out_ms = to_ms(calibrate_interval(scenario, seed));
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

size_t mr_result_rows(const mr_result* res) { return res ? res->runs.size() : 0; }

mr_status mr_result_kpi(const mr_result* res, size_t row, mr_kpi kpi, double* out, int* defined) {
    if (bad(res) || bad(out) || bad(defined)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    if (row >= res->runs.size()) return fail(MR_ERR_INVALID_ARGUMENT, "row out of range");
    const RunResult& run = res->runs[row];
    *defined = 0;
    if (!run.error.empty()) return MR_OK;
    auto set = [&](double v) {
        *out = v;
        *defined = 1;
    };
    auto set_opt = [&](const std::optional<double>& v) {
        if (v) set(*v);
    };
    switch (kpi) {
        case MR_KPI_CONSUMERS: set(run.kpi.consumers); break;
        case MR_KPI_UNREACHABLE: set(run.kpi.unreachable); break;
        case MR_KPI_MEAN_JOIN_S: set_opt(run.kpi.mean_join_s); break;
        case MR_KPI_MEAN_PDR: set(run.kpi.mean_pdr); break;
        case MR_KPI_MAX_GOODPUT_BPS: set_opt(run.kpi.max_goodput_bps); break;
        case MR_KPI_DROPPED: set(run.kpi.dropped); break;
        case MR_KPI_MEAN_JOIN_EAST_S: set_opt(run.kpi.mean_join_east_s); break;
        case MR_KPI_MEAN_JOIN_WEST_S: set_opt(run.kpi.mean_join_west_s); break;
        case MR_KPI_DROPPED_EAST: set(run.kpi.dropped_east); break;
        case MR_KPI_DROPPED_WEST: set(run.kpi.dropped_west); break;
        case MR_KPI_CSMA_INTERVAL_MS: set(run.csma_interval_ms); break;
        default: return fail(MR_ERR_INVALID_ARGUMENT, "unknown KPI id");
    }
    return MR_OK;
}

mr_status mr_result_trace_hash(const mr_result* res, size_t row, uint64_t* out) {
    if (bad(res) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    if (row >= res->runs.size()) return fail(MR_ERR_INVALID_ARGUMENT, "row out of range");
    *out = res->runs[row].trace_hash;
    return MR_OK;
}

const char* mr_result_error(const mr_result* res, size_t row) {
    if (!res || row >= res->runs.size()) return "invalid row";
    return res->runs[row].error.c_str();
}

const char* mr_result_axis_value(const mr_result* res, size_t row) {
    if (!res || row >= res->runs.size()) return "";
    return res->runs[row].axis_value.c_str();
}

mr_status mr_result_seed(const mr_result* res, size_t row, uint64_t* out) {
    if (bad(res) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    if (row >= res->runs.size()) return fail(MR_ERR_INVALID_ARGUMENT, "row out of range");
    *out = res->runs[row].seed;
    return MR_OK;
}

mr_status mr_result_node_count(const mr_result* res, size_t row, size_t* out) {
    if (bad(res) || bad(out)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    if (row >= res->runs.size()) return fail(MR_ERR_INVALID_ARGUMENT, "row out of range");
    *out = res->runs[row].nodes.size();
    return MR_OK;
}

mr_status mr_result_node(const mr_result* res, size_t row, size_t idx, uint32_t* node_id,
                         int* side_west, double* joined_s, double* pdr, double* goodput_bps,
                         int* complete, int* dropped) {
    if (bad(res)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    if (row >= res->runs.size()) return fail(MR_ERR_INVALID_ARGUMENT, "row out of range");
    const auto& nodes = res->runs[row].nodes;
    if (idx >= nodes.size()) return fail(MR_ERR_INVALID_ARGUMENT, "node index out of range");
    const NodeRow& n = nodes[idx];
    if (node_id) *node_id = n.report.node_id;
    if (side_west) *side_west = n.side == Side::West ? 1 : 0;
    if (joined_s) *joined_s = n.report.joined_at_s.value_or(-1.0);
    if (pdr) *pdr = n.report.pdr;
    if (goodput_bps) *goodput_bps = n.report.goodput_bps.value_or(-1.0);
    if (complete) *complete = n.report.complete ? 1 : 0;
    if (dropped) *dropped = n.report.dropped ? 1 : 0;
    return MR_OK;
}

mr_status mr_result_write(const mr_result* res, const char* dir, const char* formats) {
    if (bad(res) || bad(dir) || bad(formats)) return fail(MR_ERR_INVALID_ARGUMENT, "null argument");
    try {
        emit(res->runs, dir, formats);
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

mr_status mr_report(const char* const* csv_paths, size_t npaths, const char* out_dir,
                    const char* formats) {
    if (bad(csv_paths) || bad(out_dir) || bad(formats) || npaths == 0) {
        return fail(MR_ERR_INVALID_ARGUMENT, "null or empty report argument");
    }
    try {
        std::vector<RunResult> all;
        for (size_t i = 0; i < npaths; ++i) {
            auto part = read_results_csv(csv_paths[i]);
            all.insert(all.end(), part.begin(), part.end());
        }
        // Summaries are recomputed from the node rows: the fold is pure.
        for (auto& run : all) {
            if (!run.nodes.empty()) run.kpi = kpi_fold(run.nodes);
        }
        emit(all, out_dir, formats);
        return MR_OK;
    } catch (const std::exception& e) {
        return classify(e);
    }
}

void mr_result_free(mr_result* res) { delete res; }

}  // extern "C"
