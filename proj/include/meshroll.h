/* meshroll — deterministic discrete-event simulator for large-scale mesh
 * firmware roll-outs (synchronous flooding vs. CSMA-CA + RPL).
 *
 * C API over the C++ core: opaque handles, integer status codes, and a
 * thread-local error message. Everything the CLI does goes through this
 * surface, so language bindings get the same capabilities.
 */
#ifndef MESHROLL_H
#define MESHROLL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mr_status {
    MR_OK = 0,
    MR_ERR_INVALID_ARGUMENT = 1,
    MR_ERR_PARSE = 2,
    MR_ERR_VALIDATION = 3,
    MR_ERR_IO = 4,
    MR_ERR_RUNTIME = 5
} mr_status;

typedef struct mr_scenario mr_scenario; /* a resolved experiment description */
typedef struct mr_result mr_result;     /* one or more finished runs */

const char* mr_version(void);

/* Message for the most recent failing call on this thread. */
const char* mr_last_error(void);

/* --- scenario ----------------------------------------------------------- */

/* Key-value config text; see README for the key reference. */
mr_status mr_scenario_from_file(const char* path, mr_scenario** out);
mr_status mr_scenario_from_string(const char* text, mr_scenario** out);
/* Canonical built-in scenarios (lab4-*, umbrella-*). */
mr_status mr_scenario_from_preset(const char* name, mr_scenario** out);

mr_status mr_scenario_set(mr_scenario* sc, const char* key, const char* value);
/* Serialized, fully-resolved config echo. Returns the required buffer size
 * (including NUL) through *need; copies min(need, buflen) bytes. */
mr_status mr_scenario_echo(const mr_scenario* sc, char* buf, size_t buflen, size_t* need);
void mr_scenario_free(mr_scenario* sc);

/* --- topology ----------------------------------------------------------- */

mr_status mr_topology_generate(const char* preset, uint64_t seed, const char* out_path);
mr_status mr_topology_validate(const char* path);

/* --- execution ---------------------------------------------------------- */

mr_status mr_run(const mr_scenario* sc, uint64_t seed, mr_result** out);

/* Cartesian product of axis values x seeds; runs are independent and may be
 * executed by `parallel` worker threads. Individual run failures are
 * recorded per row; the sweep itself still succeeds. */
mr_status mr_sweep(const mr_scenario* sc, const char* axis_key, const char* const* values,
                   size_t nvalues, const uint64_t* seeds, size_t nseeds, int parallel,
                   mr_result** out);

/* Smallest stable injection interval on the clean 3-node chain, in ms. */
mr_status mr_calibrate_interval(const mr_scenario* sc, uint64_t seed, double* out_ms);

/* --- results ------------------------------------------------------------ */

typedef enum mr_kpi {
    MR_KPI_CONSUMERS = 0,
    MR_KPI_UNREACHABLE = 1,
    MR_KPI_MEAN_JOIN_S = 2,
    MR_KPI_MEAN_PDR = 3,
    MR_KPI_MAX_GOODPUT_BPS = 4,
    MR_KPI_DROPPED = 5,
    MR_KPI_MEAN_JOIN_EAST_S = 6,
    MR_KPI_MEAN_JOIN_WEST_S = 7,
    MR_KPI_DROPPED_EAST = 8,
    MR_KPI_DROPPED_WEST = 9,
    MR_KPI_CSMA_INTERVAL_MS = 10
} mr_kpi;

size_t mr_result_rows(const mr_result* res);
/* False when the run failed (see mr_result_error) or the KPI is undefined
 * for this row (e.g. goodput with nothing received): *out is left alone and
 * the call returns MR_OK with *defined = 0. */
mr_status mr_result_kpi(const mr_result* res, size_t row, mr_kpi kpi, double* out, int* defined);
const char* mr_result_error(const mr_result* res, size_t row); /* "" if ok */
/* Full-run event-trace hash, a pure function of (scenario, seed). */
mr_status mr_result_trace_hash(const mr_result* res, size_t row, uint64_t* out);
const char* mr_result_axis_value(const mr_result* res, size_t row);
mr_status mr_result_seed(const mr_result* res, size_t row, uint64_t* out);

mr_status mr_result_node_count(const mr_result* res, size_t row, size_t* out);
mr_status mr_result_node(const mr_result* res, size_t row, size_t idx, uint32_t* node_id,
                         int* side_west, double* joined_s /* <0: never joined */,
                         double* pdr, double* goodput_bps /* <0: undefined */, int* complete,
                         int* dropped);

/* Writes results.csv / results.json / SVG charts into dir.
 * formats: comma-separated subset of "csv,json,svg". */
mr_status mr_result_write(const mr_result* res, const char* dir, const char* formats);

/* Aggregates previously written results.csv files into one report. */
mr_status mr_report(const char* const* csv_paths, size_t npaths, const char* out_dir,
                    const char* formats);

void mr_result_free(mr_result* res);

#ifdef __cplusplus
}
#endif

#endif /* MESHROLL_H */
