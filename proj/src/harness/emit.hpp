#pragma once

#include <string>
#include <vector>

#include "harness/runner.hpp"

namespace meshroll {

class EmitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// results.csv: one row per (run, node) plus one summary row per run, shared
// column set, 6-significant-digit numbers. Throws on empty input or an
// unwritable path.
void write_results_csv(const std::vector<RunResult>& results, const std::string& path);

// Full structured dump.
void write_results_json(const std::vector<RunResult>& results, const std::string& path);

// Self-contained static SVG charts into `dir`: join-time and unreachable
// bars per scenario, plus goodput-vs-axis and PDR-vs-axis lines (one series
// per scenario name) when an axis is present.
void write_svg_plots(const std::vector<RunResult>& results, const std::string& dir);

// Re-reads a results.csv (node rows + summary rows) for the report command
// and the round-trip checks.
std::vector<RunResult> read_results_csv(const std::string& path);

// Writes everything requested into dir. formats: comma-separated subset of
// csv,json,svg.
void emit(const std::vector<RunResult>& results, const std::string& dir,
          const std::string& formats);

std::string format_g6(double v);

}  // namespace meshroll
