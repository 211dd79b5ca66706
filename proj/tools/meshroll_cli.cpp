// meshroll command-line front end. Talks to the simulator exclusively
// through the C API in meshroll.h.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshroll.h"

namespace {

int die(const std::string& context) {
    std::cerr << "error: " << context << ": " << mr_last_error() << "\n";
    return 1;
}

std::vector<uint64_t> parse_seeds(const std::string& arg) {
    std::string text = arg;
    if (text.empty()) {
        if (const char* env = std::getenv("MESHROLL_SEED")) text = env;
    }
    if (text.empty()) text = "1";
    std::vector<uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
    return seeds;
}

struct ScenarioHandle {
    mr_scenario* sc = nullptr;
    ~ScenarioHandle() { mr_scenario_free(sc); }
};

struct ResultHandle {
    mr_result* res = nullptr;
    ~ResultHandle() { mr_result_free(res); }
};

int load_scenario(const std::string& config, const std::string& preset,
                  const std::vector<std::string>& sets, ScenarioHandle& h) {
    mr_status st;
    if (!config.empty()) {
        st = mr_scenario_from_file(config.c_str(), &h.sc);
    } else if (!preset.empty()) {
        st = mr_scenario_from_preset(preset.c_str(), &h.sc);
    } else {
        std::cerr << "error: provide --config <file> or --preset <name>\n";
        return 1;
    }
    if (st != MR_OK) return die("loading scenario");
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got: " << kv << "\n";
            return 1;
        }
        if (mr_scenario_set(h.sc, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) != MR_OK) {
            return die("applying --set " + kv);
        }
    }
    return 0;
}

void print_summary(const mr_result* res) {
    size_t rows = mr_result_rows(res);
    for (size_t i = 0; i < rows; ++i) {
        const char* err = mr_result_error(res, i);
        uint64_t seed = 0;
        mr_result_seed(res, i, &seed);
        std::cout << "run " << i << " seed=" << seed;
        const char* axis = mr_result_axis_value(res, i);
        if (axis[0]) std::cout << " axis=" << axis;
        if (err[0]) {
            std::cout << " FAILED: " << err << "\n";
            continue;
        }
        double v;
        int defined;
        auto show = [&](const char* label, mr_kpi k) {
            if (mr_result_kpi(res, i, k, &v, &defined) == MR_OK && defined) {
                std::cout << " " << label << "=" << v;
            }
        };
        show("consumers", MR_KPI_CONSUMERS);
        show("unreachable", MR_KPI_UNREACHABLE);
        show("mean_join_s", MR_KPI_MEAN_JOIN_S);
        show("mean_pdr", MR_KPI_MEAN_PDR);
        show("max_goodput_bps", MR_KPI_MAX_GOODPUT_BPS);
        show("dropped", MR_KPI_DROPPED);
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meshroll — mesh firmware roll-out simulator"};
    app.require_subcommand(1);

    std::string config, preset, out_dir = "out", formats = "csv", topo_preset = "umbrella-spacing";
    std::string topo_out, topo_validate_path, seeds_arg, axis_key = "atomic.period_ms";
    std::vector<std::string> sets, axis_values;
    std::vector<std::string> report_inputs;
    int parallel = 1;

    auto add_scenario_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "scenario config file");
        cmd->add_option("--preset", preset, "built-in scenario preset name");
        cmd->add_option("--set", sets, "override a config key (key=value), repeatable");
        cmd->add_option("--seed", seeds_arg, "seed or comma list (env MESHROLL_SEED fallback)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--format", formats, "outputs: csv,json,svg (comma separated)");
    };

    auto* topo = app.add_subcommand("topo", "generate or validate topology files");
    topo->add_option("--preset", topo_preset,
                     "umbrella-spacing|umbrella-span|umbrella-east|umbrella-west|lab4");
    topo->add_option("--seed", seeds_arg, "generator seed");
    topo->add_option("--out", topo_out, "write the topology here");
    topo->add_option("--validate", topo_validate_path, "validate an existing file instead");

    auto* run = app.add_subcommand("run", "run one scenario (per seed)");
    add_scenario_opts(run);

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_scenario_opts(sweep);
    sweep->add_option("--axis", axis_key, "config key to sweep (default atomic.period_ms)");
    sweep->add_option("--values", axis_values, "axis values, repeatable or comma separated")
        ->delimiter(',');
    sweep->add_option("--parallel", parallel, "worker threads");

    auto* report = app.add_subcommand("report", "aggregate existing results.csv files");
    report->add_option("inputs", report_inputs, "results.csv files")->required();
    report->add_option("--out", out_dir, "output directory");
    report->add_option("--format", formats, "outputs: csv,json,svg");

    auto* calibrate = app.add_subcommand("calibrate", "find the smallest stable CSMA interval");
    calibrate->add_option("--config", config, "scenario config file");
    calibrate->add_option("--preset", preset, "built-in scenario preset name");
    calibrate->add_option("--set", sets, "override a config key (key=value)");
    calibrate->add_option("--seed", seeds_arg, "seed");

    CLI11_PARSE(app, argc, argv);

    if (topo->parsed()) {
        if (!topo_validate_path.empty()) {
            if (mr_topology_validate(topo_validate_path.c_str()) != MR_OK) {
                return die("validating " + topo_validate_path);
            }
            std::cout << topo_validate_path << ": ok\n";
            return 0;
        }
        if (topo_out.empty()) topo_out = topo_preset + ".topo";
        uint64_t seed = parse_seeds(seeds_arg)[0];
        if (mr_topology_generate(topo_preset.c_str(), seed, topo_out.c_str()) != MR_OK) {
            return die("generating topology");
        }
        std::cout << "wrote " << topo_out << "\n";
        return 0;
    }

    if (report->parsed()) {
        std::vector<const char*> paths;
        for (const auto& p : report_inputs) paths.push_back(p.c_str());
        if (mr_report(paths.data(), paths.size(), out_dir.c_str(), formats.c_str()) != MR_OK) {
            return die("aggregating report");
        }
        std::cout << "wrote report to " << out_dir << "\n";
        return 0;
    }

    ScenarioHandle sc;
    if (int rc = load_scenario(config, preset, sets, sc); rc != 0) return rc;
    std::vector<uint64_t> seeds = parse_seeds(seeds_arg);

    if (calibrate->parsed()) {
        double ms = 0.0;
        if (mr_calibrate_interval(sc.sc, seeds[0], &ms) != MR_OK) return die("calibrating");
        std::cout << "smallest stable interval: " << ms << " ms\n";
        return 0;
    }

    ResultHandle result;
    if (run->parsed()) {
        if (seeds.size() == 1) {
            if (mr_run(sc.sc, seeds[0], &result.res) != MR_OK) return die("running scenario");
        } else {
            // Multiple seeds: a degenerate sweep over the seed list.
            const char* v[] = {""};
            if (mr_sweep(sc.sc, "", v, 1, seeds.data(), seeds.size(), parallel, &result.res) !=
                MR_OK) {
                return die("running scenario");
            }
        }
    } else if (sweep->parsed()) {
        if (axis_values.empty()) {
            std::cerr << "error: sweep needs --values\n";
            return 1;
        }
        std::vector<const char*> vals;
        for (const auto& v : axis_values) vals.push_back(v.c_str());
        if (mr_sweep(sc.sc, axis_key.c_str(), vals.data(), vals.size(), seeds.data(),
                     seeds.size(), parallel, &result.res) != MR_OK) {
            return die("running sweep");
        }
    }

    if (result.res) {
        if (mr_result_write(result.res, out_dir.c_str(), formats.c_str()) != MR_OK) {
            return die("writing results");
        }
        // Echo the resolved config next to the data for provenance.
        size_t need = 0;
        mr_scenario_echo(sc.sc, nullptr, 0, &need);
        std::string echo(need, '\0');
        mr_scenario_echo(sc.sc, echo.data(), echo.size(), &need);
        echo.resize(need ? need - 1 : 0);
        std::string echo_path = out_dir + "/config.echo.conf";
        if (FILE* f = std::fopen(echo_path.c_str(), "w")) {
            std::fwrite(echo.data(), 1, echo.size(), f);
            std::fclose(f);
        }
        print_summary(result.res);
        // Nonzero exit when any run failed.
        for (size_t i = 0; i < mr_result_rows(result.res); ++i) {
            if (mr_result_error(result.res, i)[0]) return 2;
        }
    }
    return 0;
}
