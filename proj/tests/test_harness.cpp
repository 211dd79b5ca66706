#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "harness/emit.hpp"
#include "harness/runner.hpp"
#include "harness/scenario.hpp"

using namespace meshroll;
using doctest::Approx;

namespace {

namespace fs = std::filesystem;

std::string temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::create_directories(dir);
    return dir.string();
}

// A lab-sized scenario that finishes in well under a second.
Config tiny_config() {
    Config c = scenario_preset("lab4-atomic-ble2m");
    c.set("app.firmware_bytes", "2300");  // 10 packets
    c.set("run.drain_timeout_s", "1");
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing: comments, dotted keys, errors") {
    auto cfg = Config::parse_string("a.b = 1 # trailing\n# full comment\n  c = x y\n");
    CHECK(cfg.get_int("a.b", 0) == 1);
    CHECK(cfg.get_str("c", "") == "x y");
    CHECK(cfg.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(Config::parse_string("novalue\n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("c", 0), ConfigError);
    auto echoed = Config::parse_string(cfg.serialize());
    CHECK(echoed.values() == cfg.values());
}

TEST_CASE("every built-in preset resolves and validates") {
    for (const auto& name : scenario_preset_names()) {
        CHECK_NOTHROW(Scenario::from_config(scenario_preset(name)));
    }
}

TEST_CASE("scenario validation rejects inconsistent configs up front") {
    SUBCASE("unknown key") {
        auto c = tiny_config();
        c.set("atomic.perod_ms", "20");  // typo
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
    SUBCASE("payload too large for the MTU") {
        auto c = tiny_config();
        c.set("app.payload_bytes", "255");
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
    SUBCASE("CSMA on a BLE PHY") {
        auto c = scenario_preset("lab4-csma");
        c.set("phy", "ble2m");
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
    SUBCASE("period too short for one data slot") {
        auto c = tiny_config();
        c.set("atomic.period_ms", "1");
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
    SUBCASE("bad hop channel") {
        auto c = tiny_config();
        c.set("atomic.hop_channels", "26,27");
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
    SUBCASE("exponent outside the physical band") {
        auto c = tiny_config();
        c.set("budget.path_loss_exponent", "7.5");
        CHECK_THROWS_AS(Scenario::from_config(c), ValidationError);
    }
}

TEST_CASE("runs are deterministic per seed, different across seeds") {
    auto sc = Scenario::from_config(tiny_config());
    auto a = run_scenario(sc, 42);
    auto b = run_scenario(sc, 42);
    auto c = run_scenario(sc, 43);
    REQUIRE(a.error.empty());
    CHECK(a.trace_hash == b.trace_hash);
    CHECK(a.kpi.mean_pdr == b.kpi.mean_pdr);
    CHECK(a.kpi.mean_join_s == b.kpi.mean_join_s);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].report.pdr == b.nodes[i].report.pdr);
        CHECK(a.nodes[i].report.goodput_bps == b.nodes[i].report.goodput_bps);
    }
    CHECK(a.trace_hash != c.trace_hash);
}

TEST_CASE("lab scenario lands on the expected table point") {
    auto sc = Scenario::from_config(scenario_preset("lab4-atomic-ble2m"));
    auto run = run_scenario(sc, 1);
    REQUIRE(run.error.empty());
    CHECK(run.kpi.unreachable == 0);
    CHECK(run.kpi.mean_pdr == Approx(1.0));
    REQUIRE(run.kpi.max_goodput_bps.has_value());
    CHECK(*run.kpi.max_goodput_bps == Approx(115'190.0).epsilon(0.05));
}

TEST_CASE("csv emit: row counts and the empty-set error") {
    auto sc = Scenario::from_config(tiny_config());
    std::vector<RunResult> results = {run_scenario(sc, 7)};
    REQUIRE(results[0].error.empty());
    auto dir = temp_dir("meshroll_emit");
    write_results_csv(results, dir + "/results.csv");
    std::ifstream in(dir + "/results.csv");
    std::string line;
    int nodes = 0, summaries = 0, headers = 0;
    while (std::getline(in, line)) {
        if (line.rfind("node,", 0) == 0) ++nodes;
        if (line.rfind("summary,", 0) == 0) ++summaries;
        if (line.rfind("type,", 0) == 0) ++headers;
    }
    CHECK(headers == 1);
    CHECK(nodes == 3);  // lab4: three consumers
    CHECK(summaries == 1);

    std::vector<RunResult> empty;
    CHECK_THROWS_AS(write_results_csv(empty, dir + "/nope.csv"), EmitError);
    CHECK_FALSE(fs::exists(dir + "/nope.csv"));
    fs::remove_all(dir);
}

TEST_CASE("summary rows recompute bit-exactly from the node rows") {
    auto sc = Scenario::from_config(tiny_config());
    std::vector<RunResult> results = {run_scenario(sc, 3), run_scenario(sc, 4)};
    auto dir = temp_dir("meshroll_fold");
    write_results_csv(results, dir + "/results.csv");
    auto loaded = read_results_csv(dir + "/results.csv");
    REQUIRE(loaded.size() == results.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        KpiRecord refold = kpi_fold(loaded[i].nodes);
        CHECK(refold.mean_pdr == results[i].kpi.mean_pdr);
        CHECK(refold.mean_join_s == results[i].kpi.mean_join_s);
        CHECK(refold.max_goodput_bps == results[i].kpi.max_goodput_bps);
        CHECK(refold.unreachable == results[i].kpi.unreachable);
        CHECK(refold.consumers == results[i].kpi.consumers);
        CHECK(refold.dropped == results[i].kpi.dropped);
    }
    fs::remove_all(dir);
}

TEST_CASE("csv -> read -> csv round trip is byte-identical") {
    auto sc = Scenario::from_config(tiny_config());
    std::vector<RunResult> results = {run_scenario(sc, 9)};
    auto dir = temp_dir("meshroll_rt");
    write_results_csv(results, dir + "/a.csv");
    auto loaded = read_results_csv(dir + "/a.csv");
    write_results_csv(loaded, dir + "/b.csv");
    CHECK(slurp(dir + "/a.csv") == slurp(dir + "/b.csv"));
    // json alongside parses
    write_results_json(results, dir + "/results.json");
    CHECK(slurp(dir + "/results.json").find("\"summary\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sweep results are independent of parallelism degree") {
    Config base = tiny_config();
    std::vector<std::string> periods = {"16", "24", "32"};
    std::vector<std::uint64_t> seeds = {1, 2};
    auto serial = run_sweep(base, "atomic.period_ms", periods, seeds, 1);
    auto parallel = run_sweep(base, "atomic.period_ms", periods, seeds, 4);
    REQUIRE(serial.size() == 6);
    REQUIRE(parallel.size() == 6);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].axis_value == parallel[i].axis_value);
        CHECK(serial[i].seed == parallel[i].seed);
        CHECK(serial[i].trace_hash == parallel[i].trace_hash);
        CHECK(serial[i].kpi.mean_pdr == parallel[i].kpi.mean_pdr);
    }
}

TEST_CASE("a sweep records individual failures and keeps going") {
    Config base = tiny_config();
    // 1 ms cannot fit a data slot; 16 ms can
    auto results = run_sweep(base, "atomic.period_ms", {"1", "16"}, {1}, 1);
    REQUIRE(results.size() == 2);
    CHECK_FALSE(results[0].error.empty());
    CHECK(results[1].error.empty());
}

TEST_CASE("single-point sweep equals run_scenario per seed") {
    Config base = tiny_config();
    auto swept = run_sweep(base, "atomic.period_ms", {"16"}, {5, 6}, 1);
    auto sc = Scenario::from_config(base);
    auto direct5 = run_scenario(sc, 5);
    auto direct6 = run_scenario(sc, 6);
    CHECK(swept[0].trace_hash == direct5.trace_hash);
    CHECK(swept[1].trace_hash == direct6.trace_hash);
}

TEST_CASE("svg plots: self-contained files with one series per scenario") {
    Config base = tiny_config();
    auto results = run_sweep(base, "atomic.period_ms", {"16", "32"}, {1}, 1);
    auto dir = temp_dir("meshroll_svg");
    write_svg_plots(results, dir);
    for (const char* name : {"join_time.svg", "unreachable.svg",
                             "goodput_vs_atomic.period_ms.svg",
                             "pdr_vs_atomic.period_ms.svg"}) {
        auto body = slurp(dir + "/" + std::string(name));
        INFO(name);
        CHECK(body.rfind("<svg", 0) == 0);
        CHECK(body.find("</svg>") != std::string::npos);
    }
    auto lines = slurp(dir + "/goodput_vs_atomic.period_ms.svg");
    CHECK(lines.find("polyline") != std::string::npos);
    CHECK(lines.find("lab4-atomic-ble2m") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("interval calibration lands in a stable band and reproduces") {
    auto c = scenario_preset("lab4-csma");
    c.set("csma.interval_ms", "0");
    auto sc = Scenario::from_config(c);
    Duration found = calibrate_interval(sc, 1);
    CHECK(found >= from_ms(2));
    CHECK(found <= from_ms(40));
    CHECK(calibrate_interval(sc, 1) == found);
}

TEST_CASE("golden event trace: byte-identical across replays") {
    auto dir = temp_dir("meshroll_trace");
    auto cfg = tiny_config();
    cfg.set("run.trace_file", dir + "/a.trace");
    auto sc = Scenario::from_config(cfg);
    run_scenario(sc, 11);
    cfg.set("run.trace_file", dir + "/b.trace");
    run_scenario(Scenario::from_config(cfg), 11);
    auto a = slurp(dir + "/a.trace");
    auto b = slurp(dir + "/b.trace");
    CHECK(a.size() > 100);
    // identical apart from the per-file header line
    CHECK(a.substr(a.find('\n')) == b.substr(b.find('\n')));
    // one line per dispatch: time target kind
    CHECK(a.find(" atomic period") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("rpl state dump lists id, rank, parent and join time") {
    auto dir = temp_dir("meshroll_rpldump");
    auto cfg = scenario_preset("lab4-csma");
    cfg.set("app.firmware_bytes", "860");
    cfg.set("run.drain_timeout_s", "1");
    cfg.set("run.rpl_dump_file", dir + "/rpl.csv");
    auto result = run_scenario(Scenario::from_config(cfg), 1);
    REQUIRE(result.error.empty());
    auto body = slurp(dir + "/rpl.csv");
    CHECK(body.rfind("id,rank,parent,joined_at_s", 0) == 0);
    // all three consumers join off the root in the lab square
    CHECK(std::count(body.begin(), body.end(), '\n') == 5);
    CHECK(body.find(",0,") != std::string::npos);  // parent column points at the root
    fs::remove_all(dir);
}

TEST_CASE("emitting to an unwritable path raises an IO error") {
    auto sc = Scenario::from_config(tiny_config());
    std::vector<RunResult> results = {run_scenario(sc, 2)};
    CHECK_THROWS_AS(write_results_csv(results, "/nonexistent_dir_xyz/results.csv"), EmitError);
}
