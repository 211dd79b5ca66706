#include "harness/runner.hpp"

#include "harness/emit.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <cmath>
#include <thread>

namespace meshroll {

KpiRecord kpi_fold(const std::vector<NodeRow>& rows) {
    KpiRecord kpi;
    double join_sum = 0.0, join_sum_e = 0.0, join_sum_w = 0.0;
    int join_n = 0, join_ne = 0, join_nw = 0;
    double pdr_sum = 0.0;
    double max_gp = -1.0;
    for (const auto& row : rows) {
        const auto& r = row.report;
        kpi.consumers++;
        pdr_sum += r.pdr;
        if (r.joined_at_s) {
            join_sum += *r.joined_at_s;
            ++join_n;
            if (row.side == Side::West) {
                join_sum_w += *r.joined_at_s;
                ++join_nw;
            } else {
                join_sum_e += *r.joined_at_s;
                ++join_ne;
            }
        } else {
            kpi.unreachable++;
            if (row.side == Side::West) {
                kpi.unreachable_west++;
            } else {
                kpi.unreachable_east++;
            }
        }
        if (r.dropped) {
            kpi.dropped++;
            if (row.side == Side::West) {
                kpi.dropped_west++;
            } else {
                kpi.dropped_east++;
            }
        }
        if (r.goodput_bps && *r.goodput_bps > max_gp) max_gp = *r.goodput_bps;
    }
    if (join_n > 0) kpi.mean_join_s = round6g(join_sum / join_n);
    if (join_ne > 0) kpi.mean_join_east_s = round6g(join_sum_e / join_ne);
    if (join_nw > 0) kpi.mean_join_west_s = round6g(join_sum_w / join_nw);
    if (max_gp >= 0.0) kpi.max_goodput_bps = round6g(max_gp);
    kpi.mean_pdr = kpi.consumers > 0 ? round6g(pdr_sum / kpi.consumers) : 0.0;
    return kpi;
}

namespace {

struct RolloutBank {
    std::vector<RolloutState> states;
    explicit RolloutBank(std::size_t n) : states(n) {}
};

RunResult run_scenario_inner(const Scenario& scenario, std::uint64_t seed) {
    RunResult result;
    result.scenario_name = scenario.name;
    result.seed = seed;

    Topology topo = scenario.build_topology(seed);
    Engine engine;
    std::ofstream trace_out;
    if (!scenario.trace_file.empty()) {
        trace_out.open(scenario.trace_file);
        if (!trace_out) throw std::runtime_error("cannot write trace: " + scenario.trace_file);
        trace_out << "# meshroll event trace: " << scenario.name << " seed " << seed << "\n";
        engine.set_trace_sink([&trace_out](SimTime at, const char* target, const char* kind) {
            trace_out << at << " " << target << " " << kind << "\n";
        });
    }
    RadioMap map(topo, scenario.budget, seed);
    // Reach floor: weakest power that could still matter once a dozen
    // coherent relays combine.
    map.set_reach_floor_dbm(
        effective_sensitivity_dbm(phy_profile(scenario.phy), scenario.budget) - 15.0);
    Medium medium(engine, map, scenario.interference);

    auto packets = packetize(scenario.firmware, scenario.payload_bytes);
    const auto total_packets = static_cast<std::uint32_t>(packets.size());
    RolloutBank bank(topo.nodes.size());
    auto deliver = [&bank](std::uint32_t node, const DataPacket& pkt, SimTime now) {
        on_receive(bank.states[node], pkt, now, true);
    };

    SimTime hard_cap = 0;
    std::optional<SimTime> formation_end;
    std::vector<std::optional<SimTime>> joined(topo.nodes.size());
    std::vector<bool> ever_dropped(topo.nodes.size(), false);

    if (scenario.stack == StackKind::Atomic) {
        AtomicStack stack(engine, medium, topo, scenario.flood, scenario.budget, scenario.rx,
                          seed);
        stack.set_delivery(deliver);
        stack.set_packets(packets);
        stack.start(scenario.join_timeout, scenario.drain);
        hard_cap = scenario.join_timeout +
                   static_cast<Duration>(total_packets + 8) * scenario.flood.period +
                   scenario.drain;
        engine.run_until(hard_cap);
        for (const auto& n : topo.nodes) {
            joined[n.id] = stack.node(n.id).joined_at;
            ever_dropped[n.id] = stack.node(n.id).ever_dropped;
        }
        formation_end = stack.dissemination_start();
    } else {
        Duration interval = scenario.csma_interval;
        if (interval <= 0) interval = calibrate_interval(scenario, seed);
        result.csma_interval_ms = to_ms(interval);
        CsmaRplStack stack(engine, medium, topo, scenario.csma, scenario.rpl, scenario.phy,
                           scenario.budget, scenario.rx, seed);
        stack.set_delivery(deliver);
        stack.set_packets(packets);
        stack.start(scenario.join_timeout, scenario.drain, interval);
        hard_cap = scenario.join_timeout +
                   static_cast<Duration>(total_packets + 8) * interval + scenario.drain +
                   from_s(60);
        engine.run_until(hard_cap);
        for (const auto& n : topo.nodes) joined[n.id] = stack.rpl(n.id).joined_at;
        if (stack.formation_end()) formation_end = stack.formation_end();
        if (!scenario.rpl_dump_file.empty()) {
            std::ofstream dump(scenario.rpl_dump_file);
            if (!dump) {
                throw std::runtime_error("cannot write RPL dump: " + scenario.rpl_dump_file);
            }
            dump << "id,rank,parent,joined_at_s\n";
            for (const auto& n : topo.nodes) {
                const auto& st = stack.rpl(n.id);
                dump << n.id << "," << (st.joined_at ? std::to_string(st.rank) : "") << ",";
                if (st.parent) dump << *st.parent;
                dump << ",";
                if (st.joined_at) dump << format_g6(to_s(*st.joined_at));
                dump << "\n";
            }
        }
    }

    for (const auto& n : topo.nodes) {
        if (n.role != Role::Consumer || n.indoor) continue;
        NodeRow row;
        row.side = topo.side_of(n.id);
        row.report = finalize(bank.states[n.id], total_packets);
        row.report.node_id = n.id;
        if (joined[n.id]) row.report.joined_at_s = round6g(to_s(*joined[n.id]));
        row.report.dropped = ever_dropped[n.id];
        result.nodes.push_back(std::move(row));
    }
    result.kpi = kpi_fold(result.nodes);
    result.trace_hash = engine.trace_hash();
    if (formation_end) result.formation_end = *formation_end;
    if (result.csma_interval_ms == 0.0 && scenario.stack != StackKind::Atomic) {
        result.csma_interval_ms = to_ms(scenario.csma_interval);
    }
    return result;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, std::uint64_t seed) {
    try {
        return run_scenario_inner(scenario, seed);
    } catch (const std::exception& e) {
        RunResult failed;
        failed.scenario_name = scenario.name;
        failed.seed = seed;
        failed.error = e.what();
        return failed;
    }
}

Duration calibrate_interval(const Scenario& scenario, std::uint64_t seed) {
    // Clean 3-node chain (source -> a -> b, 10 m apart, no fading) at the
    // scenario's PHY and frame sizing. Bisect the smallest integer-ms
    // interval that still gets every packet through both hops.
    Scenario probe = scenario;
    probe.name = scenario.name + "-calibrate";
    probe.topo_file.clear();
    probe.budget.shadow_sigma_db = 0.0;
    probe.budget.node_atten_prob = 0.0;
    probe.rx.fade_loss_prob = 0.0;
    probe.firmware.size_bytes =
        static_cast<std::uint64_t>(probe.payload_bytes) * 60;  // 60 probe packets
    probe.join_timeout = from_s(30);
    probe.drain = from_s(10);

    auto run_probe = [&](Duration interval) -> bool {
        Topology chain;
        chain.name = "calibration-chain";
        chain.nodes = {{0, 0.0, 0.0, Role::Source, false},
                       {1, 10.0, 0.0, Role::Consumer, false},
                       {2, 20.0, 0.0, Role::Consumer, false}};
        Engine engine;
        RadioMap map(chain, probe.budget, seed);
        Medium medium(engine, map, {});
        auto packets = packetize(probe.firmware, probe.payload_bytes);
        RolloutBank bank(chain.nodes.size());
        CsmaRplStack stack(engine, medium, chain, probe.csma, probe.rpl, probe.phy, probe.budget,
                           probe.rx, seed);
        stack.set_delivery([&bank](std::uint32_t node, const DataPacket& pkt, SimTime now) {
            on_receive(bank.states[node], pkt, now, true);
        });
        stack.set_packets(packets);
        stack.start(probe.join_timeout, probe.drain, interval);
        engine.run_until(probe.join_timeout +
                         static_cast<Duration>(packets.size() + 8) * interval + probe.drain +
                         from_s(30));
        for (std::uint32_t id : {1u, 2u}) {
            auto report = finalize(bank.states[id], static_cast<std::uint32_t>(packets.size()));
            if (!report.complete) return false;
        }
        return true;
    };

    std::int64_t lo = 1, hi = 200;  // ms
    if (!run_probe(from_ms(hi))) return from_ms(hi);
    while (lo < hi) {
        std::int64_t mid = (lo + hi) / 2;
        if (run_probe(from_ms(mid))) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return from_ms(hi);
}

std::vector<RunResult> run_sweep(const Config& base, const std::string& axis_key,
                                 const std::vector<std::string>& values,
                                 const std::vector<std::uint64_t>& seeds, int parallel) {
    if (values.empty() || seeds.empty()) {
        throw ValidationError("sweep needs at least one axis value and one seed");
    }
    struct Job {
        std::string value;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& v : values) {
        for (auto s : seeds) jobs.push_back({v, s});
    }
    std::vector<RunResult> results(jobs.size());

    auto work = [&](std::size_t idx) {
        const Job& job = jobs[idx];
        RunResult& slot = results[idx];
        try {
            Config cfg = base;
            if (!axis_key.empty()) cfg.set(axis_key, job.value);
            Scenario sc = Scenario::from_config(cfg);
            slot = run_scenario(sc, job.seed);
        } catch (const std::exception& e) {
            slot.seed = job.seed;
            slot.error = e.what();
        }
        slot.axis_key = axis_key;
        slot.axis_value = job.value;
    };

    if (parallel <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int nthreads = std::min<std::size_t>(parallel, jobs.size());
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                    work(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return results;
}

}  // namespace meshroll
