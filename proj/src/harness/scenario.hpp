#pragma once

#include <optional>
#include <string>

#include "app/firmware.hpp"
#include "harness/config.hpp"
#include "medium/medium.hpp"
#include "phy/phy.hpp"
#include "phy/reception.hpp"
#include "stacks/atomic.hpp"
#include "stacks/csma_rpl.hpp"
#include "topo/topology.hpp"

namespace meshroll {

enum class StackKind { Atomic, CsmaRplClassic, CsmaRplLite };

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A fully-resolved experiment description: topology source, stack choice and
// parameters, radio model, firmware sizing and run cutoffs. Built from a
// Config; every default is overridable by key.
struct Scenario {
    std::string name = "scenario";
    std::string topo_preset = "umbrella-spacing";
    std::string topo_file;
    UmbrellaParams umbrella;
    Side side = Side::Both;

    StackKind stack = StackKind::Atomic;
    PhyKind phy = PhyKind::Ble500k;
    LinkBudget budget;
    ReceptionParams rx;
    InterferenceConfig interference;

    FloodConfig flood;
    CsmaParams csma;
    RplConfig rpl;
    Duration csma_interval = 0;  // 0: auto-calibrate on the 3-node chain

    FirmwareImage firmware;
    int payload_bytes = 230;

    SimTime join_timeout = from_s(120);
    Duration drain = from_s(30);
    std::string trace_file;     // event-trace dump (one line per dispatch)
    std::string rpl_dump_file;  // per-node RplState CSV after formation

    Config raw;  // resolved echo

    // Throws ValidationError on inconsistent parameters, before any
    // simulation work.
    static Scenario from_config(const Config& config);

    Topology build_topology(std::uint64_t seed) const;
    int data_header_bytes() const;  // app header (+ addressing for unicast)
    const char* stack_name() const;
};

// Canonical scenario definitions shared by the CLI presets and the
// acceptance experiments. Names: lab4-atomic-{ble2m,ble1m,ble500k,ble125k,
// ieee802154}, lab4-csma, umbrella-east-{atomic,csma-classic,csma-lite},
// umbrella-{atomic-ble500k,atomic-ble125k}.
Config scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

}  // namespace meshroll
