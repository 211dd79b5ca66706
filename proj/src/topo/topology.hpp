#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/rng.hpp"

namespace meshroll {

enum class Role { Source, Consumer };
enum class Side { East, West, Both };

struct NodeSpec {
    std::uint32_t id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    Role role = Role::Consumer;
    bool indoor = false;  // indoor nodes are excluded from the mesh
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A node layout: ids dense in [0, N), exactly one source. The UMBRELLA-like
// generator lays a lamppost chain on the x axis with the source at the
// origin; consumers sit east (x > 0) or west of it.
struct Topology {
    std::vector<NodeSpec> nodes;
    std::string name;
    std::map<std::string, std::string> params;  // generator echo

    std::uint32_t source_id() const;
    Side side_of(std::uint32_t id) const;  // relative to the source
    double distance(std::uint32_t a, std::uint32_t b) const;
    std::size_t consumer_count() const;

    // Throws TopologyError when an invariant is broken.
    void validate() const;

    void save(const std::string& path) const;
};

struct UmbrellaParams {
    int n_east = 75;
    int n_west = 74;
    double spacing_east_m = 87.0;
    double spacing_west_m = 94.0;
    double jitter_m = 5.0;
    // Scales positions so the whole chain spans this length; 0 keeps the
    // nominal spacing. The published spacing and the published road span
    // are mutually inconsistent, hence two presets.
    double target_span_m = 0.0;
};

Topology generate_umbrella(const UmbrellaParams& params, RngStream& rng);

Topology load_topology(const std::string& path);

// Retains the source plus the requested side's consumers; ids are preserved
// but re-densified so the result is a valid standalone topology.
Topology side_filter(const Topology& topo, Side side);

// Named presets: "umbrella-spacing", "umbrella-span", "umbrella-east",
// "umbrella-west", "lab4".
Topology topology_preset(const std::string& name, RngStream& rng);

}  // namespace meshroll
