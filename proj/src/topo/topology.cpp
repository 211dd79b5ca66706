#include "topo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace meshroll {

std::uint32_t Topology::source_id() const {
    for (const auto& n : nodes) {
        if (n.role == Role::Source) return n.id;
    }
    throw TopologyError("topology has no source node");
}

Side Topology::side_of(std::uint32_t id) const {
    const auto& src = nodes.at(source_id());
    const auto& n = nodes.at(id);
    if (n.id == src.id) return Side::Both;
    return n.x_m >= src.x_m ? Side::East : Side::West;
}

double Topology::distance(std::uint32_t a, std::uint32_t b) const {
    const auto& na = nodes.at(a);
    const auto& nb = nodes.at(b);
    return std::hypot(na.x_m - nb.x_m, na.y_m - nb.y_m);
}

std::size_t Topology::consumer_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) {
        if (node.role == Role::Consumer && !node.indoor) ++n;
    }
    return n;
}

void Topology::validate() const {
    if (nodes.empty()) throw TopologyError("topology is empty");
    int sources = 0;
    std::vector<bool> seen(nodes.size(), false);
    for (const auto& n : nodes) {
        if (n.id >= nodes.size()) {
            throw TopologyError("node id " + std::to_string(n.id) + " not dense in [0, N)");
        }
        if (seen[n.id]) throw TopologyError("duplicate node id " + std::to_string(n.id));
        seen[n.id] = true;
        if (!std::isfinite(n.x_m) || !std::isfinite(n.y_m)) {
            throw TopologyError("node " + std::to_string(n.id) + " has a non-finite position");
        }
        if (n.role == Role::Source) ++sources;
    }
    if (sources == 0) throw TopologyError("no source node");
    if (sources > 1) throw TopologyError("multiple source nodes");
}

void Topology::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw TopologyError("cannot write topology file: " + path);
    out.precision(17);  // positions must round-trip exactly
    out << "# meshroll topology: " << name << "\n";
    for (const auto& [k, v] : params) out << "# " << k << " = " << v << "\n";
    out << "# id,x_m,y_m,role,indoor\n";
    for (const auto& n : nodes) {
        out << n.id << "," << n.x_m << "," << n.y_m << ","
            << (n.role == Role::Source ? "source" : "consumer") << "," << (n.indoor ? 1 : 0)
            << "\n";
    }
}

Topology generate_umbrella(const UmbrellaParams& p, RngStream& rng) {
    if (p.n_east < 0 || p.n_west < 0) throw TopologyError("node counts must be >= 0");
    if (p.spacing_east_m <= 0 || p.spacing_west_m <= 0) throw TopologyError("spacings must be > 0");
    if (p.jitter_m < 0) throw TopologyError("jitter must be >= 0");

    Topology topo;
    topo.name = "umbrella";
    topo.params["n_east"] = std::to_string(p.n_east);
    topo.params["n_west"] = std::to_string(p.n_west);
    topo.params["spacing_east_m"] = std::to_string(p.spacing_east_m);
    topo.params["spacing_west_m"] = std::to_string(p.spacing_west_m);
    topo.params["jitter_m"] = std::to_string(p.jitter_m);

    auto jit = [&]() { return p.jitter_m > 0 ? rng.uniform(-p.jitter_m, p.jitter_m) : 0.0; };

    std::uint32_t id = 0;
    topo.nodes.push_back({id++, 0.0, 0.0, Role::Source, false});
    for (int k = 1; k <= p.n_east; ++k) {
        topo.nodes.push_back({id++, k * p.spacing_east_m + jit(), jit(), Role::Consumer, false});
    }
    for (int k = 1; k <= p.n_west; ++k) {
        topo.nodes.push_back({id++, -(k * p.spacing_west_m + jit()), jit(), Role::Consumer, false});
    }

    if (p.target_span_m > 0.0) {
        double min_x = 0.0, max_x = 0.0;
        for (const auto& n : topo.nodes) {
            min_x = std::min(min_x, n.x_m);
            max_x = std::max(max_x, n.x_m);
        }
        double span = max_x - min_x;
        if (span > 0.0) {
            double scale = p.target_span_m / span;
            for (auto& n : topo.nodes) {
                n.x_m *= scale;
                n.y_m *= scale;
            }
            topo.params["target_span_m"] = std::to_string(p.target_span_m);
        }
    }
    topo.validate();
    return topo;
}

Topology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open topology file: " + path);
    Topology topo;
    topo.name = path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) {
            throw TopologyError("malformed row at line " + std::to_string(lineno) + ": " + line);
        }
        try {
            NodeSpec n;
            n.id = static_cast<std::uint32_t>(std::stoul(fields[0]));
            n.x_m = std::stod(fields[1]);
            n.y_m = std::stod(fields[2]);
            if (fields[3] == "source") {
                n.role = Role::Source;
            } else if (fields[3] == "consumer") {
                n.role = Role::Consumer;
            } else {
                throw std::invalid_argument("role");
            }
            n.indoor = std::stoi(fields[4]) != 0;
            topo.nodes.push_back(n);
        } catch (const std::exception&) {
            throw TopologyError("malformed row at line " + std::to_string(lineno) + ": " + line);
        }
    }
    std::sort(topo.nodes.begin(), topo.nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    topo.validate();
    return topo;
}

Topology side_filter(const Topology& topo, Side side) {
    if (side == Side::Both) return topo;
    Topology out;
    out.name = topo.name + (side == Side::East ? "-east" : "-west");
    out.params = topo.params;
    for (const auto& n : topo.nodes) {
        if (n.role == Role::Source || topo.side_of(n.id) == side) out.nodes.push_back(n);
    }
    // re-densify ids, preserving order
    std::sort(out.nodes.begin(), out.nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    for (std::uint32_t i = 0; i < out.nodes.size(); ++i) out.nodes[i].id = i;
    out.validate();
    return out;
}

Topology topology_preset(const std::string& name, RngStream& rng) {
    if (name == "umbrella-spacing" || name == "umbrella") {
        return generate_umbrella(UmbrellaParams{}, rng);
    }
    if (name == "umbrella-span") {
        UmbrellaParams p;
        p.target_span_m = 7'200.0;
        return generate_umbrella(p, rng);
    }
    if (name == "umbrella-east") {
        return side_filter(generate_umbrella(UmbrellaParams{}, rng), Side::East);
    }
    if (name == "umbrella-west") {
        return side_filter(generate_umbrella(UmbrellaParams{}, rng), Side::West);
    }
    if (name == "lab4") {
        // 1 source + 3 consumers in a 10 m square, as in the small-scale rig
        Topology topo;
        topo.name = "lab4";
        topo.nodes = {
            {0, 0.0, 0.0, Role::Source, false},
            {1, 10.0, 0.0, Role::Consumer, false},
            {2, 0.0, 10.0, Role::Consumer, false},
            {3, 10.0, 10.0, Role::Consumer, false},
        };
        topo.validate();
        return topo;
    }
    throw TopologyError("unknown topology preset: " + name);
}

}  // namespace meshroll
