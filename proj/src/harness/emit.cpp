#include "harness/emit.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace meshroll {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

std::string opt_g6(const std::optional<double>& v) { return v ? format_g6(*v) : ""; }

const char* side_name(Side s) {
    switch (s) {
        case Side::East: return "east";
        case Side::West: return "west";
        default: return "both";
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    // trailing empty field
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

static const char* kCsvHeader =
    "type,scenario,seed,axis_key,axis_value,node,side,joined_s,pdr,goodput_bps,complete,"
    "dropped,consumers,unreachable,mean_join_s,mean_pdr,max_goodput_bps,dropped_count,error";

void write_results_csv(const std::vector<RunResult>& results, const std::string& path) {
    if (results.empty()) throw EmitError("no records to emit");
    std::ofstream out(path);
    if (!out) throw EmitError("cannot write " + path);
    out << kCsvHeader << "\n";
    for (const auto& run : results) {
        for (const auto& row : run.nodes) {
            const auto& r = row.report;
            out << "node," << run.scenario_name << "," << run.seed << "," << run.axis_key << ","
                << run.axis_value << "," << r.node_id << "," << side_name(row.side) << ","
                << opt_g6(r.joined_at_s) << "," << format_g6(r.pdr) << ","
                << opt_g6(r.goodput_bps) << "," << (r.complete ? 1 : 0) << ","
                << (r.dropped ? 1 : 0) << ",,,,,,,\n";
        }
        const auto& k = run.kpi;
        out << "summary," << run.scenario_name << "," << run.seed << "," << run.axis_key << ","
            << run.axis_value << ",,,,,,,," << k.consumers << "," << k.unreachable << ","
            << opt_g6(k.mean_join_s) << "," << format_g6(k.mean_pdr) << ","
            << opt_g6(k.max_goodput_bps) << "," << k.dropped << "," << run.error << "\n";
    }
}

std::vector<RunResult> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmitError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw EmitError("empty results file: " + path);
    std::vector<RunResult> results;
    RunResult current;
    bool open = false;
    auto parse_opt = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        return std::stod(s);
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() < 19) throw EmitError("malformed results row: " + line);
        if (f[0] == "node") {
            if (!open) {
                current = RunResult{};
                current.scenario_name = f[1];
                current.seed = std::stoull(f[2]);
                current.axis_key = f[3];
                current.axis_value = f[4];
                open = true;
            }
            NodeRow row;
            row.report.node_id = static_cast<std::uint32_t>(std::stoul(f[5]));
            row.side = f[6] == "west" ? Side::West : Side::East;
            row.report.joined_at_s = parse_opt(f[7]);
            row.report.pdr = std::stod(f[8]);
            row.report.goodput_bps = parse_opt(f[9]);
            row.report.complete = f[10] == "1";
            row.report.dropped = f[11] == "1";
            current.nodes.push_back(row);
        } else if (f[0] == "summary") {
            if (!open) {
                current = RunResult{};
                current.scenario_name = f[1];
                current.seed = std::stoull(f[2]);
                current.axis_key = f[3];
                current.axis_value = f[4];
            }
            current.kpi.consumers = f[12].empty() ? 0 : std::stoi(f[12]);
            current.kpi.unreachable = f[13].empty() ? 0 : std::stoi(f[13]);
            current.kpi.mean_join_s = parse_opt(f[14]);
            current.kpi.mean_pdr = f[15].empty() ? 0.0 : std::stod(f[15]);
            current.kpi.max_goodput_bps = parse_opt(f[16]);
            current.kpi.dropped = f[17].empty() ? 0 : std::stoi(f[17]);
            current.error = f[18];
            results.push_back(current);
            current = RunResult{};
            open = false;
        }
    }
    if (open) results.push_back(current);
    return results;
}

void write_results_json(const std::vector<RunResult>& results, const std::string& path) {
    if (results.empty()) throw EmitError("no records to emit");
    json doc = json::array();
    for (const auto& run : results) {
        json jr;
        jr["scenario"] = run.scenario_name;
        jr["seed"] = run.seed;
        if (!run.axis_key.empty()) {
            jr["axis_key"] = run.axis_key;
            jr["axis_value"] = run.axis_value;
        }
        if (!run.error.empty()) jr["error"] = run.error;
        json summary;
        summary["consumers"] = run.kpi.consumers;
        summary["unreachable"] = run.kpi.unreachable;
        summary["dropped"] = run.kpi.dropped;
        if (run.kpi.mean_join_s) summary["mean_join_s"] = *run.kpi.mean_join_s;
        summary["mean_pdr"] = run.kpi.mean_pdr;
        if (run.kpi.max_goodput_bps) summary["max_goodput_bps"] = *run.kpi.max_goodput_bps;
        jr["summary"] = summary;
        json nodes = json::array();
        for (const auto& row : run.nodes) {
            json jn;
            jn["node"] = row.report.node_id;
            jn["side"] = side_name(row.side);
            if (row.report.joined_at_s) jn["joined_s"] = *row.report.joined_at_s;
            jn["pdr"] = row.report.pdr;
            if (row.report.goodput_bps) jn["goodput_bps"] = *row.report.goodput_bps;
            jn["complete"] = row.report.complete;
            jn["dropped"] = row.report.dropped;
            nodes.push_back(jn);
        }
        jr["nodes"] = nodes;
        doc.push_back(jr);
    }
    std::ofstream out(path);
    if (!out) throw EmitError("cannot write " + path);
    out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

namespace {

constexpr int kW = 640, kH = 400, kMargin = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // sorted by x
};

std::string svg_header(const std::string& title) {
    std::stringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
          "font-family=\"sans-serif\">"
       << title << "</text>\n";
    return ss.str();
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    ymax *= 1.05;

    auto px = [&](double x) {
        return kMargin + (x - xmin) / (xmax - xmin) * (kW - 2 * kMargin);
    };
    auto py = [&](double y) {
        return kH - kMargin - (y - ymin) / (ymax - ymin) * (kH - 2 * kMargin);
    };

    std::ofstream out(path);
    if (!out) throw EmitError("cannot write " + path);
    out << svg_header(title);
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\"" << kW - kMargin
        << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
        << kH - kMargin << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = xmin + (xmax - xmin) * i / 4.0;
        double yv = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kMargin + 18
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << format_g6(xv) << "</text>\n";
        out << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
            << format_g6(yv) << "</text>\n";
    }
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 14
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << kH / 2 << ")\">" << y_label << "</text>\n";
    int ci = 0;
    for (const auto& s : series) {
        const char* color = kColors[ci % 6];
        std::stringstream pts;
        for (auto [x, y] : s.points) pts << px(x) << "," << py(y) << " ";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
            << pts.str() << "\"/>\n";
        for (auto [x, y] : s.points) {
            out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        }
        out << "<text x=\"" << kW - kMargin << "\" y=\"" << kMargin + 16 * ci
            << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << color
            << "\">" << s.label << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars) {
    double ymax = 1e-9;
    for (const auto& [label, v] : bars) ymax = std::max(ymax, v);
    ymax *= 1.1;
    std::ofstream out(path);
    if (!out) throw EmitError("cannot write " + path);
    out << svg_header(title);
    double slot = static_cast<double>(kW - 2 * kMargin) / std::max<std::size_t>(bars.size(), 1);
    int ci = 0;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        double h = bars[i].second / ymax * (kH - 2 * kMargin);
        double x = kMargin + slot * i + slot * 0.15;
        double y = kH - kMargin - h;
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.7 << "\" height=\""
            << h << "\" fill=\"" << kColors[ci % 6] << "\"/>\n";
        out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << y - 4
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << format_g6(bars[i].second) << "</text>\n";
        out << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kH - kMargin + 16
            << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
            << bars[i].first << "</text>\n";
        ++ci;
    }
    out << "<text x=\"16\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 16 "
        << kH / 2 << ")\">" << y_label << "</text>\n";
    out << "</svg>\n";
}

}  // namespace

void write_svg_plots(const std::vector<RunResult>& results, const std::string& dir) {
    if (results.empty()) throw EmitError("no records to emit");
    fs::create_directories(dir);

    // Means per scenario for the bar charts.
    std::map<std::string, std::pair<double, int>> join_acc, unreach_acc;
    for (const auto& run : results) {
        if (!run.error.empty()) continue;
        if (run.kpi.mean_join_s) {
            auto& a = join_acc[run.scenario_name];
            a.first += *run.kpi.mean_join_s;
            a.second++;
        }
        auto& u = unreach_acc[run.scenario_name];
        u.first += run.kpi.unreachable;
        u.second++;
    }
    std::vector<std::pair<std::string, double>> join_bars, unreach_bars;
    for (const auto& [name, acc] : join_acc) {
        join_bars.emplace_back(name, acc.first / acc.second);
    }
    for (const auto& [name, acc] : unreach_acc) {
        unreach_bars.emplace_back(name, acc.first / acc.second);
    }
    write_bar_chart(dir + "/join_time.svg", "Mean mesh join time", "seconds", join_bars);
    write_bar_chart(dir + "/unreachable.svg", "Unreachable nodes", "nodes", unreach_bars);

    // Axis sweeps: one series per scenario name.
    bool has_axis = false;
    for (const auto& run : results) {
        if (!run.axis_key.empty()) has_axis = true;
    }
    if (has_axis) {
        std::map<std::string, std::map<double, std::pair<double, int>>> gp, pdr;
        for (const auto& run : results) {
            if (!run.error.empty() || run.axis_value.empty()) continue;
            double x = std::stod(run.axis_value);
            if (run.kpi.max_goodput_bps) {
                auto& a = gp[run.scenario_name][x];
                a.first += *run.kpi.max_goodput_bps;
                a.second++;
            }
            auto& p = pdr[run.scenario_name][x];
            p.first += run.kpi.mean_pdr;
            p.second++;
        }
        auto to_series = [](const std::map<std::string, std::map<double, std::pair<double, int>>>&
                                acc) {
            std::vector<Series> out;
            for (const auto& [name, pts] : acc) {
                Series s;
                s.label = name;
                for (const auto& [x, a] : pts) s.points.emplace_back(x, a.first / a.second);
                out.push_back(std::move(s));
            }
            return out;
        };
        const std::string axis = results.front().axis_key;
        write_line_chart(dir + "/goodput_vs_" + axis + ".svg", "Max goodput", axis, "bits/s",
                         to_series(gp));
        write_line_chart(dir + "/pdr_vs_" + axis + ".svg", "Mean packet delivery rate", axis,
                         "PDR", to_series(pdr));
    }
}

void emit(const std::vector<RunResult>& results, const std::string& dir,
          const std::string& formats) {
    if (results.empty()) throw EmitError("no records to emit");
    fs::create_directories(dir);
    std::stringstream ss(formats);
    std::string fmt;
    while (std::getline(ss, fmt, ',')) {
        if (fmt == "csv") {
            write_results_csv(results, dir + "/results.csv");
        } else if (fmt == "json") {
            write_results_json(results, dir + "/results.json");
        } else if (fmt == "svg") {
            write_svg_plots(results, dir);
        } else if (!fmt.empty()) {
            throw EmitError("unknown output format: " + fmt);
        }
    }
}

}  // namespace meshroll
