#include "uwbcoop/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace uwbcoop {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    // Shortest representation that parses back to the same bits.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

Point2 point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ParseError("point must be a [x, y] array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to_json(const Point2& p) { return json::array({p.x, p.y}); }

void check_known_fields(const json& j, const std::vector<std::string>& known,
                        const std::string& context) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError(context + ": unknown field \"" + key + "\"");
        }
    }
}

Rect rect_from_json(const json& j) {
    check_known_fields(j, {"x_min", "y_min", "x_max", "y_max"}, "room");
    return {j.at("x_min").get<double>(), j.at("y_min").get<double>(),
            j.at("x_max").get<double>(), j.at("y_max").get<double>()};
}

AnchorSet anchors_from_json(const json& j) {
    check_known_fields(j, {"positions", "reference_index"}, "anchors");
    AnchorSet a;
    for (const auto& p : j.at("positions")) a.positions.push_back(point_from_json(p));
    a.reference_index = j.value("reference_index", 0);
    return a;
}

}  // namespace

json scenario_to_json(const Scenario& s) {
    json j;
    j["room"] = {{"x_min", s.room.x_min}, {"y_min", s.room.y_min},
                 {"x_max", s.room.x_max}, {"y_max", s.room.y_max}};
    json positions = json::array();
    for (const auto& p : s.anchors.positions) positions.push_back(point_to_json(p));
    j["anchors"] = {{"positions", positions},
                    {"reference_index", s.anchors.reference_index}};
    json truths = json::array();
    for (const auto& p : s.tag_truths) truths.push_back(point_to_json(p));
    j["tag_truths"] = truths;
    j["sigma_toa"] = s.sigma_toa;
    j["sigma_twr"] = s.sigma_twr;
    j["periods"] = s.periods;
    j["grid_step"] = s.grid_step;
    j["seed"] = s.seed;
    j["cooperative"] = s.cooperative;
    j["reply_delays"] = s.reply_delays;
    j["clock_ppm"] = s.clock_ppm;
    j["failed_tags"] = s.failed_tags;
    return j;
}

Scenario scenario_from_json(const json& j) {
    check_known_fields(j,
                       {"room", "anchors", "tag_truths", "sigma_toa", "sigma_twr",
                        "periods", "grid_step", "seed", "cooperative",
                        "reply_delays", "clock_ppm", "failed_tags"},
                       "scenario");
    Scenario s;
    s.room = rect_from_json(j.at("room"));
    s.anchors = anchors_from_json(j.at("anchors"));
    for (const auto& p : j.at("tag_truths")) s.tag_truths.push_back(point_from_json(p));
    s.sigma_toa = j.at("sigma_toa").get<double>();
    s.sigma_twr = j.at("sigma_twr").get<double>();
    s.periods = j.at("periods").get<int>();
    s.grid_step = j.value("grid_step", 0.5);
    s.seed = j.value("seed", std::uint64_t{1});
    s.cooperative = j.value("cooperative", true);
    if (j.contains("reply_delays")) {
        s.reply_delays = j.at("reply_delays").get<std::vector<double>>();
    }
    if (j.contains("clock_ppm")) {
        s.clock_ppm = j.at("clock_ppm").get<std::vector<double>>();
    }
    if (j.contains("failed_tags")) {
        for (int f : j.at("failed_tags").get<std::vector<int>>()) s.failed_tags.insert(f);
    }
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
    Scenario s;
    try {
        s = scenario_from_json(j);
    } catch (const json::exception& e) {
        throw ParseError("bad scenario in " + path + ": " + e.what());
    }
    const auto errs = validate_scenario(s);
    if (!errs.empty()) {
        std::string msg = "invalid scenario in " + path + ":";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw ParseError(msg);
    }
    return s;
}

std::string scenario_hash(const Scenario& s) {
    const std::string text = scenario_to_json(s).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ReplayLayout parse_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open layout file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
    check_known_fields(j, {"room", "anchors", "n_tags", "grid_step", "sigma_toa", "sigma_twr"},
                       "layout");
    try {
        ReplayLayout l;
        l.room = rect_from_json(j.at("room"));
        l.anchors = anchors_from_json(j.at("anchors"));
        l.n_tags = j.at("n_tags").get<int>();
        l.grid_step = j.value("grid_step", 0.5);
        l.sigma_toa = j.value("sigma_toa", 1e-9);
        l.sigma_twr = j.value("sigma_twr", 0.06);
        if (l.n_tags < 1) throw ParseError("layout: n_tags must be >= 1");
        if (l.anchors.size() < 3) throw ParseError("layout: insufficient anchors");
        return l;
    } catch (const json::exception& e) {
        throw ParseError("bad layout in " + path + ": " + e.what());
    }
}

void dump_measurements(const std::vector<RawPeriod>& periods, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write measurement log: " + path);
    out << "kind,period,id_a,id_b,value\n";
    for (std::size_t p = 0; p < periods.size(); ++p) {
        const RawPeriod& period = periods[p];
        for (std::size_t t = 0; t < period.toas.size(); ++t) {
            for (const auto& [anchor, toa] : period.toas[t]) {
                out << "toa," << p << ',' << t << ',' << anchor << ','
                    << format_double(toa) << '\n';
            }
        }
        for (const auto& [pair, range] : period.pair_ranges) {
            out << "twr," << p << ',' << pair.first << ',' << pair.second << ','
                << format_double(range) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failure on: " + path);
}

std::vector<RawPeriod> ingest_replay(const std::string& path, const ReplayLayout& layout) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open replay log: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "kind,period,id_a,id_b,value") {
        throw ParseError(path + ": missing or wrong header (expected kind,period,id_a,id_b,value)");
    }

    std::vector<RawPeriod> periods;
    long last_period = -1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string kind, f1, f2, f3, f4;
        if (!std::getline(row, kind, ',') || !std::getline(row, f1, ',') ||
            !std::getline(row, f2, ',') || !std::getline(row, f3, ',') ||
            !std::getline(row, f4)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed row");
        }
        long period;
        long id_a, id_b;
        double value;
        try {
            period = std::stol(f1);
            id_a = std::stol(f2);
            id_b = std::stol(f3);
            value = std::stod(f4);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric field");
        }
        if (period < 0) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": negative period");
        }
        if (period < last_period) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": non-monotone period index");
        }
        last_period = period;
        while (static_cast<long>(periods.size()) <= period) {
            RawPeriod rp;
            rp.toas.resize(layout.n_tags);
            periods.push_back(std::move(rp));
        }
        RawPeriod& rp = periods[period];

        if (kind == "toa") {
            if (id_a < 0 || id_a >= layout.n_tags) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": unknown tag id");
            }
            if (id_b < 0 || id_b >= layout.anchors.size()) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": unknown anchor id");
            }
            if (rp.toas[id_a].count(static_cast<int>(id_b))) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": duplicate TOA for tag/anchor in period");
            }
            rp.toas[id_a][static_cast<int>(id_b)] = value;
        } else if (kind == "twr") {
            if (id_a < 0 || id_a >= layout.n_tags || id_b < 0 || id_b >= layout.n_tags ||
                id_a == id_b) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": bad tag pair");
            }
            const TagPair key = make_pair_key(static_cast<int>(id_a), static_cast<int>(id_b));
            if (rp.pair_ranges.count(key)) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": duplicate TWR pair in period");
            }
            rp.pair_ranges[key] = value;
        } else {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown kind \"" + kind + "\"");
        }
    }
    return periods;
}

json timing_record_to_json(const TimingRecord& rec) {
    json j;
    j["n_tags"] = rec.n_tags;
    j["delays"] = rec.delays;
    j["responders"] = rec.responders;
    json trig = json::object();
    for (const auto& [tag, packet] : rec.trigger) trig[std::to_string(tag)] = packet;
    j["trigger"] = trig;
    json tx = json::array();
    for (const auto& [key, v] : rec.tx_to_rx) {
        tx.push_back({{"measurer", key.first}, {"packet", key.second}, {"seconds", v}});
    }
    j["tx_to_rx"] = tx;
    json waits = json::array();
    for (const auto& [key, v] : rec.wait) {
        waits.push_back({{"measurer", key.first}, {"packet", key.second}, {"seconds", v}});
    }
    j["wait"] = waits;
    return j;
}

json bundle_to_json(const MeasurementBundle& b) {
    json j;
    json tdoa = json::array();
    for (const auto& e : b.tdoa) {
        tdoa.push_back({{"anchor_index", e.anchor_index}, {"value_m", e.value_m}});
    }
    j["tdoa"] = tdoa;
    json ranges = json::array();
    for (const auto& e : b.ranges) {
        ranges.push_back({{"peer_index", e.peer_index},
                          {"value_m", e.value_m},
                          {"peer_position", point_to_json(e.peer_position)}});
    }
    j["ranges"] = ranges;
    return j;
}

void export_results(const ExportBundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

    for (std::size_t t = 0; t < bundle.estimates.size(); ++t) {
        const fs::path file = fs::path(out_dir) / ("estimates_" + std::to_string(t) + ".csv");
        std::ofstream out(file);
        if (!out) throw std::runtime_error("cannot write: " + file.string());
        out << "period,x,y\n";
        const auto& series = bundle.estimates[t];
        for (std::size_t p = 0; p < series.size(); ++p) {
            if (!series[p]) continue;
            out << p << ',' << format_double(series[p]->x) << ','
                << format_double(series[p]->y) << '\n';
        }
        if (!out) throw std::runtime_error("write failure on: " + file.string());
    }

    for (const auto& [name, series] : bundle.cdfs) {
        const fs::path file = fs::path(out_dir) / ("cdf_" + name + ".csv");
        std::ofstream out(file);
        if (!out) throw std::runtime_error("cannot write: " + file.string());
        out << "value,fraction\n";
        for (std::size_t i = 0; i < series.values.size(); ++i) {
            out << format_double(series.values[i]) << ','
                << format_double(series.fractions[i]) << '\n';
        }
        if (!out) throw std::runtime_error("write failure on: " + file.string());
    }

    json summary;
    summary["seed"] = bundle.seed;
    summary["mode"] = bundle.mode;
    summary["scenario_hash"] = bundle.scenario_hash;
    summary["metrics"] = bundle.metrics;
    const fs::path file = fs::path(out_dir) / "summary.json";
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write: " + file.string());
    out << summary.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failure on: " + file.string());
}

}  // namespace uwbcoop
