#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwbcoop/engine.hpp"
#include "uwbcoop/metrics.hpp"

namespace uwbcoop {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

nlohmann::json scenario_to_json(const Scenario& s);
/// Strict: unknown fields are rejected; optional fields get documented defaults.
Scenario scenario_from_json(const nlohmann::json& j);

/// Read, parse and validate a scenario file. Throws ParseError with the file
/// name and every validation violation.
Scenario parse_scenario(const std::string& path);

/// FNV-1a over the canonical JSON form, as a hex string; echoed into exports.
std::string scenario_hash(const Scenario& s);

/// Anchor/tag declarations for replay ingestion.
struct ReplayLayout {
    Rect room;
    AnchorSet anchors;
    int n_tags = 0;
    double grid_step = 0.5;
    double sigma_toa = 1e-9;
    double sigma_twr = 0.06;
};

ReplayLayout parse_layout(const std::string& path);

/// Measurement log, one row per measurement:
///   kind,period,id_a,id_b,value
/// toa rows: id_a = tag, id_b = anchor, value in seconds.
/// twr rows: id_a,id_b = tag pair, value in meters.
void dump_measurements(const std::vector<RawPeriod>& periods, const std::string& path);

/// Inverse of dump_measurements, validated against the layout. Throws
/// ParseError on unknown ids, duplicate TWR pairs within a period, or
/// non-monotone period indices.
std::vector<RawPeriod> ingest_replay(const std::string& path, const ReplayLayout& layout);

// Debug dumps.
nlohmann::json timing_record_to_json(const TimingRecord& rec);
nlohmann::json bundle_to_json(const MeasurementBundle& b);

struct ExportBundle {
    std::uint64_t seed = 0;
    std::string mode;           // "tdoa" or "coop"
    std::string scenario_hash;
    // estimates[tag][period]; absent entries are skipped in the CSV.
    std::vector<std::vector<std::optional<Point2>>> estimates;
    nlohmann::json metrics;     // free-form summary block
    std::vector<std::pair<std::string, CdfSeries>> cdfs;  // name -> series
};

/// Writes estimates_<tag>.csv (period,x,y), summary.json and cdf_<name>.csv
/// (value,fraction) into out_dir. Byte-stable for identical input.
void export_results(const ExportBundle& bundle, const std::string& out_dir);

/// Shortest form that round-trips a double exactly (%.17g fallback ladder).
std::string format_double(double v);

}  // namespace uwbcoop
