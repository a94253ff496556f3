#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "uwbcoop/io.hpp"

namespace {

using namespace uwbcoop;

struct ModeRuns {
    std::vector<std::pair<std::string, bool>> list;  // (name, cooperative)
};

ModeRuns parse_mode(const std::string& mode) {
    if (mode == "tdoa") return {{{"tdoa", false}}};
    if (mode == "coop") return {{{"coop", true}}};
    if (mode == "both") return {{{"tdoa", false}, {"coop", true}}};
    throw ParseError("unknown mode: " + mode + " (expected tdoa|coop|both)");
}

nlohmann::json per_tag_metrics(const RunResult& run, const std::vector<Point2>* truths,
                               int burn_in) {
    nlohmann::json tags = nlohmann::json::array();
    for (std::size_t t = 0; t < run.estimates.size(); ++t) {
        nlohmann::json jt;
        jt["tag"] = t;
        const auto series = run.tag_series(static_cast<int>(t), burn_in);
        jt["n_samples"] = series.size();
        if (!series.empty()) {
            const Cep c = cep(series);
            jt["cep68"] = c.radius;
            jt["cep68_center"] = {c.center.x, c.center.y};
            if (truths && t < truths->size()) {
                jt["cep68_truth_centered"] = cep_about(series, (*truths)[t]).radius;
                jt["accuracy"] = accuracy(series, (*truths)[t]);
            }
        }
        tags.push_back(jt);
    }
    return tags;
}

int cmd_validate(const std::string& scenario_path) {
    try {
        Scenario s = parse_scenario(scenario_path);
        std::cout << "scenario OK: " << s.anchors.size() << " anchors, "
                  << s.n_tags() << " tags, " << s.periods << " periods\n";
        return 0;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::string& mode, long long seed_override, bool dump,
                 int burn_in, const FilterConfig& cfg) {
    Scenario s = parse_scenario(scenario_path);
    if (seed_override >= 0) s.seed = static_cast<std::uint64_t>(seed_override);
    const ModeRuns runs = parse_mode(mode);

    std::mt19937_64 rng(s.seed);
    const std::vector<RawPeriod> periods = synthesize_periods(s, rng);
    if (dump) {
        std::filesystem::create_directories(out_dir);
        dump_measurements(periods, (std::filesystem::path(out_dir) / "measurements.csv").string());
    }

    const MeasurementNoiseSpec noise{s.sigma_toa, s.sigma_twr, true};
    const std::string hash = scenario_hash(s);
    for (const auto& [name, coop] : runs.list) {
        RunResult run = run_periods(periods, s.anchors, s.room, s.grid_step, coop, noise, cfg);
        run.seed = s.seed;

        ExportBundle bundle;
        bundle.seed = s.seed;
        bundle.mode = name;
        bundle.scenario_hash = hash;
        bundle.estimates = run.estimates;
        bundle.metrics["burn_in"] = burn_in;
        bundle.metrics["tags"] = per_tag_metrics(run, &s.tag_truths, burn_in);
        const std::string dir = runs.list.size() == 1
                                    ? out_dir
                                    : (std::filesystem::path(out_dir) / name).string();
        export_results(bundle, dir);
        std::cout << "wrote " << dir << " (" << name << ")\n";
    }
    return 0;
}

int cmd_montecarlo(const std::string& scenario_path, int configs, const std::string& out_dir,
                   long long seed_override, int threads, int burn_in,
                   const FilterConfig& cfg) {
    Scenario base = parse_scenario(scenario_path);
    const std::uint64_t seed =
        seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : base.seed;

    const auto items = run_monte_carlo(base, configs, seed, cfg, threads);

    std::vector<double> cep_tdoa, cep_coop;
    int failed = 0;
    for (const auto& item : items) {
        if (!item.ok) {
            ++failed;
            continue;
        }
        for (int t = 0; t < base.n_tags(); ++t) {
            const auto st = item.tdoa_run.tag_series(t, burn_in);
            const auto sc = item.coop_run.tag_series(t, burn_in);
            if (st.empty() || sc.empty()) continue;
            cep_tdoa.push_back(cep(st).radius);
            cep_coop.push_back(cep(sc).radius);
        }
    }
    if (cep_tdoa.empty()) {
        std::cerr << "montecarlo: no usable configurations\n";
        return 1;
    }
    const ComparisonSummary cmp = compare_algorithms(cep_tdoa, cep_coop);

    ExportBundle bundle;
    bundle.seed = seed;
    bundle.mode = "both";
    bundle.scenario_hash = scenario_hash(base);
    bundle.metrics["n_configs"] = configs;
    bundle.metrics["n_failed_configs"] = failed;
    bundle.metrics["burn_in"] = burn_in;
    bundle.metrics["n_cep_pairs"] = cep_tdoa.size();
    bundle.metrics["median_cep68_tdoa"] = cmp.median_tdoa;
    bundle.metrics["median_cep68_coop"] = cmp.median_coop;
    bundle.metrics["max_cep68_tdoa"] = cmp.max_tdoa;
    bundle.metrics["max_cep68_coop"] = cmp.max_coop;
    bundle.metrics["frac_tdoa_above_coop_max"] = cmp.frac_tdoa_above_coop_max;
    bundle.cdfs.emplace_back("tdoa", cmp.cdf_tdoa);
    bundle.cdfs.emplace_back("coop", cmp.cdf_coop);
    export_results(bundle, out_dir);
    std::cout << "configs=" << configs << " pairs=" << cep_tdoa.size()
              << " median_tdoa=" << cmp.median_tdoa
              << " median_coop=" << cmp.median_coop << "\n";
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& layout_path,
               const std::string& out_dir, const std::string& mode, int burn_in,
               const FilterConfig& cfg) {
    const ReplayLayout layout = parse_layout(layout_path);
    const std::vector<RawPeriod> periods = ingest_replay(log_path, layout);
    if (periods.empty()) {
        std::cerr << "replay: log contains no periods\n";
        return 1;
    }
    const ModeRuns runs = parse_mode(mode);
    const MeasurementNoiseSpec noise{layout.sigma_toa, layout.sigma_twr, true};
    for (const auto& [name, coop] : runs.list) {
        RunResult run = run_periods(periods, layout.anchors, layout.room,
                                    layout.grid_step, coop, noise, cfg);
        ExportBundle bundle;
        bundle.mode = name;
        bundle.estimates = run.estimates;
        bundle.metrics["burn_in"] = burn_in;
        bundle.metrics["tags"] = per_tag_metrics(run, nullptr, burn_in);
        const std::string dir = runs.list.size() == 1
                                    ? out_dir
                                    : (std::filesystem::path(out_dir) / name).string();
        export_results(bundle, dir);
        std::cout << "wrote " << dir << " (" << name << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative UWB positioning: TDOA+TWR simulation and estimation"};
    app.require_subcommand(1);

    uwbcoop::FilterConfig cfg;
    app.add_option("--dt", cfg.dt, "Seconds per positioning period")->capture_default_str();
    app.add_option("--q-accel", cfg.q_accel, "Process noise spectral density (m^2/s^3)")
        ->capture_default_str();
    int burn_in = uwbcoop::kDefaultBurnIn;
    app.add_option("--burn-in", burn_in, "Periods excluded from metrics")->capture_default_str();

    std::string scenario_path, out_dir, mode = "coop";
    long long seed = -1;
    bool dump = false;
    int configs = 500, threads = 0;
    std::string log_path, layout_path;

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", scenario_path, "Scenario JSON")->required();

    auto* simulate = app.add_subcommand("simulate", "Run one scenario");
    simulate->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--mode", mode, "tdoa|coop|both")->capture_default_str();
    simulate->add_option("--seed", seed, "Override scenario seed");
    simulate->add_flag("--dump-measurements", dump, "Write measurements.csv (replayable)");

    auto* montecarlo = app.add_subcommand("montecarlo", "Paired two-mode Monte-Carlo sweep");
    montecarlo->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    montecarlo->add_option("--configs", configs, "Number of tag configurations")->required();
    montecarlo->add_option("--out", out_dir, "Output directory")->required();
    montecarlo->add_option("--seed", seed, "Master seed (default: scenario seed)");
    montecarlo->add_option("--threads", threads, "Worker threads (0 = auto)");

    auto* replay = app.add_subcommand("replay", "Estimate from a recorded measurement log");
    replay->add_option("--log", log_path, "Measurement CSV")->required();
    replay->add_option("--layout", layout_path, "Layout JSON")->required();
    replay->add_option("--out", out_dir, "Output directory")->required();
    replay->add_option("--mode", mode, "tdoa|coop|both")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(scenario_path);
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, out_dir, mode, seed, dump, burn_in, cfg);
        }
        if (montecarlo->parsed()) {
            return cmd_montecarlo(scenario_path, configs, out_dir, seed, threads, burn_in, cfg);
        }
        if (replay->parsed()) {
            return cmd_replay(log_path, layout_path, out_dir, mode, burn_in, cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
