#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwbcoop/ekf.hpp"
#include "uwbcoop/transmission.hpp"

namespace uwbcoop {

/// Raw measurements of one positioning period, before TDOA formation and
/// bundle assembly. This is also the unit of the replay log: TOAs in seconds
/// per (tag, anchor), one range in meters per tag pair.
struct RawPeriod {
    // toas[t]: anchor index -> TOA (seconds) for tag t's packet. Empty when
    // the tag did not transmit that period; anchors out of range are simply
    // absent from the map.
    std::vector<std::map<int, double>> toas;
    std::map<TagPair, double> pair_ranges;
};

/// Forward-simulate all periods of a scenario: one chained ranging round per
/// period (propagation times recovered per the chain formulas, range noise
/// added on the recovered ranges), plus noisy per-anchor TOAs for every
/// transmitting tag. Independent of the cooperative flag, so both algorithm
/// variants can consume the same draws.
std::vector<RawPeriod> synthesize_periods(const Scenario& s, std::mt19937_64& rng);

struct PeriodResult {
    std::vector<std::optional<TagState>> states;   // a-posteriori, per tag
    std::vector<Covariance> covariances;
    std::vector<MeasurementBundle> bundles;        // as used this period
    std::vector<bool> dropped;
};

/// Per-tag EKF bank for one scenario run. All tags within a period see the
/// same snapshot of peer positions, taken at period start, so processing
/// order does not affect results.
class CooperativeEngine {
public:
    CooperativeEngine(AnchorSet anchors, Rect room, double grid_step,
                      bool cooperative, MeasurementNoiseSpec noise, FilterConfig cfg);

    PeriodResult run_period(const RawPeriod& raw, int period_index);

    const std::optional<TagState>& tag_state(int tag) const { return states_.at(tag); }

private:
    AnchorSet anchors_;
    Rect room_;
    double grid_step_;
    bool cooperative_;
    MeasurementNoiseSpec noise_;
    FilterConfig cfg_;
    std::vector<std::optional<TagState>> states_;
    std::vector<Covariance> covs_;
    bool sized_ = false;

    void ensure_size(int n_tags);
};

struct RunResult {
    // estimates[tag][period]: a-posteriori position, or absent when the tag
    // was failed / uninitialized / dropped that period.
    std::vector<std::vector<std::optional<Point2>>> estimates;
    std::uint64_t seed = 0;
    bool cooperative = true;
    int n_dropped = 0;

    /// Valid estimates for one tag, skipping the first `burn_in` periods.
    std::vector<Point2> tag_series(int tag, int burn_in) const;
};

RunResult run_periods(const std::vector<RawPeriod>& periods, const AnchorSet& anchors,
                      const Rect& room, double grid_step, bool cooperative,
                      const MeasurementNoiseSpec& noise, const FilterConfig& cfg);

/// synthesize_periods + run_periods with the scenario's own seed and mode.
RunResult run_scenario(const Scenario& s, const FilterConfig& cfg = {});

inline constexpr int kDefaultBurnIn = 50;

struct MonteCarloItem {
    int config_index = 0;
    std::vector<Point2> tag_truths;
    RunResult tdoa_run;
    RunResult coop_run;
    bool ok = false;
    std::string error;
};

/// Paired Monte-Carlo sweep: per configuration, sample tag placements from
/// the grid, synthesize one measurement stream, and run it through both the
/// TDOA-only and the cooperative estimator (common random numbers).
/// n_threads = 0 picks the hardware concurrency.
std::vector<MonteCarloItem> run_monte_carlo(const Scenario& base, int n_configs,
                                            std::uint64_t master_seed,
                                            const FilterConfig& cfg = {},
                                            int n_threads = 0);

}  // namespace uwbcoop
