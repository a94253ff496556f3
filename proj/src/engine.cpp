#include "uwbcoop/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "uwbcoop/rng.hpp"

namespace uwbcoop {

namespace {

constexpr double kDefaultReplyDelay = 1e-3;     // seconds
constexpr double kDegenerateRowDist = 1e-3;     // meters

// Conservative scale on the peer-uncertainty term added to range rows in R.
// The projected peer covariance alone underestimates the effective range
// error: peer filter covariances do not capture the correlation between a
// tag's own error and its peers' errors (all tags share the same anchor
// constellation), so the raw projection over-trusts tag-to-tag ranges and
// lets the whole constellation drift coherently. The factor is calibrated
// against the reference-scenario Monte-Carlo distributions.
constexpr double kPeerErrorInflation = 8.0;

std::vector<double> effective_delays(const Scenario& s) {
    if (!s.reply_delays.empty()) return s.reply_delays;
    return std::vector<double>(s.n_tags(), kDefaultReplyDelay);
}

}  // namespace

std::vector<RawPeriod> synthesize_periods(const Scenario& s, std::mt19937_64& rng) {
    const int n = s.n_tags();
    const std::vector<double> delays = effective_delays(s);
    const std::vector<double> ppm =
        s.clock_ppm.empty() ? std::vector<double>(n, 0.0) : s.clock_ppm;
    // Recovered times more negative than 3 sigma of the range noise (in
    // seconds) mark the pair invalid for the period.
    const double neg_tol = 3.0 * s.sigma_twr / kSpeedOfLight;
    std::normal_distribution<double> range_noise(0.0, s.sigma_twr);

    std::vector<RawPeriod> out;
    out.reserve(s.periods);
    for (int p = 0; p < s.periods; ++p) {
        RawPeriod period;
        period.toas.resize(n);

        TimingRecord rec = simulate_round(s.tag_truths, delays, ppm, s.failed_tags, rng);
        PropagationTimes tp = recover_propagation_times(rec, neg_tol);

        // Anchors only hear tags that transmitted.
        for (int t = 0; t < n; ++t) {
            if (!rec.responders.count(t)) continue;
            const auto toas = synth_toas(s.tag_truths[t], s.anchors, s.sigma_toa, rng);
            for (int a = 0; a < s.anchors.size(); ++a) period.toas[t][a] = toas[a];
        }
        for (const auto& [pair, tsec] : tp.tp) {
            double r = tsec * kSpeedOfLight;
            if (s.sigma_twr > 0.0) r += range_noise(rng);
            period.pair_ranges[pair] = r;
        }
        out.push_back(std::move(period));
    }
    return out;
}

CooperativeEngine::CooperativeEngine(AnchorSet anchors, Rect room, double grid_step,
                                     bool cooperative, MeasurementNoiseSpec noise,
                                     FilterConfig cfg)
    : anchors_(std::move(anchors)),
      room_(room),
      grid_step_(grid_step),
      cooperative_(cooperative),
      noise_(noise),
      cfg_(cfg) {}

void CooperativeEngine::ensure_size(int n_tags) {
    if (sized_) return;
    states_.resize(n_tags);
    covs_.resize(n_tags, Covariance::Zero());
    sized_ = true;
}

PeriodResult CooperativeEngine::run_period(const RawPeriod& raw, int /*period_index*/) {
    const int n = static_cast<int>(raw.toas.size());
    ensure_size(n);

    PeriodResult res;
    res.states.resize(n);
    res.covariances.resize(n, Covariance::Zero());
    res.bundles.resize(n);
    res.dropped.assign(n, false);

    // Snapshot of peer positions (and their position covariances) at period
    // start; all tags fuse against the same snapshot regardless of processing
    // order.
    std::vector<std::optional<Point2>> snapshot(n);
    std::vector<Eigen::Matrix2d> snapshot_cov(n, Eigen::Matrix2d::Zero());
    for (int t = 0; t < n; ++t) {
        if (states_[t]) {
            snapshot[t] = states_[t]->position();
            snapshot_cov[t] = covs_[t].topLeftCorner<2, 2>();
        }
    }

    for (int t = 0; t < n; ++t) {
        const auto& toa_map = raw.toas[t];
        // No TOAs: the tag did not transmit. No reference-anchor TOA: no
        // common time base, so no TDOAs can be formed this period.
        if (toa_map.empty() || !toa_map.count(anchors_.reference_index)) {
            res.dropped[t] = true;
            continue;
        }
        const double toa_ref = toa_map.at(anchors_.reference_index);
        std::vector<TdoaEntry> tdoa;
        for (const auto& [idx, toa] : toa_map) {
            if (idx == anchors_.reference_index) continue;
            tdoa.push_back({idx, kSpeedOfLight * (toa - toa_ref)});
        }

        if (!states_[t]) {
            MeasurementBundle init_bundle;
            init_bundle.tdoa = tdoa;
            auto init = init_filter(init_bundle, anchors_, room_, grid_step_, cfg_);
            if (!init) {
                res.dropped[t] = true;
                continue;
            }
            states_[t] = init->first;
            covs_[t] = init->second;
        } else {
            predict(*states_[t], covs_[t], cfg_);
        }

        const Point2 prior_pos = states_[t]->position();
        MeasurementBundle bundle;
        const Point2& ref = anchors_.reference();
        for (const auto& e : tdoa) {
            // Drop rows that would be degenerate at the linearization point.
            if (distance(prior_pos, anchors_.positions.at(e.anchor_index)) < kDegenerateRowDist ||
                distance(prior_pos, ref) < kDegenerateRowDist) {
                continue;
            }
            bundle.tdoa.push_back(e);
        }
        if (cooperative_) {
            for (int peer = 0; peer < n; ++peer) {
                if (peer == t || !snapshot[peer]) continue;
                auto it = raw.pair_ranges.find(make_pair_key(t, peer));
                if (it == raw.pair_ranges.end()) continue;
                if (distance(prior_pos, *snapshot[peer]) < kDegenerateRowDist) continue;
                bundle.ranges.push_back({peer, it->second, *snapshot[peer]});
            }
        }
        res.bundles[t] = bundle;

        if (bundle.size() == 0) {
            res.dropped[t] = true;
            continue;
        }
        // R is rebuilt per period because the bundle length varies. Each range
        // row additionally carries the peer's own positional uncertainty,
        // projected on the line of sight: the peer snapshot is an estimate,
        // not ground truth, and treating it as exact destabilizes the
        // tag-to-tag feedback loop (weights auto-balance as peers wobble).
        Eigen::MatrixXd R = build_noise_covariance(
            noise_, static_cast<int>(bundle.tdoa.size()),
            static_cast<int>(bundle.ranges.size()));
        const int n_tdoa = static_cast<int>(bundle.tdoa.size());
        for (std::size_t r = 0; r < bundle.ranges.size(); ++r) {
            const auto& entry = bundle.ranges[r];
            const double d = distance(prior_pos, entry.peer_position);
            Eigen::Vector2d los((prior_pos.x - entry.peer_position.x) / d,
                                (prior_pos.y - entry.peer_position.y) / d);
            R(n_tdoa + r, n_tdoa + r) +=
                kPeerErrorInflation * los.dot(snapshot_cov[entry.peer_index] * los);
        }

        UpdateResult up = update(*states_[t], covs_[t], bundle, R, anchors_);
        if (!up.ok) {
            res.dropped[t] = true;
            continue;
        }
        states_[t] = up.state;
        covs_[t] = up.P;
        res.states[t] = up.state;
        res.covariances[t] = up.P;
    }
    return res;
}

std::vector<Point2> RunResult::tag_series(int tag, int burn_in) const {
    std::vector<Point2> out;
    const auto& series = estimates.at(tag);
    for (std::size_t p = burn_in; p < series.size(); ++p) {
        if (series[p]) out.push_back(*series[p]);
    }
    return out;
}

RunResult run_periods(const std::vector<RawPeriod>& periods, const AnchorSet& anchors,
                      const Rect& room, double grid_step, bool cooperative,
                      const MeasurementNoiseSpec& noise, const FilterConfig& cfg) {
    if (periods.empty()) throw std::invalid_argument("run_periods: no periods");
    const int n = static_cast<int>(periods.front().toas.size());

    CooperativeEngine engine(anchors, room, grid_step, cooperative, noise, cfg);
    RunResult result;
    result.cooperative = cooperative;
    result.estimates.assign(n, {});
    for (auto& v : result.estimates) v.resize(periods.size());

    for (std::size_t p = 0; p < periods.size(); ++p) {
        PeriodResult pr = engine.run_period(periods[p], static_cast<int>(p));
        for (int t = 0; t < n; ++t) {
            if (pr.states[t]) {
                result.estimates[t][p] = pr.states[t]->position();
            } else {
                ++result.n_dropped;
            }
        }
    }
    return result;
}

RunResult run_scenario(const Scenario& s, const FilterConfig& cfg) {
    auto errs = validate_scenario(s);
    if (!errs.empty()) {
        throw std::invalid_argument("run_scenario: invalid scenario: " + errs.front());
    }
    std::mt19937_64 rng(s.seed);
    const std::vector<RawPeriod> periods = synthesize_periods(s, rng);
    MeasurementNoiseSpec noise{s.sigma_toa, s.sigma_twr, true};
    RunResult r = run_periods(periods, s.anchors, s.room, s.grid_step, s.cooperative, noise, cfg);
    r.seed = s.seed;
    return r;
}

std::vector<MonteCarloItem> run_monte_carlo(const Scenario& base, int n_configs,
                                            std::uint64_t master_seed,
                                            const FilterConfig& cfg, int n_threads) {
    if (n_configs < 1) throw std::invalid_argument("run_monte_carlo: n_configs must be >= 1");
    std::vector<MonteCarloItem> items(n_configs);

    auto run_one = [&](int idx) {
        MonteCarloItem item;
        item.config_index = idx;
        try {
            std::mt19937_64 place_rng(derive_seed(master_seed, 2 * idx));
            Scenario s = base;
            s.tag_truths = sample_tag_configuration(base.room, base.grid_step,
                                                    base.n_tags(), place_rng);
            s.seed = derive_seed(master_seed, 2 * idx + 1);
            item.tag_truths = s.tag_truths;

            std::mt19937_64 meas_rng(s.seed);
            const std::vector<RawPeriod> periods = synthesize_periods(s, meas_rng);
            const MeasurementNoiseSpec noise{s.sigma_toa, s.sigma_twr, true};
            item.tdoa_run = run_periods(periods, s.anchors, s.room, s.grid_step,
                                        /*cooperative=*/false, noise, cfg);
            item.coop_run = run_periods(periods, s.anchors, s.room, s.grid_step,
                                        /*cooperative=*/true, noise, cfg);
            item.tdoa_run.seed = item.coop_run.seed = s.seed;
            item.ok = true;
        } catch (const std::exception& e) {
            item.ok = false;
            item.error = e.what();
        }
        items[idx] = std::move(item);
    };

    int threads = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_configs));
    if (threads == 1) {
        for (int i = 0; i < n_configs; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_configs; i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return items;
}

}  // namespace uwbcoop
