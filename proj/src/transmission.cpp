#include "uwbcoop/transmission.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbcoop {

ChainPlan chain_schedule(int n_tags) {
    if (n_tags < 2) {
        throw std::invalid_argument("chain_schedule: need at least 2 tags");
    }
    ChainPlan plan;
    plan.n_tags = n_tags;
    plan.tx_rx_targets.resize(n_tags);
    plan.wait_targets.resize(n_tags);
    for (int k = 0; k < n_tags; ++k) {
        for (int j = k + 1; j < n_tags; ++j) plan.tx_rx_targets[k].push_back(j);
        for (int p = 0; p + 1 < k; ++p) plan.wait_targets[k].push_back(p);
    }
    return plan;
}

TimingRecord simulate_round(const std::vector<Point2>& tag_positions,
                            const std::vector<double>& delays,
                            const std::vector<double>& clock_ppm,
                            const std::set<int>& failed,
                            std::mt19937_64& rng,
                            double timing_jitter_std) {
    const int n = static_cast<int>(tag_positions.size());
    std::vector<int> live;
    for (int k = 0; k < n; ++k) {
        if (!failed.count(k)) live.push_back(k);
    }
    if (live.size() < 2) {
        throw std::runtime_error("simulate_round: fewer than 2 live tags, round aborted");
    }

    auto ppm = [&](int k) {
        return k < static_cast<int>(clock_ppm.size()) ? clock_ppm[k] : 0.0;
    };
    auto tp = [&](int a, int b) {
        return distance(tag_positions[a], tag_positions[b]) / kSpeedOfLight;
    };
    std::normal_distribution<double> jitter(0.0, timing_jitter_std);
    auto measure = [&](double true_interval, int measurer) {
        double v = true_interval * (1.0 + ppm(measurer));
        if (timing_jitter_std > 0.0) v += jitter(rng);
        return v;
    };

    TimingRecord rec;
    rec.n_tags = n;
    rec.delays = delays;

    // Global transmit times. The chain starts with the first live tag; each
    // later live tag fires a fixed delay (on its own clock) after the packet
    // of the previous live tag.
    std::vector<double> tx(n, 0.0);
    int prev = live[0];
    tx[prev] = 0.0;
    rec.responders.insert(prev);
    for (std::size_t i = 1; i < live.size(); ++i) {
        const int k = live[i];
        const double delta = delays.at(k) / (1.0 + ppm(k));
        tx[k] = tx[prev] + tp(prev, k) + delta;
        rec.trigger[k] = prev;
        rec.responders.insert(k);
        prev = k;
    }

    // Own-TX-to-RX intervals: tag k times every later packet against its own.
    for (std::size_t a = 0; a < live.size(); ++a) {
        for (std::size_t b = a + 1; b < live.size(); ++b) {
            const int k = live[a], j = live[b];
            const double t = tx[j] + tp(j, k) - tx[k];
            rec.tx_to_rx[{k, j}] = measure(t, k);
        }
    }
    // Wait intervals: a replying tag times earlier packets against the
    // arrival of its trigger packet.
    for (const auto& [j, p] : rec.trigger) {
        for (int k : live) {
            if (k >= p) break;
            const double w = (tx[p] + tp(p, j)) - (tx[k] + tp(k, j));
            rec.wait[{j, k}] = measure(w, j);
        }
    }
    return rec;
}

PropagationTimes recover_propagation_times(const TimingRecord& rec,
                                           double neg_tolerance_s) {
    PropagationTimes out;
    for (int k : rec.responders) {
        for (int j : rec.responders) {
            if (j <= k) continue;
            auto t = rec.interval(k, j);
            if (!t) continue;
            auto trig = rec.trigger.find(j);
            if (trig == rec.trigger.end()) continue;
            const double delta = rec.delays.at(j);
            double tp;
            if (trig->second == k) {
                tp = (*t - delta) / 2.0;  // direct reply
            } else {
                auto w = rec.wait_interval(j, k);
                if (!w) continue;
                tp = (*t - delta - *w) / 2.0;
            }
            if (tp < -neg_tolerance_s) {
                out.invalid.insert({k, j});
            } else {
                out.tp[{k, j}] = tp;
            }
        }
    }
    return out;
}

}  // namespace uwbcoop
