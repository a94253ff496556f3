#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "uwbcoop/geometry.hpp"

namespace uwbcoop {

using TagPair = std::pair<int, int>;

inline TagPair make_pair_key(int a, int b) {
    return a < b ? TagPair{a, b} : TagPair{b, a};
}

/// Raw interval measurements of one chained ranging round.
///
/// Tag k transmits packet k (0-based). Each replying tag starts its fixed
/// delay from the packet it actually received, so a broken tag in the middle
/// of the chain does not stall the round.
///
/// Two interval families are recorded, each on the measuring tag's own clock:
///   - tx_to_rx[{k,j}]: tag k, own TX -> RX of packet j (j transmitted later).
///   - wait[{j,k}]: tag j, RX of packet k -> RX of its trigger packet.
/// For the three-tag scheme these are t12/t13 (tag 1), t23 (tag 2) and the
/// wait interval t3w (tag 3).
struct TimingRecord {
    int n_tags = 0;
    std::vector<double> delays;  // nominal reply delays, seconds; index 0 unused
    std::set<int> responders;    // tags that transmitted this round
    std::map<int, int> trigger;  // replying tag -> packet index that triggered it
    std::map<TagPair, double> tx_to_rx;
    std::map<TagPair, double> wait;

    std::optional<double> interval(int measurer, int packet) const {
        auto it = tx_to_rx.find({measurer, packet});
        if (it == tx_to_rx.end()) return std::nullopt;
        return it->second;
    }
    std::optional<double> wait_interval(int measurer, int packet) const {
        auto it = wait.find({measurer, packet});
        if (it == wait.end()) return std::nullopt;
        return it->second;
    }

    // Fig.-2 naming for the 3-tag round (paper indices are 1-based).
    std::optional<double> t12() const { return interval(0, 1); }
    std::optional<double> t13() const { return interval(0, 2); }
    std::optional<double> t23() const { return interval(1, 2); }
    std::optional<double> t3w() const { return wait_interval(2, 0); }
};

struct PropagationTimes {
    std::map<TagPair, double> tp;   // seconds, available pairs only
    std::set<TagPair> invalid;      // recovered negative beyond tolerance

    std::optional<double> get(int a, int b) const {
        auto it = tp.find(make_pair_key(a, b));
        if (it == tp.end()) return std::nullopt;
        return it->second;
    }
};

/// Transmission plan for an n-tag chain: one packet per tag, and the interval
/// set each tag must time so that every pairwise propagation time is
/// recoverable.
struct ChainPlan {
    int n_tags = 0;
    // tx_rx_targets[k]: packets j>k whose arrival tag k times against its own TX.
    std::vector<std::vector<int>> tx_rx_targets;
    // wait_targets[j]: packets k<j-1 whose arrival tag j times against the
    // arrival of its trigger packet j-1.
    std::vector<std::vector<int>> wait_targets;
};

ChainPlan chain_schedule(int n_tags);

/// Forward-simulate one ranging round.
///
/// Clock model: a tag with fractional frequency error e runs its reply delay
/// on its own clock (true delay = delta/(1+e)) and reports every interval it
/// measures scaled by (1+e). Gaussian jitter of std timing_jitter_std is added
/// to each reported interval.
///
/// Throws std::runtime_error with fewer than 2 live tags.
TimingRecord simulate_round(const std::vector<Point2>& tag_positions,
                            const std::vector<double>& delays,
                            const std::vector<double>& clock_ppm,
                            const std::set<int>& failed,
                            std::mt19937_64& rng,
                            double timing_jitter_std = 0.0);

/// Invert the round per the chain formulas: adjacent-in-chain pairs via
/// tp = (t - delta)/2, others via tp = (t - delta - wait)/2. Pairs lacking
/// inputs are absent from the result; recovered times below -neg_tolerance_s
/// are reported in `invalid` instead of tp.
PropagationTimes recover_propagation_times(const TimingRecord& rec,
                                           double neg_tolerance_s = 0.0);

}  // namespace uwbcoop
