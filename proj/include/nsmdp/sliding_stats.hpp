#pragma once

#include <deque>
#include <string>
#include <vector>

#include "nsmdp/evi.hpp"
#include "nsmdp/mdp.hpp"

namespace nsmdp {

// Windowed visit statistics. n_plus applies the max{1,.} floor.
struct Counts {
    ActionLayout layout;
    std::vector<long> n;             // [pair]
    std::vector<double> reward_sum;  // [pair]
    std::vector<long> next_counts;   // [pair * S + s']

    long n_plus(int pair) const { return n[pair] > 0 ? n[pair] : 1; }
    double reward_mean(int pair) const { return reward_sum[pair] / static_cast<double>(n_plus(pair)); }
};

// Ring of the last W trajectory steps, with incrementally maintained counts.
// Entries strictly older than the window are evicted on the next query.
class WindowBuffer {
public:
    WindowBuffer(int window, ActionLayout layout);

    void record(int t, int s, int a, double reward, int next_state);

    // counts over the window [(t-W) v 1, t-1]
    const Counts& snapshot(int t);

    int window() const { return window_; }
    const ActionLayout& layout() const { return layout_; }
    int last_time() const { return last_time_; }

private:
    struct Entry {
        int t, s, a, next;
        double reward;
    };
    void evict_before(int cutoff);

    int window_;
    ActionLayout layout_;
    std::deque<Entry> entries_;
    Counts counts_;
    int last_time_ = 0;
};

// Reward intervals and widened transition L1 balls at one time step.
// Empty pairs (N=0) carry zero centers; their radii exceed the diameter of
// the value range, so the regions degenerate to the full interval/simplex.
struct ConfidenceRegionSet {
    ActionLayout layout;
    double delta = 0.0;
    double eta = 0.0;
    std::vector<long> n;                 // [pair], window count N_t
    std::vector<double> reward_center;   // [pair], r-hat
    std::vector<double> reward_radius;   // [pair]
    std::vector<double> p_center;        // [pair * S + s'], p-hat
    std::vector<double> p_radius;        // [pair], un-widened

    // clip_rewards intersects the reward interval with [0,1]; disabled for
    // nonconforming instances whose rewards live outside the unit interval
    Regions to_regions(bool clip_rewards = true) const;
    std::string dump() const;
};

// Centers are window empirical means, radii follow the
// 2*sqrt(2*ln(S*A*T/delta)/N+) and 2*sqrt(2*S*ln(S*A*T/delta)/N+) rules
// (natural log; A is the average number of actions per state).
ConfidenceRegionSet build_regions(WindowBuffer& buffer, int t, double delta, double eta, int T);
ConfidenceRegionSet build_regions(const Counts& counts, double delta, double eta, int T);

} // namespace nsmdp
