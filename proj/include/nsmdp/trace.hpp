#pragma once

#include <vector>

namespace nsmdp {

struct StepRecord {
    int t;          // global time, 1-based
    int state;
    int action;
    double realized_reward;
    double mean_reward;
};

enum class EpisodeEnd { horizon, window_multiple, doubling };

struct EpisodeRecord {
    int start_t;            // global time of the first step
    int local_start;        // segment-local time (tau(m) of the sub-run)
    int length;
    int window;
    double eta;
    double evi_epsilon;
    EpisodeEnd end_reason;
    std::vector<int> policy;       // [s]
    std::vector<long> n_plus;      // [pair], window counts at episode start (floored)
    std::vector<long> nu;          // [pair], in-episode visit counts at episode end
};

// Boundary of one fresh agent sub-run (a BORL block or an UCRL2.S segment).
struct SegmentRecord {
    int start_t;
    int length;
    int window;
    double eta;
};

struct Trace {
    std::vector<StepRecord> steps;
    std::vector<EpisodeRecord> episodes;
    std::vector<SegmentRecord> segments;
};

} // namespace nsmdp
