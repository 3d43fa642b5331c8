#include "nsmdp/sliding_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nsmdp {

WindowBuffer::WindowBuffer(int window, ActionLayout layout)
    : window_(window), layout_(std::move(layout)) {
    if (window_ <= 0) throw std::invalid_argument("WindowBuffer: window must be positive");
    counts_.layout = layout_;
    counts_.n.assign(layout_.total_pairs(), 0);
    counts_.reward_sum.assign(layout_.total_pairs(), 0.0);
    counts_.next_counts.assign(static_cast<std::size_t>(layout_.total_pairs()) * layout_.num_states, 0);
}

void WindowBuffer::record(int t, int s, int a, double reward, int next_state) {
    if (t <= last_time_) throw std::invalid_argument("WindowBuffer::record: time must be strictly increasing");
    if (s < 0 || s >= layout_.num_states || a < 0 || a >= layout_.actions_per_state[s] ||
        next_state < 0 || next_state >= layout_.num_states)
        throw std::out_of_range("WindowBuffer::record: index out of range");
    last_time_ = t;
    entries_.push_back({t, s, a, next_state, reward});
    int pair = layout_.pair(s, a);
    counts_.n[pair] += 1;
    counts_.reward_sum[pair] += reward;
    counts_.next_counts[static_cast<std::size_t>(pair) * layout_.num_states + next_state] += 1;
}

void WindowBuffer::evict_before(int cutoff) {
    while (!entries_.empty() && entries_.front().t < cutoff) {
        const Entry& e = entries_.front();
        int pair = layout_.pair(e.s, e.a);
        counts_.n[pair] -= 1;
        counts_.reward_sum[pair] -= e.reward;
        counts_.next_counts[static_cast<std::size_t>(pair) * layout_.num_states + e.next] -= 1;
        entries_.pop_front();
    }
}

const Counts& WindowBuffer::snapshot(int t) {
    if (t <= last_time_)
        throw std::invalid_argument("WindowBuffer::snapshot: query time must follow the recorded steps");
    evict_before(t - window_); // keep [(t-W) v 1, t-1]
    return counts_;
}

Regions ConfidenceRegionSet::to_regions(bool clip_rewards) const {
    Regions r = Regions::sized(layout);
    const int S = layout.num_states;
    for (int pair = 0; pair < layout.total_pairs(); ++pair) {
        double lo = reward_center[pair] - reward_radius[pair];
        double hi = reward_center[pair] + reward_radius[pair];
        if (clip_rewards) {
            lo = std::clamp(lo, 0.0, 1.0);
            hi = std::clamp(hi, 0.0, 1.0);
        }
        r.reward_lo[pair] = lo;
        r.reward_hi[pair] = hi;
        r.p_budget[pair] = p_radius[pair] + eta;
        r.empty_center[pair] = n[pair] == 0 ? 1 : 0;
        for (int sp = 0; sp < S; ++sp)
            r.p_center[pair * S + sp] = p_center[pair * S + sp];
    }
    return r;
}

std::string ConfidenceRegionSet::dump() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "delta=%g eta=%g\n", delta, eta);
    out += buf;
    const int S = layout.num_states;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < layout.actions_per_state[s]; ++a) {
            int pair = layout.pair(s, a);
            std::snprintf(buf, sizeof(buf), "(s=%d,a=%d) N=%ld r_hat=%.6g rad_r=%.6g rad_p=%.6g p_hat=[",
                          s, a, n[pair], reward_center[pair], reward_radius[pair], p_radius[pair]);
            out += buf;
            for (int sp = 0; sp < S; ++sp) {
                std::snprintf(buf, sizeof(buf), "%s%.6g", sp ? "," : "", p_center[pair * S + sp]);
                out += buf;
            }
            out += "]\n";
        }
    }
    return out;
}

ConfidenceRegionSet build_regions(const Counts& counts, double delta, double eta, int T) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("build_regions: delta must be in (0,1)");
    if (eta < 0.0) throw std::invalid_argument("build_regions: eta must be non-negative");
    const ActionLayout& layout = counts.layout;
    const int S = layout.num_states;
    ConfidenceRegionSet set;
    set.layout = layout;
    set.delta = delta;
    set.eta = eta;
    set.n = counts.n;
    set.reward_center.resize(layout.total_pairs());
    set.reward_radius.resize(layout.total_pairs());
    set.p_radius.resize(layout.total_pairs());
    set.p_center.assign(static_cast<std::size_t>(layout.total_pairs()) * S, 0.0);
    const double log_term = std::log(S * layout.average_actions() * T / delta);
    for (int pair = 0; pair < layout.total_pairs(); ++pair) {
        double n_plus = static_cast<double>(counts.n_plus(pair));
        set.reward_center[pair] = counts.reward_sum[pair] / n_plus;
        set.reward_radius[pair] = 2.0 * std::sqrt(2.0 * log_term / n_plus);
        set.p_radius[pair] = 2.0 * std::sqrt(2.0 * S * log_term / n_plus);
        if (counts.n[pair] > 0) {
            for (int sp = 0; sp < S; ++sp)
                set.p_center[pair * S + sp] =
                    static_cast<double>(counts.next_counts[pair * S + sp]) / n_plus;
        }
    }
    return set;
}

ConfidenceRegionSet build_regions(WindowBuffer& buffer, int t, double delta, double eta, int T) {
    return build_regions(buffer.snapshot(t), delta, eta, T);
}

} // namespace nsmdp
