#include "nsmdp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsmdp {

GainBias optimal_gain(const MdpSlice& slice, double tolerance, long max_iterations) {
    if (tolerance <= 0.0) throw std::invalid_argument("optimal_gain: tolerance must be positive");
    try {
        EviResult evi = extended_value_iteration(point_regions(slice), tolerance, max_iterations);
        return {evi.gain, std::move(evi.bias)};
    } catch (const EviNonConvergent&) {
        throw std::runtime_error("optimal_gain: non-convergent (possibly non-communicating)");
    }
}

namespace {

// states from which `target` is unreachable in the union-over-actions support
// graph can never have a finite hitting time
std::vector<char> can_reach(const MdpSlice& slice, int target) {
    const int S = slice.num_states();
    std::vector<char> reach(S, 0);
    reach[target] = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < S; ++s) {
            if (reach[s]) continue;
            for (int a = 0; a < slice.layout.actions_per_state[s] && !reach[s]; ++a) {
                auto row = slice.row(s, a);
                for (int sp = 0; sp < S; ++sp) {
                    if (row[sp] > 0.0 && reach[sp]) {
                        reach[s] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }
    return reach;
}

} // namespace

double diameter(const MdpSlice& slice, double tolerance, long max_iterations) {
    const int S = slice.num_states();
    const double inf = std::numeric_limits<double>::infinity();
    if (S == 1) return 0.0;
    constexpr double kDivergenceBound = 1e12;
    double worst = 0.0;
    std::vector<double> h(S), h_next(S);
    for (int target = 0; target < S; ++target) {
        std::vector<char> reach = can_reach(slice, target);
        for (int s = 0; s < S; ++s) {
            if (!reach[s]) return inf;
        }
        // h(s) <- 1 + min_a sum_s' p(s'|s,a) h(s'), fixed h(target) = 0
        std::fill(h.begin(), h.end(), 0.0);
        bool converged = false;
        for (long iter = 0; iter < max_iterations; ++iter) {
            double change = 0.0;
            for (int s = 0; s < S; ++s) {
                if (s == target) {
                    h_next[s] = 0.0;
                    continue;
                }
                double best = inf;
                for (int a = 0; a < slice.layout.actions_per_state[s]; ++a) {
                    auto row = slice.row(s, a);
                    double v = 1.0;
                    for (int sp = 0; sp < S; ++sp) v += row[sp] * h[sp];
                    best = std::min(best, v);
                }
                h_next[s] = best;
                change = std::max(change, std::abs(best - h[s]));
            }
            h.swap(h_next);
            if (change <= tolerance) {
                converged = true;
                break;
            }
            if (*std::max_element(h.begin(), h.end()) > kDivergenceBound) break;
        }
        if (!converged) return inf;
        for (int s = 0; s < S; ++s)
            if (s != target) worst = std::max(worst, h[s]);
    }
    return worst;
}

VariationBudgets variation_budgets(const TimeVaryingMdp& mdp) {
    const int T = mdp.horizon();
    if (T < 2) throw std::invalid_argument("variation_budgets: horizon must be at least 2");
    const int S = mdp.num_states();
    VariationBudgets out;
    out.per_step_reward.resize(T - 1);
    out.per_step_transition.resize(T - 1);
    std::vector<double> row_a(S), row_b(S);
    MdpSlice prev = mdp.slice_at(1);
    for (int t = 1; t < T; ++t) {
        MdpSlice next = mdp.slice_at(t + 1);
        double br = 0.0, bp = 0.0;
        for (int pair = 0; pair < mdp.layout().total_pairs(); ++pair) {
            br = std::max(br, std::abs(next.rewards[pair] - prev.rewards[pair]));
            double l1 = 0.0;
            for (int sp = 0; sp < S; ++sp)
                l1 += std::abs(next.transitions[pair * S + sp] - prev.transitions[pair * S + sp]);
            bp = std::max(bp, l1);
        }
        out.per_step_reward[t - 1] = br;
        out.per_step_transition[t - 1] = bp;
        out.reward_budget += br;
        out.transition_budget += bp;
        prev = std::move(next);
    }
    return out;
}

} // namespace nsmdp
