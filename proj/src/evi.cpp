#include "nsmdp/evi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace nsmdp {

Regions Regions::sized(const ActionLayout& layout) {
    Regions r;
    r.layout = layout;
    const std::size_t pairs = layout.total_pairs();
    r.reward_lo.assign(pairs, 0.0);
    r.reward_hi.assign(pairs, 0.0);
    r.p_center.assign(pairs * layout.num_states, 0.0);
    r.p_budget.assign(pairs, 0.0);
    r.empty_center.assign(pairs, 0);
    return r;
}

Regions point_regions(const MdpSlice& slice) {
    Regions r = Regions::sized(slice.layout);
    r.reward_lo = slice.rewards;
    r.reward_hi = slice.rewards;
    r.p_center = slice.transitions;
    return r;
}

namespace {

// Core transfer step shared by the public function and the EVI sweep.
// asc/desc are state orderings by value (ties to the lowest index).
void inner_max_into(std::span<const double> values, std::span<const double> center,
                    double budget, bool empty_center,
                    std::span<const int> desc, std::span<const int> asc,
                    std::span<double> out) {
    const int S = static_cast<int>(values.size());
    const int top = desc[0];
    if (empty_center || budget >= 2.0) {
        std::fill(out.begin(), out.end(), 0.0);
        out[top] = 1.0;
        return;
    }
    std::copy(center.begin(), center.end(), out.begin());
    double shift = std::min(budget / 2.0, 1.0 - center[top]);
    if (shift <= 0.0) return;
    out[top] += shift;
    for (int k = 0; k < S && shift > 0.0; ++k) {
        int s = asc[k];
        if (s == top) continue;
        double take = std::min(shift, out[s]);
        out[s] -= take;
        shift -= take;
    }
}

void order_by_value(std::span<const double> values, std::vector<int>& desc, std::vector<int>& asc) {
    const int S = static_cast<int>(values.size());
    desc.resize(S);
    asc.resize(S);
    std::iota(desc.begin(), desc.end(), 0);
    std::iota(asc.begin(), asc.end(), 0);
    std::sort(desc.begin(), desc.end(), [&](int i, int j) {
        return values[i] != values[j] ? values[i] > values[j] : i < j;
    });
    std::sort(asc.begin(), asc.end(), [&](int i, int j) {
        return values[i] != values[j] ? values[i] < values[j] : i < j;
    });
}

} // namespace

std::vector<double> inner_max_distribution(std::span<const double> values,
                                           std::span<const double> center,
                                           double budget) {
    if (values.size() != center.size())
        throw std::invalid_argument("inner_max_distribution: size mismatch");
    if (budget < 0.0) throw std::invalid_argument("inner_max_distribution: negative budget");
    bool empty = std::all_of(center.begin(), center.end(), [](double x) { return x == 0.0; });
    std::vector<int> desc, asc;
    order_by_value(values, desc, asc);
    std::vector<double> out(values.size());
    inner_max_into(values, center, budget, empty, desc, asc, out);
    return out;
}

EviNonConvergent::EviNonConvergent(double span, long iters)
    : std::runtime_error([&] {
          char buf[128];
          std::snprintf(buf, sizeof(buf),
                        "EVI non-convergent after %ld iterations (span %.6g)", iters, span);
          return std::string(buf);
      }()),
      last_span(span), iterations(iters) {}

EviResult extended_value_iteration(const Regions& regions, double epsilon, long max_iterations) {
    if (epsilon <= 0.0) throw std::invalid_argument("extended_value_iteration: epsilon must be positive");
    const ActionLayout& layout = regions.layout;
    const int S = layout.num_states;

    std::vector<double> u(S, 0.0), u_next(S, 0.0), candidate(S);
    std::vector<int> desc, asc;
    EviResult result;
    result.policy.assign(S, 0);

    double span = std::numeric_limits<double>::infinity();
    long iter = 0;
    for (; iter < max_iterations; ++iter) {
        order_by_value(u, desc, asc);
        double diff_max = -std::numeric_limits<double>::infinity();
        double diff_min = std::numeric_limits<double>::infinity();
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < layout.actions_per_state[s]; ++a) {
                int pair = layout.pair(s, a);
                inner_max_into(u, regions.center_row(pair), regions.p_budget[pair],
                               regions.empty_center[pair] != 0, desc, asc, candidate);
                double value = regions.reward_hi[pair];
                for (int sp = 0; sp < S; ++sp) value += candidate[sp] * u[sp];
                if (value > best) { // ties keep the lowest action index
                    best = value;
                    best_a = a;
                }
            }
            u_next[s] = best;
            result.policy[s] = best_a;
            double d = best - u[s];
            diff_max = std::max(diff_max, d);
            diff_min = std::min(diff_min, d);
        }
        span = diff_max - diff_min;
        if (span <= epsilon) {
            result.gain = diff_max;
            break;
        }
        // relative-VI stabilization: shift u_next so its minimum is 0
        double shift = *std::min_element(u_next.begin(), u_next.end());
        for (int s = 0; s < S; ++s) u[s] = u_next[s] - shift;
    }
    if (span > epsilon) throw EviNonConvergent(span, iter);

    // outputs are all taken at the final record u_i
    result.iterations = iter + 1;
    double u_min = *std::min_element(u.begin(), u.end());
    result.bias.resize(S);
    for (int s = 0; s < S; ++s) result.bias[s] = u[s] - u_min;
    result.opt_rewards = regions.reward_hi;
    result.opt_transitions.resize(static_cast<std::size_t>(layout.total_pairs()) * S);
    order_by_value(u, desc, asc);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < layout.actions_per_state[s]; ++a) {
            int pair = layout.pair(s, a);
            inner_max_into(u, regions.center_row(pair), regions.p_budget[pair],
                           regions.empty_center[pair] != 0, desc, asc,
                           {result.opt_transitions.data() + static_cast<std::size_t>(pair) * S,
                            static_cast<std::size_t>(S)});
        }
    }
    return result;
}

} // namespace nsmdp
