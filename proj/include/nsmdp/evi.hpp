#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "nsmdp/mdp.hpp"

namespace nsmdp {

// Model uncertainty set fed to extended value iteration: one reward interval
// and one L1 ball around a transition center per state-action pair. A pair
// with no observations (empty_center) ranges over the whole simplex.
struct Regions {
    ActionLayout layout;
    std::vector<double> reward_lo;   // [pair]
    std::vector<double> reward_hi;   // [pair]
    std::vector<double> p_center;    // [pair * S + s']
    std::vector<double> p_budget;    // [pair], radius + widening
    std::vector<char> empty_center;  // [pair], 1 when N=0 (center is the zero vector)

    static Regions sized(const ActionLayout& layout);
    std::span<const double> center_row(int pair) const {
        return {p_center.data() + static_cast<std::size_t>(pair) * layout.num_states,
                static_cast<std::size_t>(layout.num_states)};
    }
};

// Point regions (zero radii) around one model slice; EVI on these is plain
// relative value iteration.
Regions point_regions(const MdpSlice& slice);

// Exact maximizer of sum_s' values[s']*p(s') over {p in simplex :
// ||p - center||_1 <= budget}: shift min(budget/2, 1-center[s*]) onto the
// argmax state, remove the same mass from states in ascending-value order.
// budget >= 2 or an all-zero center means the whole simplex is available and
// the answer is the point mass on the argmax state.
std::vector<double> inner_max_distribution(std::span<const double> values,
                                           std::span<const double> center,
                                           double budget);

struct EviResult {
    std::vector<int> policy;              // [s]
    std::vector<double> opt_rewards;      // [pair]
    std::vector<double> opt_transitions;  // [pair * S + s']
    double gain = 0.0;
    std::vector<double> bias;             // [s], min component 0
    long iterations = 0;
};

class EviNonConvergent : public std::runtime_error {
public:
    EviNonConvergent(double span, long iterations);
    double last_span;
    long iterations;
};

// Extended value iteration: u_{i+1}(s) = max_a [ max interval reward +
// inner max of the transition ball against u_i ], from u_0 = 0, until
// span(u_{i+1}-u_i) <= epsilon. Throws EviNonConvergent past max_iterations.
EviResult extended_value_iteration(const Regions& regions, double epsilon,
                                   long max_iterations = 100000);

} // namespace nsmdp
