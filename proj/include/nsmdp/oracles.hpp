#pragma once

#include <vector>

#include "nsmdp/evi.hpp"
#include "nsmdp/mdp.hpp"

namespace nsmdp {

struct GainBias {
    double gain = 0.0;
    std::vector<double> bias; // componentwise >= 0, min component 0
};

// Optimal long-run average reward of one slice, by relative value iteration
// (EVI with point regions). Throws on non-convergence, which signals a
// non-communicating slice.
GainBias optimal_gain(const MdpSlice& slice, double tolerance = 1e-6,
                      long max_iterations = 1000000);

// max_{s != s'} min_policy E[hitting time s -> s'], by per-target
// stochastic-shortest-path value iteration. Returns +infinity when some pair
// cannot be connected (non-communicating table).
double diameter(const MdpSlice& slice, double tolerance = 1e-9,
                long max_iterations = 1000000);

struct VariationBudgets {
    double reward_budget = 0.0;     // B_r
    double transition_budget = 0.0; // B_p
    std::vector<double> per_step_reward;     // B_{r,t}, t = 1..T-1
    std::vector<double> per_step_transition; // B_{p,t}
};

// Total temporal variation: B_r sums the per-step sup-norm reward change,
// B_p the per-step worst-row L1 change. Requires horizon >= 2.
VariationBudgets variation_budgets(const TimeVaryingMdp& mdp);

} // namespace nsmdp
