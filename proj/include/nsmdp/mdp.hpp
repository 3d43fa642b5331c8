#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nsmdp/rng.hpp"

namespace nsmdp {

// Flat indexing over possibly ragged per-state action sets.
struct ActionLayout {
    int num_states = 0;
    std::vector<int> actions_per_state;
    std::vector<int> offsets; // size num_states+1

    ActionLayout() = default;
    ActionLayout(int S, std::vector<int> actions);
    static ActionLayout uniform(int S, int A) { return ActionLayout(S, std::vector<int>(S, A)); }

    int total_pairs() const { return offsets.empty() ? 0 : offsets.back(); }
    int pair(int s, int a) const { return offsets[s] + a; }
    double average_actions() const { return static_cast<double>(total_pairs()) / num_states; }
    int max_actions() const;
};

enum class RewardNoise { deterministic, bernoulli, truncated_gaussian };

struct StepOutcome {
    double reward;
    int next_state;
};

// One time slice: rewards and transition rows materialized for a fixed t.
struct MdpSlice {
    ActionLayout layout;
    std::vector<double> rewards;     // [pair]
    std::vector<double> transitions; // [pair * S + s']

    int num_states() const { return layout.num_states; }
    double reward(int s, int a) const { return rewards[layout.pair(s, a)]; }
    std::span<const double> row(int s, int a) const {
        return {transitions.data() + static_cast<std::size_t>(layout.pair(s, a)) * layout.num_states,
                static_cast<std::size_t>(layout.num_states)};
    }
};

// Non-stationary tabular MDP over t = 1..T. Mean rewards and transition rows
// come from generator functions; dense tables are wrapped in generators so
// closed-form instances never materialize O(T*S*A*S) storage.
class TimeVaryingMdp {
public:
    using RewardFn = std::function<double(int t, int s, int a)>;
    using TransitionFn = std::function<void(int t, int s, int a, std::span<double> row)>;

    TimeVaryingMdp(ActionLayout layout, int horizon, RewardFn rewards, TransitionFn transitions);

    static TimeVaryingMdp dense(ActionLayout layout, int horizon,
                                std::vector<double> rewards,      // [t-1][pair] flattened
                                std::vector<double> transitions); // [t-1][pair*S+s'] flattened

    static TimeVaryingMdp stationary(ActionLayout layout, int horizon,
                                     std::vector<double> rewards,      // [pair]
                                     std::vector<double> transitions); // [pair*S+s']

    const ActionLayout& layout() const { return layout_; }
    int num_states() const { return layout_.num_states; }
    const std::vector<int>& actions_per_state() const { return layout_.actions_per_state; }
    int horizon() const { return horizon_; }

    double mean_reward(int t, int s, int a) const;
    void transition_row(int t, int s, int a, std::span<double> out) const;
    std::vector<double> transition_row(int t, int s, int a) const;
    MdpSlice slice_at(int t) const;

    // default noise model: 1-sub-Gaussian (gaussian deviation clamped to one unit)
    RewardNoise noise = RewardNoise::truncated_gaussian;
    double noise_sigma = 1.0;
    bool nonconforming = false;

private:
    void check_indices(int t, int s, int a) const;

    ActionLayout layout_;
    int horizon_;
    RewardFn reward_fn_;
    TransitionFn transition_fn_;
};

struct ValidationReport {
    std::vector<std::string> fatal;
    std::vector<std::string> nonconforming;
    bool ok() const { return fatal.empty(); }
};

// Flags rewards outside [0,1] as nonconforming (non-fatal); bad transition rows
// are fatal. Structural problems throw at construction time instead.
ValidationReport validate_instance(const TimeVaryingMdp& mdp);

// One environment step: samples the next state from p_t(.|s,a) and a reward
// with mean r_t(s,a) under the instance's noise model.
StepOutcome step(const TimeVaryingMdp& mdp, int t, int s, int a, RandomStream& rng);

} // namespace nsmdp
