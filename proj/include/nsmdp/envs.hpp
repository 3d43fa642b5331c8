#pragma once

#include <functional>
#include <vector>

#include "nsmdp/environment.hpp"
#include "nsmdp/mdp.hpp"
#include "nsmdp/sliding_stats.hpp"

namespace nsmdp {

// ---------------------------------------------------------------------------
// Drifting 2-state / 2-action synthetic instance: cosine mean rewards with
// amplitude 3 (state 1) and 1 (state 2), sign-flipped across states, and
// switch probabilities beta_t = 0.5 + 0.3 sin(5 V_p pi t / T). Rewards leave
// [0,1], so the instance is flagged nonconforming; rescale_rewards maps them
// affinely onto [0,1] (off by default).
struct DriftingConfig {
    int horizon = 5000;
    double reward_variation = 1.0;     // V_r
    double transition_variation = 1.0; // V_p
    bool rescale_rewards = false;
};

TimeVaryingMdp drifting_env(const DriftingConfig& config);

// ---------------------------------------------------------------------------
// Adversarial construction: deterministic 2-state tables p1/p2 alternating in
// four blocks of tau steps, plus the scripted policy schedule that pins the
// trajectory to the self-loops.
struct PerilConfig {
    int tau = 10;
};

struct PerilInstance {
    int tau;
    int window; // W = 4*tau
    MdpSlice p1;
    MdpSlice p2;
    TimeVaryingMdp sequence; // horizon 4*tau, zero rewards
    // schedule: pi1 until 2*tau, pi2 afterwards
    int scripted_action(int t, int s) const;
};

PerilInstance peril_instance(const PerilConfig& config);

struct PerilReport {
    PerilInstance instance;
    std::vector<int> states;   // s_1..s_{W+1}
    std::vector<int> actions;  // a_1..a_W
    Counts counts;             // window [1, W] seen at t = W+1
    MdpSlice empirical;        // p-hat rows
    double diameter_p1 = 0.0;
    double diameter_p2 = 0.0;
    double diameter_empirical = 0.0;
    // greedy min-diameter witness inside the (widened) confidence ball
    double witness_diameter_eta0 = 0.0;
    double witness_diameter_eta = 0.0;
    double eta = 0.0;
};

PerilReport run_peril(const PerilConfig& config, double delta = 0.05, double eta = 0.2);

// ---------------------------------------------------------------------------
// Single-item inventory control with zero lead time, fixed ordering cost and
// lost sales under censored demand. States are stock levels {0..capacity},
// actions at s are order quantities {0..capacity-s}.
struct InventoryConfig {
    int capacity = 5;
    double fixed_cost = 2.0;        // f
    double unit_cost = 1.0;         // c
    double lost_sales_penalty = 4.0; // l
    double holding_cost = 1.0;      // h
    double pmf_floor = 0.05;        // zeta
    int horizon = 200;
    std::function<std::vector<double>(int t)> demand_pmf; // over {0..capacity}

    // drifting mixture of a low-demand and a high-demand profile, sinusoidal
    // mixing weight, floored at zeta
    static InventoryConfig default_drifting(int capacity, int horizon, double zeta);
};

// throws when a PMF misses the zeta floor or does not sum to 1
void validate_inventory(const InventoryConfig& config);

struct CensoredStep {
    double pseudo_reward; // raw scale
    int next_stock;
    int censored_demand; // Y = min(X, s+a)
};

CensoredStep censored_step(const InventoryConfig& config, int t, int stock, int order,
                           RandomStream& rng);

class InventoryModel {
public:
    explicit InventoryModel(InventoryConfig config);

    const InventoryConfig& config() const { return config_; }
    const ActionLayout& layout() const { return layout_; }

    double mean_pseudo_reward(int t, int s, int a) const; // raw scale
    double mean_raw_reward(int t, int s, int a) const;    // E[-C_t(s,a)]
    double expected_demand(int t) const;
    void transition_row(int t, int s, int a, std::span<double> out) const;

    // invertible affine normalization onto [0,1] from the analytic range of
    // the realized pseudo-reward
    double reward_floor() const { return reward_min_; }
    double reward_ceiling() const { return reward_max_; }
    double normalize(double raw) const { return (raw - reward_min_) / (reward_max_ - reward_min_); }
    double denormalize(double norm) const { return reward_min_ + norm * (reward_max_ - reward_min_); }

    TimeVaryingMdp pseudo_mdp(bool normalized = true) const;
    TimeVaryingMdp raw_mdp() const;

private:
    InventoryConfig config_;
    ActionLayout layout_;
    double reward_min_;
    double reward_max_;
};

// Agent-facing environment: realized rewards are normalized pseudo-rewards,
// built from censored observations only.
class InventoryEnvironment : public Environment {
public:
    explicit InventoryEnvironment(const InventoryModel& model, int start_stock = 0)
        : model_(&model), state_(start_stock) {}

    const ActionLayout& layout() const override { return model_->layout(); }
    int horizon() const override { return model_->config().horizon; }
    int time() const override { return t_; }
    int state() const override { return state_; }
    double mean_reward(int t, int s, int a) const override {
        return model_->normalize(model_->mean_pseudo_reward(t, s, a));
    }
    StepOutcome step(int action, RandomStream& rng) override;

private:
    const InventoryModel* model_;
    int t_ = 1;
    int state_;
};

} // namespace nsmdp
