#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nsmdp/environment.hpp"
#include "nsmdp/rng.hpp"
#include "nsmdp/sliding_stats.hpp"
#include "nsmdp/trace.hpp"

namespace nsmdp {

struct SwConfig {
    int window = 1;       // W
    double widening = 0.0; // eta
    double delta = 0.01;
    // EVI precision is fixed at 1/sqrt(tau(m)); the radius log term uses the
    // horizon the algorithm was invoked with
    int radius_horizon = 0; // 0 -> use the environment horizon
    // inspection hook, called with each episode's freshly built regions
    std::function<void(int episode, int tau, const ConfidenceRegionSet&)> on_regions;
};

struct TheoreticalParams {
    int window;
    double widening;
};

// W* = S^{2/3} A^{1/2} T^{1/2} (B_r+B_p)^{-1/2} rounded and clamped to [1,T],
// eta* = sqrt(B_p W*/T). With zero budgets falls back to the oblivious choice
// W = S^{2/3} A^{1/2} T^{1/2}, eta = sqrt(W/T).
TheoreticalParams theoretical_params(int S, double A, int T, double reward_budget,
                                     double transition_budget);

// Sliding-window optimistic learner with confidence widening; plays the whole
// horizon of env as a single run.
Trace run_swucrl2cw(Environment& env, const SwConfig& config, RandomStream& rng);

// Same learner appended to an existing trace for at most max_steps steps with
// a fresh window and a segment-local clock (used by the restart wrappers).
void run_sw_segment(Environment& env, const SwConfig& config, RandomStream& rng,
                    int max_steps, Trace& trace);

// W=T, eta=0 recovers the full-history optimistic learner.
Trace run_ucrl2(Environment& env, double delta, RandomStream& rng);

// Full-history learner restarted from scratch every floor(T^{2/3}) steps.
Trace run_ucrl2s(Environment& env, double delta, RandomStream& rng);

// Geometric grid of candidate (window, widening) pairs for the meta-learner.
struct BorlGrid {
    int block_length = 0;  // H
    double phi = 0.0;      // Phi
    int delta_w = 0;
    int delta_eta = 0;
    int cells = 0;         // Delta = (delta_w+1)(delta_eta+1)
    std::vector<int> windows;       // floor(H^{j/delta_w}), j = 0..delta_w
    std::vector<double> widenings;  // S^{1/3} A^{1/4} Phi^{k/delta_eta}, k = 0..delta_eta

    static BorlGrid make(int S, double A, int T);
    int cell(int j, int k) const { return j * (delta_eta + 1) + k; }
};

// Adversarial meta-bandit over the grid cells. gamma is clamped to 1 so the
// selection rule always yields a distribution (the raw formula exceeds 1 when
// there are fewer blocks than roughly Delta*ln(Delta)).
struct Exp3pState {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<double> q;
    int round = 1;

    static Exp3pState init(int cells, int rounds);
    std::vector<double> probabilities() const;
};

std::pair<int, std::vector<double>> exp3p_select(const Exp3pState& state, RandomStream& rng);
void exp3p_update(Exp3pState& state, int chosen, double block_reward, int block_length);

struct BorlBlockRecord {
    int block;
    int cell;
    int window;
    double eta;
    double block_reward; // unclamped realized total
};

// Meta-learner: per block of H steps, picks (W, eta) from the grid via the
// EXP3.P master and restarts the sliding-window learner from the block's
// starting state; feeds the block's total reward back, rescaled by H.
Trace run_borl(Environment& env, double delta, RandomStream& rng,
               std::vector<BorlBlockRecord>* blocks_out = nullptr);

} // namespace nsmdp
