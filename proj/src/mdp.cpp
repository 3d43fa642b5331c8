#include "nsmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nsmdp {

ActionLayout::ActionLayout(int S, std::vector<int> actions)
    : num_states(S), actions_per_state(std::move(actions)) {
    if (S <= 0) throw std::invalid_argument("ActionLayout: num_states must be positive");
    if (static_cast<int>(actions_per_state.size()) != S)
        throw std::invalid_argument("ActionLayout: actions_per_state size mismatch");
    offsets.resize(S + 1, 0);
    for (int s = 0; s < S; ++s) {
        if (actions_per_state[s] <= 0)
            throw std::invalid_argument("ActionLayout: every state needs at least one action");
        offsets[s + 1] = offsets[s] + actions_per_state[s];
    }
}

int ActionLayout::max_actions() const {
    int m = 0;
    for (int a : actions_per_state) m = std::max(m, a);
    return m;
}

TimeVaryingMdp::TimeVaryingMdp(ActionLayout layout, int horizon, RewardFn rewards, TransitionFn transitions)
    : layout_(std::move(layout)), horizon_(horizon),
      reward_fn_(std::move(rewards)), transition_fn_(std::move(transitions)) {
    if (horizon_ <= 0) throw std::invalid_argument("TimeVaryingMdp: horizon must be positive");
    if (!reward_fn_ || !transition_fn_) throw std::invalid_argument("TimeVaryingMdp: missing generators");
}

TimeVaryingMdp TimeVaryingMdp::dense(ActionLayout layout, int horizon,
                                     std::vector<double> rewards,
                                     std::vector<double> transitions) {
    const std::size_t pairs = layout.total_pairs();
    const std::size_t S = layout.num_states;
    if (rewards.size() != pairs * horizon)
        throw std::invalid_argument("TimeVaryingMdp::dense: reward table size mismatch");
    if (transitions.size() != pairs * S * horizon)
        throw std::invalid_argument("TimeVaryingMdp::dense: transition table size mismatch");
    auto r = std::make_shared<std::vector<double>>(std::move(rewards));
    auto p = std::make_shared<std::vector<double>>(std::move(transitions));
    ActionLayout l = layout;
    return TimeVaryingMdp(
        std::move(layout), horizon,
        [r, l, pairs](int t, int s, int a) { return (*r)[(t - 1) * pairs + l.pair(s, a)]; },
        [p, l, pairs, S](int t, int s, int a, std::span<double> row) {
            const double* src = p->data() + ((t - 1) * pairs + l.pair(s, a)) * S;
            std::copy(src, src + S, row.begin());
        });
}

TimeVaryingMdp TimeVaryingMdp::stationary(ActionLayout layout, int horizon,
                                          std::vector<double> rewards,
                                          std::vector<double> transitions) {
    const std::size_t pairs = layout.total_pairs();
    const std::size_t S = layout.num_states;
    if (rewards.size() != pairs)
        throw std::invalid_argument("TimeVaryingMdp::stationary: reward table size mismatch");
    if (transitions.size() != pairs * S)
        throw std::invalid_argument("TimeVaryingMdp::stationary: transition table size mismatch");
    auto r = std::make_shared<std::vector<double>>(std::move(rewards));
    auto p = std::make_shared<std::vector<double>>(std::move(transitions));
    ActionLayout l = layout;
    return TimeVaryingMdp(
        std::move(layout), horizon,
        [r, l](int, int s, int a) { return (*r)[l.pair(s, a)]; },
        [p, l, S](int, int s, int a, std::span<double> row) {
            const double* src = p->data() + l.pair(s, a) * S;
            std::copy(src, src + S, row.begin());
        });
}

void TimeVaryingMdp::check_indices(int t, int s, int a) const {
    if (t < 1 || t > horizon_) throw std::out_of_range("TimeVaryingMdp: time index out of range");
    if (s < 0 || s >= layout_.num_states) throw std::out_of_range("TimeVaryingMdp: state index out of range");
    if (a < 0 || a >= layout_.actions_per_state[s]) throw std::out_of_range("TimeVaryingMdp: action index out of range");
}

double TimeVaryingMdp::mean_reward(int t, int s, int a) const {
    check_indices(t, s, a);
    return reward_fn_(t, s, a);
}

void TimeVaryingMdp::transition_row(int t, int s, int a, std::span<double> out) const {
    check_indices(t, s, a);
    if (static_cast<int>(out.size()) != layout_.num_states)
        throw std::invalid_argument("transition_row: output span size mismatch");
    transition_fn_(t, s, a, out);
}

std::vector<double> TimeVaryingMdp::transition_row(int t, int s, int a) const {
    std::vector<double> row(layout_.num_states);
    transition_row(t, s, a, row);
    return row;
}

MdpSlice TimeVaryingMdp::slice_at(int t) const {
    MdpSlice slice;
    slice.layout = layout_;
    const int S = layout_.num_states;
    slice.rewards.resize(layout_.total_pairs());
    slice.transitions.resize(static_cast<std::size_t>(layout_.total_pairs()) * S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < layout_.actions_per_state[s]; ++a) {
            int pair = layout_.pair(s, a);
            slice.rewards[pair] = mean_reward(t, s, a);
            transition_row(t, s, a, {slice.transitions.data() + static_cast<std::size_t>(pair) * S,
                                     static_cast<std::size_t>(S)});
        }
    }
    return slice;
}

ValidationReport validate_instance(const TimeVaryingMdp& mdp) {
    ValidationReport report;
    constexpr double kRowSumTol = 1e-12;
    constexpr std::size_t kMaxMessages = 8;
    std::size_t reward_violations = 0;
    const int S = mdp.num_states();
    std::vector<double> row(S);
    char buf[160];
    for (int t = 1; t <= mdp.horizon(); ++t) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < mdp.actions_per_state()[s]; ++a) {
                double r = mdp.mean_reward(t, s, a);
                if (!(r >= 0.0 && r <= 1.0)) {
                    if (++reward_violations <= kMaxMessages) {
                        std::snprintf(buf, sizeof(buf),
                                      "reward out of [0,1]: r(t=%d,s=%d,a=%d)=%g", t, s, a, r);
                        report.nonconforming.emplace_back(buf);
                    }
                }
                mdp.transition_row(t, s, a, row);
                double sum = 0.0;
                for (int sp = 0; sp < S; ++sp) {
                    if (row[sp] < 0.0) {
                        if (report.fatal.size() < kMaxMessages) {
                            std::snprintf(buf, sizeof(buf),
                                          "negative transition probability: p(t=%d,s=%d,a=%d,s'=%d)=%g",
                                          t, s, a, sp, row[sp]);
                            report.fatal.emplace_back(buf);
                        }
                    }
                    sum += row[sp];
                }
                if (std::abs(sum - 1.0) > kRowSumTol) {
                    if (report.fatal.size() < kMaxMessages) {
                        std::snprintf(buf, sizeof(buf),
                                      "row sum violation: sum p(t=%d,s=%d,a=%d,.)=%.15g", t, s, a, sum);
                        report.fatal.emplace_back(buf);
                    }
                }
            }
        }
    }
    if (reward_violations > kMaxMessages) {
        std::snprintf(buf, sizeof(buf), "(%zu reward range violations in total)", reward_violations);
        report.nonconforming.emplace_back(buf);
    }
    if (!report.nonconforming.empty() && !mdp.nonconforming)
        report.nonconforming.emplace_back("instance is not flagged nonconforming");
    return report;
}

StepOutcome step(const TimeVaryingMdp& mdp, int t, int s, int a, RandomStream& rng) {
    std::vector<double> row = mdp.transition_row(t, s, a); // bounds-checked
    int next = rng.categorical(row);
    double mean = mdp.mean_reward(t, s, a);
    double reward = mean;
    switch (mdp.noise) {
        case RewardNoise::deterministic:
            break;
        case RewardNoise::bernoulli:
            if (mean < 0.0 || mean > 1.0)
                throw std::invalid_argument("step: bernoulli noise needs mean reward in [0,1]");
            reward = rng.bernoulli(mean) ? 1.0 : 0.0;
            break;
        case RewardNoise::truncated_gaussian: {
            // symmetric clamp keeps the mean exact and the deviation in [-1,1]
            double z = std::clamp(mdp.noise_sigma * rng.gaussian(), -1.0, 1.0);
            reward = mean + z;
            break;
        }
    }
    return {reward, next};
}

} // namespace nsmdp
