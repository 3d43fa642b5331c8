#pragma once

#include "nsmdp/mdp.hpp"
#include "nsmdp/rng.hpp"

namespace nsmdp {

// One simulation run against a non-stationary environment. Time is global and
// 1-based; step() plays one action at the current (t, state) and advances.
class Environment {
public:
    virtual ~Environment() = default;
    virtual const ActionLayout& layout() const = 0;
    virtual int horizon() const = 0;
    virtual int time() const = 0;  // next step to be played
    virtual int state() const = 0;
    virtual StepOutcome step(int action, RandomStream& rng) = 0;
    virtual double mean_reward(int t, int s, int a) const = 0;
    // true when the instance's rewards live outside [0,1]
    virtual bool nonconforming() const { return false; }
    bool done() const { return time() > horizon(); }
    int num_states() const { return layout().num_states; }
};

class MdpEnvironment : public Environment {
public:
    explicit MdpEnvironment(const TimeVaryingMdp& mdp, int start_state = 0)
        : mdp_(&mdp), state_(start_state) {}

    const ActionLayout& layout() const override { return mdp_->layout(); }
    int horizon() const override { return mdp_->horizon(); }
    int time() const override { return t_; }
    int state() const override { return state_; }
    bool nonconforming() const override { return mdp_->nonconforming; }
    double mean_reward(int t, int s, int a) const override { return mdp_->mean_reward(t, s, a); }

    StepOutcome step(int action, RandomStream& rng) override {
        StepOutcome out = nsmdp::step(*mdp_, t_, state_, action, rng);
        state_ = out.next_state;
        t_ += 1;
        return out;
    }

private:
    const TimeVaryingMdp* mdp_;
    int t_ = 1;
    int state_;
};

} // namespace nsmdp
