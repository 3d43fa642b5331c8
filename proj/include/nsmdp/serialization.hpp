#pragma once

#include <string>

#include <json.hpp>

#include "nsmdp/envs.hpp"
#include "nsmdp/mdp.hpp"

namespace nsmdp {

// Instance document schema (see README): num_states, actions_per_state,
// horizon, optional reward_noise / nonconforming, and reward_spec /
// transition_spec that are either explicit tables or named generators.
nlohmann::json instance_to_json(const TimeVaryingMdp& mdp);
TimeVaryingMdp instance_from_json(const nlohmann::json& doc);
TimeVaryingMdp load_instance(const std::string& path);
void save_instance(const TimeVaryingMdp& mdp, const std::string& path);

// Environment selector shared by the CLI and the experiment config.
struct EnvSpec {
    std::string type; // drifting | peril | inventory | file
    DriftingConfig drifting;
    PerilConfig peril;
    InventoryConfig inventory;
    std::string path; // for type == file
    int start_state = 0;
};

EnvSpec env_spec_from_json(const nlohmann::json& doc);

struct AlgorithmSpec {
    std::string name;   // swucrl2cw | borl | ucrl2 | ucrl2s
    int window = 0;     // 0 -> derive from budgets (swucrl2cw only)
    double widening = -1.0; // <0 -> derive
    bool has_overrides() const { return window > 0 && widening >= 0.0; }
};

struct ScenarioSpec {
    std::string name;
    double reward_variation = 0.0;     // direct V_r, or
    double transition_variation = 0.0;
    double reward_variation_pow = 0.0; // V_r = T^pow when > 0
    double transition_variation_pow = 0.0;
};

struct ExperimentConfig {
    EnvSpec env;
    std::vector<AlgorithmSpec> algorithms;
    int runs = 50;
    std::uint64_t seed = 1;
    double delta = 0.0; // 0 -> 1/T
    double oracle_tolerance = 1e-6;
    std::string output = "out";
    std::vector<ScenarioSpec> scenarios; // drifting only; empty -> single scenario
    int workers = 0;                     // 0 -> hardware concurrency
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);

} // namespace nsmdp
