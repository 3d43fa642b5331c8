#include "nsmdp/serialization.hpp"

#include <fstream>
#include <stdexcept>

namespace nsmdp {

using nlohmann::json;

namespace {

json noise_to_json(const TimeVaryingMdp& mdp) {
    switch (mdp.noise) {
        case RewardNoise::deterministic: return {{"type", "deterministic"}};
        case RewardNoise::bernoulli: return {{"type", "bernoulli"}};
        case RewardNoise::truncated_gaussian:
            return {{"type", "truncated_gaussian"}, {"sigma", mdp.noise_sigma}};
    }
    return {};
}

void noise_from_json(const json& doc, TimeVaryingMdp& mdp) {
    if (!doc.contains("reward_noise")) return;
    const json& n = doc.at("reward_noise");
    std::string type = n.at("type").get<std::string>();
    if (type == "deterministic") {
        mdp.noise = RewardNoise::deterministic;
    } else if (type == "bernoulli") {
        mdp.noise = RewardNoise::bernoulli;
    } else if (type == "truncated_gaussian") {
        mdp.noise = RewardNoise::truncated_gaussian;
        mdp.noise_sigma = n.value("sigma", 1.0);
    } else {
        throw std::invalid_argument("unknown reward_noise type: " + type);
    }
}

} // namespace

json instance_to_json(const TimeVaryingMdp& mdp) {
    const int T = mdp.horizon();
    const int S = mdp.num_states();
    json doc;
    doc["num_states"] = S;
    doc["actions_per_state"] = mdp.actions_per_state();
    doc["horizon"] = T;
    doc["reward_noise"] = noise_to_json(mdp);
    doc["nonconforming"] = mdp.nonconforming;
    json rewards = json::array();
    json transitions = json::array();
    std::vector<double> row(S);
    for (int t = 1; t <= T; ++t) {
        json rt = json::array();
        json pt = json::array();
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < mdp.actions_per_state()[s]; ++a) {
                rt.push_back(mdp.mean_reward(t, s, a));
                mdp.transition_row(t, s, a, row);
                pt.push_back(row);
            }
        }
        rewards.push_back(std::move(rt));
        transitions.push_back(std::move(pt));
    }
    doc["reward_spec"] = {{"type", "table"}, {"values", std::move(rewards)}};
    doc["transition_spec"] = {{"type", "table"}, {"values", std::move(transitions)}};
    return doc;
}

TimeVaryingMdp instance_from_json(const json& doc) {
    if (doc.contains("generator")) {
        const json& g = doc.at("generator");
        std::string name = g.at("name").get<std::string>();
        if (name == "drifting") {
            DriftingConfig config;
            config.horizon = g.at("horizon").get<int>();
            config.reward_variation = g.at("reward_variation").get<double>();
            config.transition_variation = g.at("transition_variation").get<double>();
            config.rescale_rewards = g.value("rescale_rewards", false);
            return drifting_env(config);
        }
        if (name == "peril") {
            PerilConfig config;
            config.tau = g.at("tau").get<int>();
            return peril_instance(config).sequence;
        }
        throw std::invalid_argument("unknown instance generator: " + name);
    }

    const int S = doc.at("num_states").get<int>();
    std::vector<int> actions = doc.at("actions_per_state").get<std::vector<int>>();
    const int T = doc.at("horizon").get<int>();
    ActionLayout layout(S, actions);
    const int pairs = layout.total_pairs();

    const json& rspec = doc.at("reward_spec");
    const json& pspec = doc.at("transition_spec");
    std::string rtype = rspec.at("type").get<std::string>();
    std::string ptype = pspec.at("type").get<std::string>();

    auto read_reward_slice = [&](const json& slice, std::vector<double>& out) {
        if (static_cast<int>(slice.size()) != pairs)
            throw std::invalid_argument("reward_spec: wrong number of state-action entries");
        for (int pair = 0; pair < pairs; ++pair) out.push_back(slice[pair].get<double>());
    };
    auto read_transition_slice = [&](const json& slice, std::vector<double>& out) {
        if (static_cast<int>(slice.size()) != pairs)
            throw std::invalid_argument("transition_spec: wrong number of state-action entries");
        for (int pair = 0; pair < pairs; ++pair) {
            const json& row = slice[pair];
            if (static_cast<int>(row.size()) != S)
                throw std::invalid_argument("transition_spec: wrong row length");
            for (int sp = 0; sp < S; ++sp) out.push_back(row[sp].get<double>());
        }
    };

    TimeVaryingMdp mdp = [&]() {
        if (rtype == "stationary" && ptype == "stationary") {
            std::vector<double> rewards, transitions;
            read_reward_slice(rspec.at("values"), rewards);
            read_transition_slice(pspec.at("values"), transitions);
            return TimeVaryingMdp::stationary(layout, T, std::move(rewards), std::move(transitions));
        }
        if (rtype == "table" && ptype == "table") {
            const json& rv = rspec.at("values");
            const json& pv = pspec.at("values");
            if (static_cast<int>(rv.size()) != T || static_cast<int>(pv.size()) != T)
                throw std::invalid_argument("table specs must have one slice per time step");
            std::vector<double> rewards, transitions;
            rewards.reserve(static_cast<std::size_t>(T) * pairs);
            transitions.reserve(static_cast<std::size_t>(T) * pairs * S);
            for (int t = 0; t < T; ++t) {
                read_reward_slice(rv[t], rewards);
                read_transition_slice(pv[t], transitions);
            }
            return TimeVaryingMdp::dense(layout, T, std::move(rewards), std::move(transitions));
        }
        throw std::invalid_argument("reward_spec/transition_spec types must both be table or both stationary");
    }();
    noise_from_json(doc, mdp);
    mdp.nonconforming = doc.value("nonconforming", false);
    return mdp;
}

TimeVaryingMdp load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    json doc = json::parse(in);
    return instance_from_json(doc);
}

void save_instance(const TimeVaryingMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << instance_to_json(mdp).dump(1) << '\n';
}

EnvSpec env_spec_from_json(const json& doc) {
    EnvSpec spec;
    spec.type = doc.at("type").get<std::string>();
    spec.start_state = doc.value("start_state", 0);
    if (spec.type == "drifting") {
        spec.drifting.horizon = doc.value("horizon", 5000);
        spec.drifting.reward_variation = doc.value("reward_variation", 1.0);
        spec.drifting.transition_variation = doc.value("transition_variation", 1.0);
        spec.drifting.rescale_rewards = doc.value("rescale_rewards", false);
    } else if (spec.type == "peril") {
        spec.peril.tau = doc.value("tau", 10);
    } else if (spec.type == "inventory") {
        int capacity = doc.value("capacity", 5);
        int horizon = doc.value("horizon", 200);
        double zeta = doc.value("zeta", 0.05);
        spec.inventory = InventoryConfig::default_drifting(capacity, horizon, zeta);
        spec.inventory.fixed_cost = doc.value("fixed_cost", spec.inventory.fixed_cost);
        spec.inventory.unit_cost = doc.value("unit_cost", spec.inventory.unit_cost);
        spec.inventory.lost_sales_penalty =
            doc.value("lost_sales_penalty", spec.inventory.lost_sales_penalty);
        spec.inventory.holding_cost = doc.value("holding_cost", spec.inventory.holding_cost);
    } else if (spec.type == "file") {
        spec.path = doc.at("path").get<std::string>();
    } else {
        throw std::invalid_argument("unknown env type: " + spec.type);
    }
    return spec;
}

ExperimentConfig experiment_config_from_json(const json& doc) {
    ExperimentConfig config;
    config.env = env_spec_from_json(doc.at("env"));
    for (const json& a : doc.at("algorithms")) {
        AlgorithmSpec spec;
        if (a.is_string()) {
            spec.name = a.get<std::string>();
        } else {
            spec.name = a.at("name").get<std::string>();
            spec.window = a.value("window", 0);
            spec.widening = a.value("eta", -1.0);
        }
        if (spec.name != "swucrl2cw" && spec.name != "borl" && spec.name != "ucrl2" &&
            spec.name != "ucrl2s")
            throw std::invalid_argument("unknown algorithm: " + spec.name);
        config.algorithms.push_back(std::move(spec));
    }
    config.runs = doc.value("runs", 50);
    if (config.runs < 1) throw std::invalid_argument("runs must be >= 1");
    config.seed = doc.value("seed", 1ULL);
    config.delta = doc.value("delta", 0.0);
    config.oracle_tolerance = doc.value("oracle_tolerance", 1e-6);
    config.output = doc.value("output", std::string("out"));
    config.workers = doc.value("workers", 0);
    if (doc.contains("scenarios")) {
        for (const json& s : doc.at("scenarios")) {
            ScenarioSpec scenario;
            scenario.name = s.value("name", std::string());
            scenario.reward_variation = s.value("reward_variation", 0.0);
            scenario.transition_variation = s.value("transition_variation", 0.0);
            scenario.reward_variation_pow = s.value("reward_variation_pow", 0.0);
            scenario.transition_variation_pow = s.value("transition_variation_pow", 0.0);
            config.scenarios.push_back(std::move(scenario));
        }
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json doc = json::parse(in);
    return experiment_config_from_json(doc);
}

} // namespace nsmdp
