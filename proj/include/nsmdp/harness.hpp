#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsmdp/agents.hpp"
#include "nsmdp/serialization.hpp"
#include "nsmdp/trace.hpp"

namespace nsmdp {

// rho*_t for t = 1..T, each by the exact gain oracle on the slice at t
std::vector<double> oracle_gains(const TimeVaryingMdp& mdp, double tolerance = 1e-6);
std::vector<double> oracle_diameters(const TimeVaryingMdp& mdp, double tolerance = 1e-9);

struct RegretCurve {
    std::vector<double> per_step;   // rho*_t - r_t(s_t, a_t)
    std::vector<double> cumulative;
};

// Dynamic regret against the per-step oracle, using mean rewards at the
// visited pairs (noise removed). Throws on length mismatch.
RegretCurve dynamic_regret(const Trace& trace, std::span<const double> gains);

struct AlgorithmSummary {
    std::string name;
    int completed_runs = 0;
    std::vector<double> mean_cum_reward; // [t]
    std::vector<double> se_cum_reward;
    std::vector<double> mean_cum_regret;
    std::vector<double> se_cum_regret;
    double final_mean_cum_reward() const { return mean_cum_reward.back(); }
    double final_mean_cum_regret() const { return mean_cum_regret.back(); }
};

struct ScenarioResult {
    std::string name;
    int horizon = 0;
    int runs = 0;
    double reward_budget = 0.0;
    double transition_budget = 0.0;
    int derived_window = 0;      // W* handed to swucrl2cw when not overridden
    double derived_widening = 0.0;
    std::vector<AlgorithmSummary> algorithms;
    std::vector<std::string> failures; // "<algo>/run<i>: message"
    std::string csv_path;
    std::string plot_path;
};

struct RunSummary {
    std::vector<ScenarioResult> scenarios;
};

// Executes all (algorithm x run) cells per scenario on a bounded worker pool
// with seeds base_seed + run_index, precomputing the oracle once per
// environment, and writes one CSV (12 significant digits) and one SVG plot
// per scenario. Partial failures are recorded, not fatal.
RunSummary run_experiment(const ExperimentConfig& config);

// Single run for the CLI `run` subcommand.
struct SingleRunResult {
    Trace trace;
    RegretCurve regret;
    std::vector<double> gains;
};

SingleRunResult run_single(const EnvSpec& env, const AlgorithmSpec& algorithm,
                           std::uint64_t seed, double delta, double oracle_tolerance,
                           std::vector<std::string>* region_dumps = nullptr);

void write_trace_csv(const SingleRunResult& result, const std::string& path);
void write_scenario_csv(const ScenarioResult& scenario, const std::string& path);
void write_scenario_svg(const ScenarioResult& scenario, const std::string& path);

std::string format_sig(double value); // 12 significant digits, CSV contract

} // namespace nsmdp
