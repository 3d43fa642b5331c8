#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsmdp/harness.hpp"
#include "nsmdp/oracles.hpp"

using nlohmann::json;

namespace {

int run_experiment_command(const std::string& config_path, std::uint64_t seed_override,
                           bool has_seed, const std::string& out_override) {
    nsmdp::ExperimentConfig config = nsmdp::load_experiment_config(config_path);
    if (has_seed) config.seed = seed_override;
    if (!out_override.empty()) config.output = out_override;
    nsmdp::RunSummary summary = nsmdp::run_experiment(config);
    for (const nsmdp::ScenarioResult& scenario : summary.scenarios) {
        std::printf("scenario %s (T=%d, runs=%d, B_r=%.4g, B_p=%.4g, W*=%d, eta*=%.4g)\n",
                    scenario.name.c_str(), scenario.horizon, scenario.runs,
                    scenario.reward_budget, scenario.transition_budget, scenario.derived_window,
                    scenario.derived_widening);
        for (const nsmdp::AlgorithmSummary& algo : scenario.algorithms) {
            std::printf("  %-10s final cum reward %14s   final cum regret %14s   (%d/%d runs)\n",
                        algo.name.c_str(), nsmdp::format_sig(algo.final_mean_cum_reward()).c_str(),
                        nsmdp::format_sig(algo.final_mean_cum_regret()).c_str(),
                        algo.completed_runs, scenario.runs);
        }
        for (const std::string& failure : scenario.failures)
            std::printf("  FAILED %s\n", failure.c_str());
        std::printf("  csv:  %s\n  plot: %s\n", scenario.csv_path.c_str(),
                    scenario.plot_path.c_str());
    }
    for (const nsmdp::ScenarioResult& scenario : summary.scenarios)
        if (!scenario.failures.empty()) return 2;
    return 0;
}

nsmdp::EnvSpec env_spec_from_flags(const std::string& env, int horizon, double vr, double vp,
                                   int tau, int capacity, double zeta, double fixed_cost,
                                   double unit_cost, double lost_sales, double holding,
                                   const std::string& file, int start_state) {
    json doc;
    doc["type"] = env;
    doc["start_state"] = start_state;
    if (env == "drifting") {
        doc["horizon"] = horizon;
        doc["reward_variation"] = vr;
        doc["transition_variation"] = vp;
    } else if (env == "peril") {
        doc["tau"] = tau;
    } else if (env == "inventory") {
        doc["horizon"] = horizon;
        doc["capacity"] = capacity;
        doc["zeta"] = zeta;
        doc["fixed_cost"] = fixed_cost;
        doc["unit_cost"] = unit_cost;
        doc["lost_sales_penalty"] = lost_sales;
        doc["holding_cost"] = holding;
    } else if (env == "file") {
        doc["path"] = file;
    }
    return nsmdp::env_spec_from_json(doc);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for learning in non-stationary tabular MDPs"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::uint64_t seed = 1;
    std::string out_path;
    std::string format = "csv";
    bool dump_regions = false;
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out_path, "output file or directory");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--dump-regions", dump_regions, "dump per-episode confidence regions");

    auto* experiment = app.add_subcommand("experiment", "run a multi-run experiment from a config file");
    std::string config_path;
    experiment->add_option("config", config_path, "experiment config (json)")->required();

    std::string env_name = "drifting";
    int horizon = 5000;
    double vr = 1.0, vp = 1.0;
    int tau = 25;
    int capacity = 5;
    double zeta = 0.05, fixed_cost = 2.0, unit_cost = 1.0, lost_sales = 4.0, holding = 1.0;
    std::string env_file;
    int start_state = 0;
    std::string algo_name = "swucrl2cw";
    int window = 0;
    double eta = -1.0;
    double delta = 0.0;
    double oracle_tol = 1e-6;

    auto add_env_flags = [&](CLI::App* cmd) {
        cmd->add_option("--env", env_name, "drifting | peril | inventory | file")
            ->check(CLI::IsMember({"drifting", "peril", "inventory", "file"}));
        cmd->add_option("--horizon", horizon, "time horizon T");
        cmd->add_option("--vr", vr, "drifting reward variation scale V_r");
        cmd->add_option("--vp", vp, "drifting transition variation scale V_p");
        cmd->add_option("--tau", tau, "peril block length");
        cmd->add_option("--capacity", capacity, "inventory shelf capacity");
        cmd->add_option("--zeta", zeta, "inventory demand PMF floor");
        cmd->add_option("--fixed-cost", fixed_cost, "inventory fixed ordering cost");
        cmd->add_option("--unit-cost", unit_cost, "inventory per-unit cost");
        cmd->add_option("--lost-sales", lost_sales, "inventory lost-sales penalty");
        cmd->add_option("--holding-cost", holding, "inventory holding cost");
        cmd->add_option("--file", env_file, "instance file for --env file");
        cmd->add_option("--start-state", start_state, "initial state");
    };

    auto* run = app.add_subcommand("run", "single algorithm run, emits a trace");
    add_env_flags(run);
    run->add_option("--algo", algo_name, "swucrl2cw | borl | ucrl2 | ucrl2s")
        ->check(CLI::IsMember({"swucrl2cw", "borl", "ucrl2", "ucrl2s"}));
    run->add_option("--window", window, "window W (default: W* from measured budgets)");
    run->add_option("--eta", eta, "confidence widening (default: eta* from measured budgets)");
    run->add_option("--delta", delta, "confidence level (default 1/T)");
    run->add_option("--oracle-tolerance", oracle_tol, "gain oracle tolerance");

    auto* oracle = app.add_subcommand("oracle", "emit the per-step optimal gain and diameter series");
    add_env_flags(oracle);
    oracle->add_option("--oracle-tolerance", oracle_tol, "gain oracle tolerance");

    auto* peril = app.add_subcommand("peril", "emit the adversarial-construction report");
    int peril_tau = 25;
    double peril_eta = 0.2;
    double peril_delta = 0.05;
    peril->add_option("--tau", peril_tau, "block length tau (W = 4 tau)");
    peril->add_option("--eta", peril_eta, "widening used for the witness diameter");
    peril->add_option("--delta", peril_delta, "confidence level for the radii");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e); // prints the usage text
        return code == 0 ? 0 : 1;
    }

    try {
        if (experiment->parsed()) {
            return run_experiment_command(config_path, seed, app.count("--seed") > 0, out_path);
        }
        if (run->parsed()) {
            nsmdp::EnvSpec env = env_spec_from_flags(env_name, horizon, vr, vp, tau, capacity, zeta,
                                                     fixed_cost, unit_cost, lost_sales, holding,
                                                     env_file, start_state);
            nsmdp::AlgorithmSpec algo{algo_name, window, eta};
            std::vector<std::string> dumps;
            nsmdp::SingleRunResult result = nsmdp::run_single(
                env, algo, seed, delta, oracle_tol, dump_regions ? &dumps : nullptr);
            std::string path = out_path.empty() ? "trace.csv" : out_path;
            if (format == "json") {
                json doc;
                doc["steps"] = json::array();
                for (std::size_t i = 0; i < result.trace.steps.size(); ++i) {
                    const nsmdp::StepRecord& s = result.trace.steps[i];
                    doc["steps"].push_back({{"t", s.t},
                                            {"state", s.state},
                                            {"action", s.action},
                                            {"realized_reward", s.realized_reward},
                                            {"mean_reward", s.mean_reward},
                                            {"oracle_gain", result.gains[s.t - 1]},
                                            {"cum_regret", result.regret.cumulative[i]}});
                }
                std::ofstream of(path);
                of << doc.dump(1) << '\n';
            } else {
                nsmdp::write_trace_csv(result, path);
            }
            if (dump_regions) {
                std::ofstream rf(path + ".regions.txt");
                for (const std::string& dump : dumps) rf << dump << '\n';
            }
            std::printf("trace written to %s (%zu steps, %zu episodes, final cum regret %s)\n",
                        path.c_str(), result.trace.steps.size(), result.trace.episodes.size(),
                        nsmdp::format_sig(result.regret.cumulative.back()).c_str());
            return 0;
        }
        if (oracle->parsed()) {
            nsmdp::EnvSpec env = env_spec_from_flags(env_name, horizon, vr, vp, tau, capacity, zeta,
                                                     fixed_cost, unit_cost, lost_sales, holding,
                                                     env_file, start_state);
            nsmdp::TimeVaryingMdp mdp = [&] {
                if (env.type == "inventory") return nsmdp::InventoryModel(env.inventory).pseudo_mdp(true);
                if (env.type == "peril") return nsmdp::peril_instance(env.peril).sequence;
                if (env.type == "file") return nsmdp::load_instance(env.path);
                return nsmdp::drifting_env(env.drifting);
            }();
            std::vector<double> gains = nsmdp::oracle_gains(mdp, oracle_tol);
            std::vector<double> diameters = nsmdp::oracle_diameters(mdp);
            std::string path = out_path.empty() ? "oracle.csv" : out_path;
            if (format == "json") {
                json doc = {{"gains", gains}, {"diameters", diameters}};
                std::ofstream of(path);
                of << doc.dump(1) << '\n';
            } else {
                std::ofstream of(path);
                of << "t,optimal_gain,diameter\n";
                for (std::size_t t = 0; t < gains.size(); ++t)
                    of << (t + 1) << ',' << nsmdp::format_sig(gains[t]) << ','
                       << nsmdp::format_sig(diameters[t]) << '\n';
            }
            std::printf("oracle series written to %s\n", path.c_str());
            return 0;
        }
        if (peril->parsed()) {
            nsmdp::PerilReport report = nsmdp::run_peril({peril_tau}, peril_delta, peril_eta);
            json doc;
            doc["tau"] = report.instance.tau;
            doc["window"] = report.instance.window;
            doc["diameter_p1"] = report.diameter_p1;
            doc["diameter_p2"] = report.diameter_p2;
            doc["diameter_empirical"] = report.diameter_empirical;
            doc["witness_diameter_eta0"] = report.witness_diameter_eta0;
            doc["witness_diameter_eta"] = report.witness_diameter_eta;
            doc["eta"] = report.eta;
            json counts = json::array();
            json rows = json::array();
            for (int pair = 0; pair < 4; ++pair) {
                counts.push_back(report.counts.n[pair]);
                rows.push_back({report.empirical.transitions[pair * 2],
                                report.empirical.transitions[pair * 2 + 1]});
            }
            doc["counts"] = counts;
            doc["empirical_rows"] = rows;
            std::string text = doc.dump(1) + "\n";
            if (out_path.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                std::ofstream of(out_path);
                of << text;
                std::printf("peril report written to %s\n", out_path.c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
