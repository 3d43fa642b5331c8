#include "nsmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "nsmdp/oracles.hpp"

namespace nsmdp {

std::vector<double> oracle_gains(const TimeVaryingMdp& mdp, double tolerance) {
    std::vector<double> gains(mdp.horizon());
    for (int t = 1; t <= mdp.horizon(); ++t)
        gains[t - 1] = optimal_gain(mdp.slice_at(t), tolerance).gain;
    return gains;
}

std::vector<double> oracle_diameters(const TimeVaryingMdp& mdp, double tolerance) {
    std::vector<double> diameters(mdp.horizon());
    for (int t = 1; t <= mdp.horizon(); ++t)
        diameters[t - 1] = diameter(mdp.slice_at(t), tolerance);
    return diameters;
}

RegretCurve dynamic_regret(const Trace& trace, std::span<const double> gains) {
    RegretCurve curve;
    curve.per_step.reserve(trace.steps.size());
    curve.cumulative.reserve(trace.steps.size());
    double total = 0.0;
    for (const StepRecord& step : trace.steps) {
        if (step.t < 1 || step.t > static_cast<int>(gains.size()))
            throw std::invalid_argument("dynamic_regret: trace/oracle length mismatch");
        double r = gains[step.t - 1] - step.mean_reward;
        total += r;
        curve.per_step.push_back(r);
        curve.cumulative.push_back(total);
    }
    return curve;
}

std::string format_sig(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

namespace {

struct ScenarioEnv {
    // exactly one of these is set
    std::optional<TimeVaryingMdp> mdp;
    std::shared_ptr<InventoryModel> inventory;
    int start_state = 0;
    int horizon = 0;

    std::unique_ptr<Environment> fresh() const {
        if (inventory) return std::make_unique<InventoryEnvironment>(*inventory, start_state);
        return std::make_unique<MdpEnvironment>(*mdp, start_state);
    }
    // instance whose mean rewards the traces record; used for oracle gains
    TimeVaryingMdp oracle_instance() const {
        if (inventory) return inventory->pseudo_mdp(true);
        return *mdp;
    }
};

ScenarioEnv make_env(const EnvSpec& spec) {
    ScenarioEnv env;
    env.start_state = spec.start_state;
    if (spec.type == "drifting") {
        env.mdp = drifting_env(spec.drifting);
    } else if (spec.type == "peril") {
        env.mdp = peril_instance(spec.peril).sequence;
    } else if (spec.type == "inventory") {
        env.inventory = std::make_shared<InventoryModel>(spec.inventory);
    } else if (spec.type == "file") {
        env.mdp = load_instance(spec.path);
    } else {
        throw std::invalid_argument("unknown env type: " + spec.type);
    }
    env.horizon = env.inventory ? env.inventory->config().horizon : env.mdp->horizon();
    return env;
}

Trace dispatch_algorithm(const AlgorithmSpec& algo, Environment& env, double delta,
                         int derived_window, double derived_widening, RandomStream& rng,
                         const std::function<void(int, int, const ConfidenceRegionSet&)>& hook) {
    if (algo.name == "swucrl2cw") {
        SwConfig config;
        config.window = algo.window > 0 ? algo.window : derived_window;
        config.widening = algo.widening >= 0.0 ? algo.widening : derived_widening;
        config.delta = delta;
        config.on_regions = hook;
        return run_swucrl2cw(env, config, rng);
    }
    if (algo.name == "ucrl2") return run_ucrl2(env, delta, rng);
    if (algo.name == "ucrl2s") return run_ucrl2s(env, delta, rng);
    if (algo.name == "borl") return run_borl(env, delta, rng);
    throw std::invalid_argument("unknown algorithm: " + algo.name);
}

struct CellResult {
    bool ok = false;
    std::string error;
    std::vector<double> cum_reward; // mean-reward accumulation at visited pairs
    std::vector<double> cum_regret;
};

void accumulate(AlgorithmSummary& summary, const std::vector<CellResult>& cells, int horizon) {
    summary.mean_cum_reward.assign(horizon, 0.0);
    summary.se_cum_reward.assign(horizon, 0.0);
    summary.mean_cum_regret.assign(horizon, 0.0);
    summary.se_cum_regret.assign(horizon, 0.0);
    int n = 0;
    for (const CellResult& cell : cells)
        if (cell.ok) n += 1;
    summary.completed_runs = n;
    if (n == 0) return;
    for (int t = 0; t < horizon; ++t) {
        double sum_r = 0.0, sum_g = 0.0;
        for (const CellResult& cell : cells) {
            if (!cell.ok) continue;
            sum_r += cell.cum_reward[t];
            sum_g += cell.cum_regret[t];
        }
        summary.mean_cum_reward[t] = sum_r / n;
        summary.mean_cum_regret[t] = sum_g / n;
        if (n > 1) {
            double var_r = 0.0, var_g = 0.0;
            for (const CellResult& cell : cells) {
                if (!cell.ok) continue;
                var_r += (cell.cum_reward[t] - summary.mean_cum_reward[t]) *
                         (cell.cum_reward[t] - summary.mean_cum_reward[t]);
                var_g += (cell.cum_regret[t] - summary.mean_cum_regret[t]) *
                         (cell.cum_regret[t] - summary.mean_cum_regret[t]);
            }
            summary.se_cum_reward[t] = std::sqrt(var_r / (n - 1) / n);
            summary.se_cum_regret[t] = std::sqrt(var_g / (n - 1) / n);
        }
    }
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
    RunSummary summary;
    std::filesystem::create_directories(config.output);

    std::vector<ScenarioSpec> scenarios = config.scenarios;
    if (scenarios.empty()) scenarios.push_back(ScenarioSpec{"default", 0, 0, 0, 0});

    for (const ScenarioSpec& scenario : scenarios) {
        EnvSpec env_spec = config.env;
        if (env_spec.type == "drifting") {
            const double T = env_spec.drifting.horizon;
            if (scenario.reward_variation_pow > 0.0)
                env_spec.drifting.reward_variation = std::pow(T, scenario.reward_variation_pow);
            else if (scenario.reward_variation > 0.0)
                env_spec.drifting.reward_variation = scenario.reward_variation;
            if (scenario.transition_variation_pow > 0.0)
                env_spec.drifting.transition_variation = std::pow(T, scenario.transition_variation_pow);
            else if (scenario.transition_variation > 0.0)
                env_spec.drifting.transition_variation = scenario.transition_variation;
        }
        ScenarioEnv env = make_env(env_spec);
        const int horizon = env.horizon;
        const double delta = config.delta > 0.0 ? config.delta : 1.0 / horizon;

        ScenarioResult result;
        result.name = scenario.name.empty() ? "default" : scenario.name;
        result.horizon = horizon;
        result.runs = config.runs;

        TimeVaryingMdp oracle_mdp = env.oracle_instance();
        const std::vector<double> gains = oracle_gains(oracle_mdp, config.oracle_tolerance);
        VariationBudgets budgets = variation_budgets(oracle_mdp);
        result.reward_budget = budgets.reward_budget;
        result.transition_budget = budgets.transition_budget;
        const ActionLayout& layout = oracle_mdp.layout();
        TheoreticalParams derived =
            theoretical_params(layout.num_states, layout.average_actions(), horizon,
                               budgets.reward_budget, budgets.transition_budget);
        result.derived_window = derived.window;
        result.derived_widening = derived.widening;

        const int algos = static_cast<int>(config.algorithms.size());
        std::vector<std::vector<CellResult>> cells(algos, std::vector<CellResult>(config.runs));

        std::atomic<int> next_cell{0};
        const int total_cells = algos * config.runs;
        int workers = config.workers > 0 ? config.workers
                                         : static_cast<int>(std::thread::hardware_concurrency());
        workers = std::clamp(workers, 1, std::max(1, total_cells));
        auto worker = [&]() {
            for (;;) {
                int idx = next_cell.fetch_add(1);
                if (idx >= total_cells) return;
                const int algo_idx = idx / config.runs;
                const int run_idx = idx % config.runs;
                CellResult& cell = cells[algo_idx][run_idx];
                try {
                    RandomStream rng(config.seed + static_cast<std::uint64_t>(run_idx));
                    std::unique_ptr<Environment> instance = env.fresh();
                    Trace trace = dispatch_algorithm(config.algorithms[algo_idx], *instance, delta,
                                                     derived.window, derived.widening, rng, nullptr);
                    RegretCurve regret = dynamic_regret(trace, gains);
                    cell.cum_reward.resize(horizon, 0.0);
                    cell.cum_regret.resize(horizon, 0.0);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
                        acc += trace.steps[i].mean_reward;
                        cell.cum_reward[i] = acc;
                        cell.cum_regret[i] = regret.cumulative[i];
                    }
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& thread : pool) thread.join();

        for (int a = 0; a < algos; ++a) {
            AlgorithmSummary algo_summary;
            algo_summary.name = config.algorithms[a].name;
            accumulate(algo_summary, cells[a], horizon);
            for (int r = 0; r < config.runs; ++r) {
                if (!cells[a][r].ok)
                    result.failures.push_back(config.algorithms[a].name + "/run" + std::to_string(r) +
                                              ": " + cells[a][r].error);
            }
            result.algorithms.push_back(std::move(algo_summary));
        }

        result.csv_path = config.output + "/scenario_" + result.name + ".csv";
        result.plot_path = config.output + "/scenario_" + result.name + ".svg";
        write_scenario_csv(result, result.csv_path);
        write_scenario_svg(result, result.plot_path);
        summary.scenarios.push_back(std::move(result));
    }
    return summary;
}

SingleRunResult run_single(const EnvSpec& env_spec, const AlgorithmSpec& algorithm,
                           std::uint64_t seed, double delta, double oracle_tolerance,
                           std::vector<std::string>* region_dumps) {
    ScenarioEnv env = make_env(env_spec);
    TimeVaryingMdp oracle_mdp = env.oracle_instance();
    SingleRunResult result;
    result.gains = oracle_gains(oracle_mdp, oracle_tolerance);
    const double effective_delta = delta > 0.0 ? delta : 1.0 / env.horizon;

    VariationBudgets budgets = variation_budgets(oracle_mdp);
    TheoreticalParams derived =
        theoretical_params(oracle_mdp.num_states(), oracle_mdp.layout().average_actions(),
                           env.horizon, budgets.reward_budget, budgets.transition_budget);

    std::function<void(int, int, const ConfidenceRegionSet&)> hook;
    if (region_dumps) {
        hook = [region_dumps](int episode, int tau, const ConfidenceRegionSet& regions) {
            char head[64];
            std::snprintf(head, sizeof(head), "episode %d (tau=%d)\n", episode, tau);
            region_dumps->push_back(head + regions.dump());
        };
    }

    RandomStream rng(seed);
    std::unique_ptr<Environment> instance = env.fresh();
    result.trace = dispatch_algorithm(algorithm, *instance, effective_delta, derived.window,
                                      derived.widening, rng, hook);
    result.regret = dynamic_regret(result.trace, result.gains);
    return result;
}

void write_trace_csv(const SingleRunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << "t,state,action,realized_reward,mean_reward,oracle_gain,per_step_regret,cum_regret\n";
    for (std::size_t i = 0; i < result.trace.steps.size(); ++i) {
        const StepRecord& step = result.trace.steps[i];
        out << step.t << ',' << step.state << ',' << step.action << ','
            << format_sig(step.realized_reward) << ',' << format_sig(step.mean_reward) << ','
            << format_sig(result.gains[step.t - 1]) << ','
            << format_sig(result.regret.per_step[i]) << ','
            << format_sig(result.regret.cumulative[i]) << '\n';
    }
}

void write_scenario_csv(const ScenarioResult& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv file: " + path);
    out << "t";
    for (const AlgorithmSummary& algo : scenario.algorithms)
        out << ',' << algo.name << "_mean_cum_reward," << algo.name << "_se_cum_reward,"
            << algo.name << "_mean_cum_regret," << algo.name << "_se_cum_regret";
    out << '\n';
    for (int t = 0; t < scenario.horizon; ++t) {
        out << (t + 1);
        for (const AlgorithmSummary& algo : scenario.algorithms) {
            out << ',' << format_sig(algo.mean_cum_reward[t]) << ','
                << format_sig(algo.se_cum_reward[t]) << ',' << format_sig(algo.mean_cum_regret[t])
                << ',' << format_sig(algo.se_cum_regret[t]);
        }
        out << '\n';
    }
}

void write_scenario_svg(const ScenarioResult& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg file: " + path);
    const int width = 860, height = 560;
    const int margin_left = 80, margin_right = 170, margin_top = 40, margin_bottom = 60;
    const double plot_w = width - margin_left - margin_right;
    const double plot_h = height - margin_top - margin_bottom;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf"};

    double y_min = 0.0, y_max = 1.0;
    bool first = true;
    for (const AlgorithmSummary& algo : scenario.algorithms) {
        for (double v : algo.mean_cum_reward) {
            if (first) {
                y_min = y_max = v;
                first = false;
            }
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (y_max <= y_min) y_max = y_min + 1.0;
    auto x_of = [&](int t) { return margin_left + plot_w * t / std::max(1, scenario.horizon - 1); };
    auto y_of = [&](double v) { return margin_top + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << "Cumulative reward, scenario " << scenario.name << "</text>\n";
    // axes
    out << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top + plot_h << "\" x2=\""
        << margin_left + plot_w << "\" y2=\"" << margin_top + plot_h
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin_left << "\" y1=\"" << margin_top << "\" x2=\"" << margin_left
        << "\" y2=\"" << margin_top + plot_h << "\" stroke=\"black\"/>\n";
    char buf[64];
    for (int k = 0; k <= 4; ++k) {
        double v = y_min + (y_max - y_min) * k / 4.0;
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        out << "<text x=\"" << margin_left - 8 << "\" y=\"" << y_of(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
        int t = scenario.horizon * k / 4;
        out << "<text x=\"" << x_of(std::max(0, t - 1)) << "\" y=\"" << margin_top + plot_h + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << t << "</text>\n";
    }
    out << "<text x=\"" << margin_left + plot_w / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\" font-size=\"13\">t</text>\n";

    int color_idx = 0;
    for (const AlgorithmSummary& algo : scenario.algorithms) {
        const char* color = colors[color_idx % 7];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        int stride = std::max(1, scenario.horizon / 1000);
        for (int t = 0; t < scenario.horizon; t += stride) {
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x_of(t), y_of(algo.mean_cum_reward[t]));
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f", x_of(scenario.horizon - 1),
                      y_of(algo.mean_cum_reward.back()));
        out << buf << "\"/>\n";
        int ly = margin_top + 16 + 20 * color_idx;
        out << "<line x1=\"" << margin_left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
            << margin_left + plot_w + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << margin_left + plot_w + 42 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\">" << algo.name << "</text>\n";
        color_idx += 1;
    }
    out << "</svg>\n";
}

} // namespace nsmdp
