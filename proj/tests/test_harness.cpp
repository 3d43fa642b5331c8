#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsmdp/harness.hpp"
#include "nsmdp/oracles.hpp"
#include "test_support.hpp"

using namespace nsmdp;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace

TEST_CASE("dynamic regret: optimal play on a stationary env accrues nothing") {
    // state 1 absorbs at the optimal gain; the optimal policy reaches it in one step
    ActionLayout layout = ActionLayout::uniform(2, 2);
    std::vector<double> rewards = {0.1, 0.2, 0.9, 0.1};
    std::vector<double> transitions = {1, 0, 0, 1, 0, 1, 1, 0};
    TimeVaryingMdp mdp = TimeVaryingMdp::stationary(layout, 50, rewards, transitions);
    std::vector<double> gains = oracle_gains(mdp, 1e-9);
    CHECK(gains[0] == doctest::Approx(0.9).epsilon(1e-8));

    Trace trace;
    RandomStream rng(1);
    int s = 0;
    for (int t = 1; t <= 50; ++t) {
        int a = s == 0 ? 1 : 0; // go to state 1, then hold
        trace.steps.push_back({t, s, a, mdp.mean_reward(t, s, a), mdp.mean_reward(t, s, a)});
        s = step(mdp, t, s, a, rng).next_state;
    }
    RegretCurve curve = dynamic_regret(trace, gains);
    CHECK(curve.per_step[0] == doctest::Approx(0.7).epsilon(1e-8)); // transit step
    for (std::size_t i = 1; i < curve.per_step.size(); ++i)
        CHECK(std::abs(curve.per_step[i]) < 1e-8);
    CHECK(curve.cumulative.back() < 0.7 + 1e-6);
}

TEST_CASE("dynamic regret: single-state env reduces to bandit regret") {
    ActionLayout layout = ActionLayout::uniform(1, 3);
    const int T = 40;
    TimeVaryingMdp mdp(
        layout, T,
        [](int t, int, int a) { return 0.2 + 0.1 * a + 0.01 * (t % 5); },
        [](int, int, int, std::span<double> row) { row[0] = 1.0; });
    std::vector<double> gains = oracle_gains(mdp, 1e-10);
    RandomStream rng(3);
    Trace trace;
    double bandit_regret = 0.0;
    for (int t = 1; t <= T; ++t) {
        int a = static_cast<int>(rng.uniform() * 3);
        double mean = mdp.mean_reward(t, 0, a);
        trace.steps.push_back({t, 0, a, mean, mean});
        double best = std::max({mdp.mean_reward(t, 0, 0), mdp.mean_reward(t, 0, 1),
                                mdp.mean_reward(t, 0, 2)});
        bandit_regret += best - mean;
    }
    RegretCurve curve = dynamic_regret(trace, gains);
    CHECK(curve.cumulative.back() == doctest::Approx(bandit_regret).epsilon(1e-7));
}

TEST_CASE("dynamic regret: bounds and error paths") {
    std::vector<double> gains = {1.0};
    Trace trace;
    trace.steps.push_back({1, 0, 0, 0.0, 0.0});
    RegretCurve curve = dynamic_regret(trace, gains);
    CHECK(curve.per_step[0] == 1.0); // worst-case single step

    trace.steps.push_back({2, 0, 0, 0.0, 0.0});
    CHECK_THROWS_AS(dynamic_regret(trace, gains), std::invalid_argument);
}

TEST_CASE("oracle gains are reproducible across recomputation") {
    TimeVaryingMdp mdp = drifting_env({120, 1.5, 1.5, false});
    std::vector<double> first = oracle_gains(mdp, 1e-7);
    std::vector<double> second = oracle_gains(mdp, 1e-7);
    CHECK(first == second);
}

TEST_CASE("oracle series is constant on a stationary env") {
    RandomStream rng(21);
    MdpSlice slice = testsupport::random_dense_slice(rng, 3, {2, 2, 2});
    TimeVaryingMdp mdp = TimeVaryingMdp::stationary(slice.layout, 30, slice.rewards, slice.transitions);
    std::vector<double> gains = oracle_gains(mdp, 1e-8);
    std::vector<double> diameters = oracle_diameters(mdp);
    for (double g : gains) CHECK(g == gains[0]);
    for (double d : diameters) CHECK(d == diameters[0]);
}

namespace {

ExperimentConfig tiny_config(const std::string& outdir) {
    nlohmann::json doc = {
        {"env", {{"type", "drifting"}, {"horizon", 250}, {"reward_variation", 2.0},
                 {"transition_variation", 2.0}}},
        {"algorithms", {"swucrl2cw", "ucrl2"}},
        {"runs", 3},
        {"seed", 7},
        {"output", outdir},
        {"workers", 2},
    };
    return experiment_config_from_json(doc);
}

} // namespace

TEST_CASE("experiment: deterministic byte-identical outputs for a fixed seed") {
    std::string dir_a = (std::filesystem::temp_directory_path() / "nsmdp_exp_a").string();
    std::string dir_b = (std::filesystem::temp_directory_path() / "nsmdp_exp_b").string();
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    RunSummary a = run_experiment(tiny_config(dir_a));
    RunSummary b = run_experiment(tiny_config(dir_b));
    REQUIRE(a.scenarios.size() == 1);
    CHECK(a.scenarios[0].failures.empty());
    CHECK(read_file(a.scenarios[0].csv_path) == read_file(b.scenarios[0].csv_path));
    CHECK(read_file(a.scenarios[0].plot_path) == read_file(b.scenarios[0].plot_path));

    // CSV round-trip: parsing and re-printing reproduces the file and the
    // in-memory summary at 12 significant digits
    auto rows = parse_csv(read_file(a.scenarios[0].csv_path));
    REQUIRE(rows.size() == 251); // header + T rows
    REQUIRE(rows[0].size() == 1 + 2 * 4);
    const AlgorithmSummary& sw = a.scenarios[0].algorithms[0];
    for (int t = 0; t < 250; t += 17) {
        const auto& row = rows[t + 1];
        CHECK(row[0] == std::to_string(t + 1));
        CHECK(row[1] == format_sig(sw.mean_cum_reward[t]));
        CHECK(format_sig(std::stod(row[1])) == row[1]);
        CHECK(row[3] == format_sig(sw.mean_cum_regret[t]));
        CHECK(format_sig(std::stod(row[3])) == row[3]);
    }
    // plot is a self-contained svg
    std::string svg = read_file(a.scenarios[0].plot_path);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("experiment: outputs are independent of the worker count") {
    std::string dir_a = (std::filesystem::temp_directory_path() / "nsmdp_w1").string();
    std::string dir_b = (std::filesystem::temp_directory_path() / "nsmdp_w4").string();
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    ExperimentConfig serial = tiny_config(dir_a);
    serial.workers = 1;
    ExperimentConfig parallel = tiny_config(dir_b);
    parallel.workers = 4;
    RunSummary a = run_experiment(serial);
    RunSummary b = run_experiment(parallel);
    CHECK(read_file(a.scenarios[0].csv_path) == read_file(b.scenarios[0].csv_path));
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("experiment: averaged curves are invariant under seed order") {
    EnvSpec env = env_spec_from_json(
        {{"type", "drifting"}, {"horizon", 150}, {"reward_variation", 1.0},
         {"transition_variation", 1.0}});
    AlgorithmSpec algo{"ucrl2", 0, -1.0};
    std::vector<std::uint64_t> seeds = {11, 12, 13, 14};
    auto total_for = [&](const std::vector<std::uint64_t>& order) {
        double total = 0.0;
        for (std::uint64_t seed : order) {
            SingleRunResult r = run_single(env, algo, seed, 0.0, 1e-6);
            total += r.regret.cumulative.back();
        }
        return total / order.size();
    };
    double forward = total_for(seeds);
    double backward = total_for({14, 13, 12, 11});
    CHECK(forward == doctest::Approx(backward).epsilon(1e-15));
}

TEST_CASE("experiment: partial failures are recorded per cell") {
    std::string dir = (std::filesystem::temp_directory_path() / "nsmdp_exp_fail").string();
    std::filesystem::remove_all(dir);
    nlohmann::json doc = {
        {"env", {{"type", "drifting"}, {"horizon", 100}, {"reward_variation", 1.0},
                 {"transition_variation", 1.0}}},
        // window override exceeding the horizon makes every cell of the first
        // algorithm fail; the second algorithm must still complete
        {"algorithms", {nlohmann::json{{"name", "swucrl2cw"}, {"window", 500}, {"eta", 0.1}},
                        nlohmann::json("ucrl2")}},
        {"runs", 2},
        {"seed", 3},
        {"output", dir},
    };
    RunSummary summary = run_experiment(experiment_config_from_json(doc));
    REQUIRE(summary.scenarios.size() == 1);
    const ScenarioResult& scenario = summary.scenarios[0];
    CHECK(scenario.failures.size() == 2);
    CHECK(scenario.algorithms[0].completed_runs == 0);
    CHECK(scenario.algorithms[1].completed_runs == 2);
    CHECK(scenario.failures[0].find("swucrl2cw/run0") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("instance serialization round-trips tables and metadata") {
    RandomStream rng(9);
    MdpSlice slice = testsupport::random_dense_slice(rng, 3, {2, 1, 3});
    TimeVaryingMdp original =
        TimeVaryingMdp::stationary(slice.layout, 4, slice.rewards, slice.transitions);
    original.noise = RewardNoise::truncated_gaussian;
    original.noise_sigma = 0.7;

    std::string path = (std::filesystem::temp_directory_path() / "nsmdp_instance.json").string();
    save_instance(original, path);
    TimeVaryingMdp loaded = load_instance(path);
    CHECK(loaded.num_states() == 3);
    CHECK(loaded.actions_per_state() == std::vector<int>{2, 1, 3});
    CHECK(loaded.horizon() == 4);
    CHECK(loaded.noise == RewardNoise::truncated_gaussian);
    CHECK(loaded.noise_sigma == 0.7);
    for (int t = 1; t <= 4; ++t)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < loaded.actions_per_state()[s]; ++a) {
                CHECK(loaded.mean_reward(t, s, a) == original.mean_reward(t, s, a));
                CHECK(loaded.transition_row(t, s, a) == original.transition_row(t, s, a));
            }
    std::filesystem::remove(path);

    // named generator form
    nlohmann::json gen = {{"generator",
                           {{"name", "drifting"}, {"horizon", 60}, {"reward_variation", 1.0},
                            {"transition_variation", 1.0}}}};
    TimeVaryingMdp generated = instance_from_json(gen);
    CHECK(generated.horizon() == 60);
    CHECK(generated.nonconforming);
}

TEST_CASE("experiment config: defaults and validation") {
    nlohmann::json doc = {
        {"env", {{"type", "inventory"}, {"capacity", 4}, {"horizon", 80}, {"zeta", 0.05}}},
        {"algorithms", {"borl"}},
        {"runs", 2},
    };
    ExperimentConfig config = experiment_config_from_json(doc);
    CHECK(config.env.type == "inventory");
    CHECK(config.runs == 2);
    CHECK(config.delta == 0.0); // defaults to 1/T at run time
    doc["algorithms"] = {"nope"};
    CHECK_THROWS_AS(experiment_config_from_json(doc), std::invalid_argument);
}
