#include "nsmdp/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nsmdp {

TheoreticalParams theoretical_params(int S, double A, int T, double reward_budget,
                                     double transition_budget) {
    if (reward_budget < 0.0 || transition_budget < 0.0)
        throw std::invalid_argument("theoretical_params: budgets must be non-negative");
    double total = reward_budget + transition_budget;
    double w_real;
    if (total > 0.0) {
        w_real = std::pow(S, 2.0 / 3.0) * std::sqrt(A) * std::sqrt(static_cast<double>(T)) /
                 std::sqrt(total);
    } else {
        // oblivious tuning when no budget information is available
        w_real = std::pow(S, 2.0 / 3.0) * std::sqrt(A) * std::sqrt(static_cast<double>(T));
    }
    int window = static_cast<int>(std::llround(w_real));
    window = std::clamp(window, 1, T);
    double eta = total > 0.0 ? std::sqrt(transition_budget * window / static_cast<double>(T))
                             : std::sqrt(static_cast<double>(window) / T);
    return {window, eta};
}

namespace {

EviResult plan_episode(const ConfidenceRegionSet& regions, bool clip_rewards, double epsilon,
                       int episode, int local_tau) {
    try {
        return extended_value_iteration(regions.to_regions(clip_rewards), epsilon);
    } catch (const EviNonConvergent&) {
        // one retry with the widening doubled for this episode only
        ConfidenceRegionSet widened = regions;
        widened.eta = 2.0 * regions.eta;
        try {
            return extended_value_iteration(widened.to_regions(clip_rewards), epsilon);
        } catch (const EviNonConvergent& e) {
            char buf[192];
            std::snprintf(buf, sizeof(buf),
                          "EVI non-convergent in episode %d (tau=%d, eta=%g, retried at 2eta): %s",
                          episode, local_tau, regions.eta, e.what());
            throw std::runtime_error(buf);
        }
    }
}

} // namespace

void run_sw_segment(Environment& env, const SwConfig& config, RandomStream& rng,
                    int max_steps, Trace& trace) {
    const ActionLayout& layout = env.layout();
    const int W = config.window;
    if (W <= 0) throw std::invalid_argument("run_sw_segment: window must be positive");
    if (config.widening < 0.0) throw std::invalid_argument("run_sw_segment: widening must be non-negative");
    const int radius_T = config.radius_horizon > 0 ? config.radius_horizon : env.horizon();
    const bool clip_rewards = !env.nonconforming();

    trace.segments.push_back({env.time(), 0, W, config.widening});
    SegmentRecord& segment = trace.segments.back();

    WindowBuffer buffer(W, layout);
    std::vector<long> nu(layout.total_pairs());
    int local_t = 1;
    int episode = 0;

    while (local_t <= max_steps && !env.done()) {
        episode += 1;
        const int tau = local_t;
        const Counts& counts = buffer.snapshot(tau);
        ConfidenceRegionSet regions = build_regions(counts, config.delta, config.widening, radius_T);
        if (config.on_regions) config.on_regions(episode, tau, regions);
        const double epsilon = 1.0 / std::sqrt(static_cast<double>(tau));
        EviResult evi = plan_episode(regions, clip_rewards, epsilon, episode, tau);

        std::vector<long> n_plus(layout.total_pairs());
        for (int pair = 0; pair < layout.total_pairs(); ++pair) n_plus[pair] = counts.n_plus(pair);
        std::fill(nu.begin(), nu.end(), 0L);

        EpisodeRecord record;
        record.start_t = env.time();
        record.local_start = tau;
        record.window = W;
        record.eta = config.widening;
        record.evi_epsilon = epsilon;
        record.policy = evi.policy;
        record.n_plus = n_plus;

        EpisodeEnd reason = EpisodeEnd::horizon;
        int length = 0;
        for (;;) {
            const int global_t = env.time();
            const int s = env.state();
            const int a = evi.policy[s];
            const double mean = env.mean_reward(global_t, s, a);
            StepOutcome outcome = env.step(a, rng);
            buffer.record(local_t, s, a, outcome.reward, outcome.next_state);
            trace.steps.push_back({global_t, s, a, outcome.reward, mean});
            nu[layout.pair(s, a)] += 1;
            local_t += 1;
            length += 1;
            if (local_t > max_steps || env.done()) {
                reason = EpisodeEnd::horizon;
                break;
            }
            if (local_t % W == 0) {
                reason = EpisodeEnd::window_multiple;
                break;
            }
            const int s_next = env.state();
            const int planned = layout.pair(s_next, evi.policy[s_next]);
            if (nu[planned] >= n_plus[planned]) {
                reason = EpisodeEnd::doubling;
                break;
            }
        }
        record.length = length;
        record.end_reason = reason;
        record.nu = nu;
        trace.episodes.push_back(std::move(record));
    }
    segment.length = local_t - 1;
}

Trace run_swucrl2cw(Environment& env, const SwConfig& config, RandomStream& rng) {
    if (config.window > env.horizon())
        throw std::invalid_argument("run_swucrl2cw: window exceeds horizon");
    Trace trace;
    run_sw_segment(env, config, rng, env.horizon(), trace);
    return trace;
}

Trace run_ucrl2(Environment& env, double delta, RandomStream& rng) {
    SwConfig config;
    config.window = env.horizon();
    config.widening = 0.0;
    config.delta = delta;
    return run_swucrl2cw(env, config, rng);
}

Trace run_ucrl2s(Environment& env, double delta, RandomStream& rng) {
    const int T = env.horizon();
    const int period = static_cast<int>(std::floor(std::pow(static_cast<double>(T), 2.0 / 3.0)));
    SwConfig config;
    config.window = T;
    config.widening = 0.0;
    config.delta = delta;
    config.radius_horizon = T;
    Trace trace;
    while (!env.done()) {
        run_sw_segment(env, config, rng, std::max(period, 1), trace);
    }
    return trace;
}

BorlGrid BorlGrid::make(int S, double A, int T) {
    BorlGrid grid;
    grid.block_length = static_cast<int>(
        std::floor(3.0 * std::pow(S, 2.0 / 3.0) * std::sqrt(A) * std::sqrt(static_cast<double>(T))));
    grid.block_length = std::max(grid.block_length, 1);
    grid.phi = 1.0 / (2.0 * std::sqrt(static_cast<double>(T)));
    grid.delta_w = std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(grid.block_length)))));
    grid.delta_eta = std::max(1, static_cast<int>(std::floor(std::log(1.0 / grid.phi))));
    grid.cells = (grid.delta_w + 1) * (grid.delta_eta + 1);
    const double eta_scale = std::pow(S, 1.0 / 3.0) * std::pow(A, 0.25);
    for (int j = 0; j <= grid.delta_w; ++j) {
        double w = std::pow(static_cast<double>(grid.block_length),
                            static_cast<double>(j) / grid.delta_w);
        grid.windows.push_back(std::max(1, static_cast<int>(std::floor(w))));
    }
    for (int k = 0; k <= grid.delta_eta; ++k)
        grid.widenings.push_back(eta_scale *
                                 std::pow(grid.phi, static_cast<double>(k) / grid.delta_eta));
    return grid;
}

Exp3pState Exp3pState::init(int cells, int rounds) {
    if (cells <= 0 || rounds <= 0) throw std::invalid_argument("Exp3pState: cells and rounds must be positive");
    Exp3pState state;
    const double ln_cells = std::log(static_cast<double>(cells));
    state.alpha = 0.95 * std::sqrt(ln_cells / (cells * static_cast<double>(rounds)));
    state.beta = std::sqrt(ln_cells / (cells * static_cast<double>(rounds)));
    // clamp keeps the mixture a distribution; the raw value exceeds 1 when
    // rounds < ~cells*ln(cells)
    state.gamma = std::min(1.0, 1.05 * std::sqrt(cells * ln_cells / static_cast<double>(rounds)));
    state.q.assign(cells, 0.0);
    return state;
}

std::vector<double> Exp3pState::probabilities() const {
    const std::size_t n = q.size();
    std::vector<double> u(n);
    double q_max = *std::max_element(q.begin(), q.end());
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = std::exp(alpha * (q[i] - q_max)); // overflow-guarded softmax
        z += u[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        u[i] = (1.0 - gamma) * u[i] / z + gamma / static_cast<double>(n);
    return u;
}

std::pair<int, std::vector<double>> exp3p_select(const Exp3pState& state, RandomStream& rng) {
    std::vector<double> u = state.probabilities();
    int chosen = rng.categorical(u);
    return {chosen, std::move(u)};
}

void exp3p_update(Exp3pState& state, int chosen, double block_reward, int block_length) {
    if (chosen < 0 || chosen >= static_cast<int>(state.q.size()))
        throw std::out_of_range("exp3p_update: cell index out of range");
    const double clamped = std::clamp(block_reward, 0.0, static_cast<double>(block_length));
    const double scaled = clamped / static_cast<double>(block_length);
    std::vector<double> u = state.probabilities();
    for (std::size_t i = 0; i < state.q.size(); ++i) {
        double gain = state.beta;
        if (static_cast<int>(i) == chosen) gain += scaled;
        state.q[i] += gain / u[i];
    }
    state.round += 1;
}

Trace run_borl(Environment& env, double delta, RandomStream& rng,
               std::vector<BorlBlockRecord>* blocks_out) {
    const ActionLayout& layout = env.layout();
    const int T = env.horizon();
    BorlGrid grid = BorlGrid::make(layout.num_states, layout.average_actions(), T);
    const int rounds = (T + grid.block_length - 1) / grid.block_length;
    Exp3pState master = Exp3pState::init(grid.cells, rounds);

    Trace trace;
    for (int block = 1; block <= rounds && !env.done(); ++block) {
        auto [cell, u] = exp3p_select(master, rng);
        const int j = cell / (grid.delta_eta + 1);
        const int k = cell % (grid.delta_eta + 1);
        SwConfig config;
        config.window = grid.windows[j];
        config.widening = grid.widenings[k];
        config.delta = delta;
        config.radius_horizon = T;

        const std::size_t first_step = trace.steps.size();
        run_sw_segment(env, config, rng, grid.block_length, trace);
        double block_reward = 0.0;
        for (std::size_t i = first_step; i < trace.steps.size(); ++i)
            block_reward += trace.steps[i].realized_reward;
        exp3p_update(master, cell, block_reward, grid.block_length);
        if (blocks_out)
            blocks_out->push_back({block, cell, config.window, config.widening, block_reward});
    }
    return trace;
}

} // namespace nsmdp
