#include "nsmdp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nsmdp/oracles.hpp"

namespace nsmdp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TimeVaryingMdp drifting_env(const DriftingConfig& config) {
    if (config.reward_variation <= 0.0 || config.transition_variation <= 0.0)
        throw std::invalid_argument("drifting_env: variation scales must be positive");
    const int T = config.horizon;
    const double vr = config.reward_variation;
    const double vp = config.transition_variation;
    const bool rescale = config.rescale_rewards;
    ActionLayout layout = ActionLayout::uniform(2, 2);
    TimeVaryingMdp mdp(
        layout, T,
        [T, vr, rescale](int t, int s, int a) {
            double c = std::cos(5.0 * vr * kPi * t / T);
            // amplitudes (3,1) at state 1 and (1,3) at state 2, opposite signs
            double amplitude = (s == a) ? 3.0 : 1.0;
            double sign = (s == 0) ? 1.0 : -1.0;
            double r = 0.2 + sign * amplitude * c;
            // raw range is [0.2-3, 0.2+3]
            return rescale ? (r + 2.8) / 6.0 : r;
        },
        [T, vp](int t, int s, int a, std::span<double> row) {
            if (a == 0) { // deterministic self-loop
                row[0] = s == 0 ? 1.0 : 0.0;
                row[1] = s == 0 ? 0.0 : 1.0;
                return;
            }
            double beta = 0.5 + 0.3 * std::sin(5.0 * vp * kPi * t / T);
            if (s == 0) {
                row[0] = 1.0 - beta;
                row[1] = beta;
            } else {
                row[0] = beta;
                row[1] = 1.0 - beta;
            }
        });
    mdp.noise = RewardNoise::deterministic;
    mdp.nonconforming = !rescale;
    return mdp;
}

namespace {

MdpSlice deterministic_two_state(std::initializer_list<int> targets) {
    // targets: next state for pairs (0,a1),(0,a2),(1,b1),(1,b2)
    MdpSlice slice;
    slice.layout = ActionLayout::uniform(2, 2);
    slice.rewards.assign(4, 0.0);
    slice.transitions.assign(8, 0.0);
    int pair = 0;
    for (int target : targets) {
        slice.transitions[pair * 2 + target] = 1.0;
        pair += 1;
    }
    return slice;
}

} // namespace

int PerilInstance::scripted_action(int t, int s) const {
    // pi1: 1 -> a1, 2 -> b2; pi2: 1 -> a2, 2 -> b1
    if (t <= 2 * tau) return s == 0 ? 0 : 1;
    return s == 0 ? 1 : 0;
}

PerilInstance peril_instance(const PerilConfig& config) {
    if (config.tau < 2) throw std::invalid_argument("peril_instance: tau must be at least 2");
    const int tau = config.tau;
    MdpSlice p1 = deterministic_two_state({0, 1, 1, 0});
    MdpSlice p2 = deterministic_two_state({1, 0, 0, 1});
    auto p1_rows = p1.transitions;
    auto p2_rows = p2.transitions;
    ActionLayout layout = ActionLayout::uniform(2, 2);
    TimeVaryingMdp sequence(
        layout, 4 * tau,
        [](int, int, int) { return 0.0; },
        [tau, p1_rows, p2_rows](int t, int s, int a, std::span<double> row) {
            int block = (t - 1) / tau; // 0-based block of tau steps
            const auto& table = (block % 2 == 0) ? p1_rows : p2_rows;
            int pair = s * 2 + a;
            row[0] = table[pair * 2 + 0];
            row[1] = table[pair * 2 + 1];
        });
    sequence.noise = RewardNoise::deterministic; // the construction is about transitions
    return {tau, 4 * tau, std::move(p1), std::move(p2), std::move(sequence)};
}

namespace {

// shift every row's mass toward the opposite state by half its L1 budget;
// for the 2-state construction this is the diameter-minimizing member of the
// confidence ball
MdpSlice greedy_cross_witness(const MdpSlice& empirical, const ConfidenceRegionSet& regions,
                              double eta) {
    MdpSlice witness = empirical;
    const int S = empirical.num_states();
    for (int pair = 0; pair < empirical.layout.total_pairs(); ++pair) {
        int s = pair / 2;
        int other = 1 - s;
        double budget = regions.p_radius[pair] + eta;
        double shift = std::min(budget / 2.0, 1.0 - witness.transitions[pair * S + other]);
        witness.transitions[pair * S + other] += shift;
        witness.transitions[pair * S + s] -= shift;
        if (witness.transitions[pair * S + s] < 0.0) {
            witness.transitions[pair * S + other] += witness.transitions[pair * S + s];
            witness.transitions[pair * S + s] = 0.0;
        }
    }
    return witness;
}

} // namespace

PerilReport run_peril(const PerilConfig& config, double delta, double eta) {
    PerilReport report{peril_instance(config), {}, {}, Counts{}, MdpSlice{}, 0, 0, 0, 0, 0, eta};
    const PerilInstance& inst = report.instance;
    const int W = inst.window;
    WindowBuffer buffer(W, inst.sequence.layout());

    int state = 0; // index 0 carries the construction's "state 1"
    report.states.push_back(state);
    std::vector<double> row(2);
    for (int t = 1; t <= W; ++t) {
        int action = inst.scripted_action(t, state);
        inst.sequence.transition_row(t, state, action, row);
        int next = row[1] > 0.5 ? 1 : 0; // deterministic rows
        buffer.record(t, state, action, 0.0, next);
        report.actions.push_back(action);
        report.states.push_back(next);
        state = next;
    }
    report.counts = buffer.snapshot(W + 1);

    MdpSlice empirical;
    empirical.layout = ActionLayout::uniform(2, 2);
    empirical.rewards.assign(4, 0.0);
    empirical.transitions.assign(8, 0.0);
    for (int pair = 0; pair < 4; ++pair) {
        double n_plus = static_cast<double>(report.counts.n_plus(pair));
        for (int sp = 0; sp < 2; ++sp)
            empirical.transitions[pair * 2 + sp] = report.counts.next_counts[pair * 2 + sp] / n_plus;
    }
    report.empirical = empirical;

    report.diameter_p1 = diameter(inst.p1);
    report.diameter_p2 = diameter(inst.p2);
    report.diameter_empirical = diameter(empirical);

    ConfidenceRegionSet regions = build_regions(report.counts, delta, 0.0, W + 1);
    report.witness_diameter_eta0 = diameter(greedy_cross_witness(empirical, regions, 0.0));
    report.witness_diameter_eta = diameter(greedy_cross_witness(empirical, regions, eta));
    return report;
}

// ---------------------------------------------------------------------------

InventoryConfig InventoryConfig::default_drifting(int capacity, int horizon, double zeta) {
    InventoryConfig config;
    config.capacity = capacity;
    config.horizon = horizon;
    config.pmf_floor = zeta;
    const int levels = capacity + 1;
    if (levels * zeta > 1.0)
        throw std::invalid_argument("default_drifting: zeta too large for the demand support");
    // low-demand profile decays geometrically, high-demand profile mirrors it
    std::vector<double> low(levels), high(levels);
    double z = 0.0;
    for (int x = 0; x < levels; ++x) {
        low[x] = std::pow(0.55, x);
        z += low[x];
    }
    for (int x = 0; x < levels; ++x) low[x] /= z;
    for (int x = 0; x < levels; ++x) high[x] = low[levels - 1 - x];
    config.demand_pmf = [low, high, levels, zeta, horizon](int t) {
        double w = 0.5 + 0.5 * std::sin(2.0 * kPi * t / std::max(1, horizon / 4));
        std::vector<double> pmf(levels);
        for (int x = 0; x < levels; ++x) {
            double mixed = (1.0 - w) * low[x] + w * high[x];
            pmf[x] = (1.0 - levels * zeta) * mixed + zeta; // exact zeta floor
        }
        return pmf;
    };
    return config;
}

void validate_inventory(const InventoryConfig& config) {
    if (config.capacity < 1) throw std::invalid_argument("inventory: capacity must be positive");
    if (config.horizon < 1) throw std::invalid_argument("inventory: horizon must be positive");
    if (!(config.pmf_floor > 0.0)) throw std::invalid_argument("inventory: pmf floor must be positive");
    if (!config.demand_pmf) throw std::invalid_argument("inventory: missing demand spec");
    char buf[128];
    for (int t = 1; t <= config.horizon; ++t) {
        std::vector<double> pmf = config.demand_pmf(t);
        if (static_cast<int>(pmf.size()) != config.capacity + 1)
            throw std::invalid_argument("inventory: demand PMF support must be {0..capacity}");
        double sum = 0.0;
        for (double p : pmf) {
            if (p < config.pmf_floor - 1e-12) {
                std::snprintf(buf, sizeof(buf), "inventory: PMF floor violated at t=%d", t);
                throw std::invalid_argument(buf);
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            std::snprintf(buf, sizeof(buf), "inventory: PMF at t=%d sums to %.12g", t, sum);
            throw std::invalid_argument(buf);
        }
    }
}

CensoredStep censored_step(const InventoryConfig& config, int t, int stock, int order,
                           RandomStream& rng) {
    if (stock < 0 || stock > config.capacity || order < 0 || order > config.capacity - stock)
        throw std::out_of_range("censored_step: invalid stock/order");
    std::vector<double> pmf = config.demand_pmf(t);
    int demand = rng.categorical(pmf);
    int available = stock + order;
    int censored = std::min(demand, available);
    int next = available - censored;
    double pseudo = -config.fixed_cost * (order > 0 ? 1.0 : 0.0) - config.unit_cost * order -
                    config.holding_cost * (available - censored) +
                    config.lost_sales_penalty * censored;
    return {pseudo, next, censored};
}

InventoryModel::InventoryModel(InventoryConfig config) : config_(std::move(config)) {
    validate_inventory(config_);
    std::vector<int> actions(config_.capacity + 1);
    for (int s = 0; s <= config_.capacity; ++s) actions[s] = config_.capacity - s + 1;
    layout_ = ActionLayout(config_.capacity + 1, std::move(actions));
    reward_min_ = -config_.fixed_cost - config_.unit_cost * config_.capacity -
                  config_.holding_cost * config_.capacity;
    reward_max_ = config_.lost_sales_penalty * config_.capacity;
    if (!(reward_max_ > reward_min_))
        throw std::invalid_argument("inventory: degenerate pseudo-reward range");
}

double InventoryModel::mean_pseudo_reward(int t, int s, int a) const {
    std::vector<double> pmf = config_.demand_pmf(t);
    const int available = s + a;
    double holding = 0.0, sales = 0.0;
    for (int x = 0; x <= config_.capacity; ++x) {
        holding += pmf[x] * std::max(0, available - x);
        sales += pmf[x] * std::min(x, available);
    }
    return -config_.fixed_cost * (a > 0 ? 1.0 : 0.0) - config_.unit_cost * a -
           config_.holding_cost * holding + config_.lost_sales_penalty * sales;
}

double InventoryModel::expected_demand(int t) const {
    std::vector<double> pmf = config_.demand_pmf(t);
    double mean = 0.0;
    for (int x = 0; x <= config_.capacity; ++x) mean += pmf[x] * x;
    return mean;
}

double InventoryModel::mean_raw_reward(int t, int s, int a) const {
    return mean_pseudo_reward(t, s, a) - config_.lost_sales_penalty * expected_demand(t);
}

void InventoryModel::transition_row(int t, int s, int a, std::span<double> out) const {
    std::vector<double> pmf = config_.demand_pmf(t);
    const int S = config_.capacity + 1;
    const int available = s + a;
    std::fill(out.begin(), out.end(), 0.0);
    // next stock s' = available - min(available, X): s' = 0 pools X >= available
    for (int x = 0; x <= config_.capacity; ++x) {
        int next = std::max(0, available - x);
        out[next] += pmf[x];
    }
    (void)S;
}

TimeVaryingMdp InventoryModel::pseudo_mdp(bool normalized) const {
    // the generators hold their own copy so the view outlives this model
    auto self = std::make_shared<InventoryModel>(*this);
    TimeVaryingMdp mdp(
        layout_, config_.horizon,
        [self, normalized](int t, int s, int a) {
            double raw = self->mean_pseudo_reward(t, s, a);
            return normalized ? self->normalize(raw) : raw;
        },
        [self](int t, int s, int a, std::span<double> row) { self->transition_row(t, s, a, row); });
    mdp.noise = RewardNoise::deterministic; // realized pseudo-rewards come from the environment
    mdp.nonconforming = !normalized;
    return mdp;
}

TimeVaryingMdp InventoryModel::raw_mdp() const {
    auto self = std::make_shared<InventoryModel>(*this);
    TimeVaryingMdp mdp(
        layout_, config_.horizon,
        [self](int t, int s, int a) { return self->mean_raw_reward(t, s, a); },
        [self](int t, int s, int a, std::span<double> row) { self->transition_row(t, s, a, row); });
    mdp.noise = RewardNoise::deterministic;
    mdp.nonconforming = true; // raw costs are negative
    return mdp;
}

StepOutcome InventoryEnvironment::step(int action, RandomStream& rng) {
    CensoredStep outcome = censored_step(model_->config(), t_, state_, action, rng);
    state_ = outcome.next_stock;
    t_ += 1;
    return {model_->normalize(outcome.pseudo_reward), outcome.next_stock};
}

} // namespace nsmdp
