#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsmdp/envs.hpp"
#include "nsmdp/sliding_stats.hpp"
#include "test_support.hpp"

using namespace nsmdp;

TEST_CASE("window arithmetic: entries evicted strictly by time") {
    WindowBuffer buffer(2, ActionLayout::uniform(2, 1));
    buffer.record(1, 0, 0, 0.5, 1);
    buffer.record(2, 1, 0, 0.25, 0);
    const Counts& counts = buffer.snapshot(3); // window [1,2]
    CHECK(counts.n[0] == 1);
    CHECK(counts.n[1] == 1);
    buffer.record(3, 0, 0, 0.75, 1);
    const Counts& later = buffer.snapshot(4); // window [2,3], t=1 evicted
    CHECK(later.n[0] == 1);
    CHECK(later.reward_sum[0] == 0.75);
    CHECK(later.n[1] == 1);
    // non-monotone records and same-time queries violate the contract
    CHECK_THROWS_AS(buffer.record(3, 0, 0, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(buffer.snapshot(3), std::invalid_argument);
}

TEST_CASE("empty buffer: zero counts, N+ floor of one") {
    WindowBuffer buffer(5, ActionLayout::uniform(2, 2));
    const Counts& counts = buffer.snapshot(1);
    for (int pair = 0; pair < 4; ++pair) {
        CHECK(counts.n[pair] == 0);
        CHECK(counts.n_plus(pair) == 1);
        CHECK(counts.reward_mean(pair) == 0.0);
    }
}

TEST_CASE("peril trajectory: window count of (1,a1) is tau+1") {
    for (int tau : {5, 25}) {
        PerilReport report = run_peril({tau});
        CHECK(report.counts.n[0] == tau + 1);          // (state 1, a1)
        CHECK(report.counts.n[1] == tau - 1);          // (state 1, a2)
        CHECK(report.counts.n[2] == tau + 1);          // (state 2, b1)
        CHECK(report.counts.n[3] == tau - 1);          // (state 2, b2)
    }
}

TEST_CASE("region radii: worked example and scaling laws") {
    // N+ = 1, S = 2, A = 2, T = 100, delta = 0.01
    WindowBuffer buffer(10, ActionLayout::uniform(2, 2));
    ConfidenceRegionSet regions = build_regions(buffer, 1, 0.01, 0.0, 100);
    const double expected = 2.0 * std::sqrt(2.0 * std::log(40000.0));
    CHECK(regions.reward_radius[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(regions.reward_radius[0] == doctest::Approx(9.20722965).epsilon(1e-8));
    // interval clips to [0,1]
    Regions evi_regions = regions.to_regions(true);
    CHECK(evi_regions.reward_lo[0] == 0.0);
    CHECK(evi_regions.reward_hi[0] == 1.0);
    CHECK(evi_regions.empty_center[0] == 1);

    // quadrupling N+ halves both radii
    WindowBuffer filled(64, ActionLayout::uniform(2, 2));
    int t = 1;
    for (int k = 0; k < 4; ++k) filled.record(t++, 0, 0, 0.5, 1);
    ConfidenceRegionSet four = build_regions(filled, t, 0.01, 0.0, 100);
    for (int k = 0; k < 12; ++k) filled.record(t++, 0, 0, 0.5, 1);
    ConfidenceRegionSet sixteen = build_regions(filled, t, 0.01, 0.0, 100);
    CHECK(four.reward_radius[0] == doctest::Approx(2.0 * sixteen.reward_radius[0]).epsilon(1e-12));
    CHECK(four.p_radius[0] == doctest::Approx(2.0 * sixteen.p_radius[0]).epsilon(1e-12));

    // widening adds exactly eta to every transition budget
    ConfidenceRegionSet widened = build_regions(filled, t, 0.01, 0.05, 100);
    Regions plain = build_regions(filled, t, 0.01, 0.0, 100).to_regions();
    Regions wide = widened.to_regions();
    for (int pair = 0; pair < 4; ++pair)
        CHECK(wide.p_budget[pair] == doctest::Approx(plain.p_budget[pair] + 0.05).epsilon(1e-15));
}

TEST_CASE("membership monotonicity in the widening parameter") {
    RandomStream rng(3);
    WindowBuffer buffer(100, ActionLayout::uniform(2, 2));
    for (int t = 1; t <= 50; ++t)
        buffer.record(t, static_cast<int>(rng.uniform() * 2), static_cast<int>(rng.uniform() * 2),
                      rng.uniform(), static_cast<int>(rng.uniform() * 2));
    ConfidenceRegionSet small = build_regions(buffer, 51, 0.05, 0.02, 200);
    ConfidenceRegionSet large = build_regions(buffer, 51, 0.05, 0.10, 200);
    // any member of the smaller ball is a member of the larger one
    for (int trial = 0; trial < 200; ++trial) {
        int pair = static_cast<int>(rng.uniform() * 4);
        std::vector<double> q = testsupport::random_distribution(rng, 2);
        double dist = 0.0;
        for (int sp = 0; sp < 2; ++sp) dist += std::abs(q[sp] - small.p_center[pair * 2 + sp]);
        bool in_small = dist <= small.p_radius[pair] + small.eta;
        bool in_large = dist <= large.p_radius[pair] + large.eta;
        if (in_small) CHECK(in_large);
    }
}

TEST_CASE("window restart equivalence: incremental counts equal a rebuild") {
    RandomStream rng(8);
    const int W = 17;
    ActionLayout layout = ActionLayout::uniform(3, 2);
    WindowBuffer incremental(W, layout);
    std::vector<std::tuple<int, int, int, double, int>> log;
    for (int t = 1; t <= 120; ++t) {
        int s = static_cast<int>(rng.uniform() * 3);
        int a = static_cast<int>(rng.uniform() * 2);
        int next = static_cast<int>(rng.uniform() * 3);
        double reward = rng.uniform();
        incremental.record(t, s, a, reward, next);
        log.emplace_back(t, s, a, reward, next);
        int query_t = t + 1;
        const Counts& inc = incremental.snapshot(query_t);
        WindowBuffer rebuilt(W, layout);
        for (const auto& [lt, ls, la, lr, ln] : log)
            if (lt >= query_t - W && lt <= query_t - 1) rebuilt.record(lt, ls, la, lr, ln);
        const Counts& scratch = rebuilt.snapshot(query_t);
        REQUIRE(inc.n == scratch.n);
        REQUIRE(inc.next_counts == scratch.next_counts);
        for (int pair = 0; pair < layout.total_pairs(); ++pair)
            REQUIRE(inc.reward_sum[pair] == doctest::Approx(scratch.reward_sum[pair]).epsilon(1e-12));
    }
}

TEST_CASE("coverage: window means stay inside the un-widened regions") {
    // stationary 3-state instance, stochastic rewards, uniform behavior policy
    const int S = 3, A = 2, W = 50, T = 200;
    const double delta = 0.1;
    RandomStream rng(123);
    MdpSlice slice = testsupport::random_dense_slice(rng, S, std::vector<int>(S, A));
    TimeVaryingMdp mdp = TimeVaryingMdp::stationary(slice.layout, T, slice.rewards, slice.transitions);
    mdp.noise = RewardNoise::truncated_gaussian;
    mdp.noise_sigma = 0.3;

    long events = 0, misses = 0;
    for (int run = 0; run < 30; ++run) {
        RandomStream run_rng(1000 + run);
        WindowBuffer buffer(W, slice.layout);
        int state = 0;
        for (int t = 1; t <= T; ++t) {
            ConfidenceRegionSet regions = build_regions(buffer, t, delta, 0.0, T);
            for (int s = 0; s < S; ++s) {
                for (int a = 0; a < A; ++a) {
                    int pair = slice.layout.pair(s, a);
                    // stationary instance: the window means are the slice values
                    events += 1;
                    if (std::abs(regions.reward_center[pair] - slice.reward(s, a)) >
                            regions.reward_radius[pair] &&
                        regions.n[pair] > 0)
                        misses += 1;
                    double dist = 0.0;
                    for (int sp = 0; sp < S; ++sp)
                        dist += std::abs(regions.p_center[pair * S + sp] -
                                         slice.transitions[pair * S + sp]);
                    if (regions.n[pair] > 0 && dist > regions.p_radius[pair]) misses += 1;
                }
            }
            int action = static_cast<int>(run_rng.uniform() * A);
            StepOutcome out = step(mdp, t, state, action, run_rng);
            buffer.record(t, state, action, out.reward, out.next_state);
            state = out.next_state;
        }
    }
    CHECK(misses <= static_cast<long>(delta * events));
}
