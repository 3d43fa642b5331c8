#pragma once

// Independent oracles used by the tests: deterministic-policy enumeration for
// the optimal gain, lattice and vertex-enumeration maximizers for the inner
// transition optimization, and small helpers. These deliberately share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nsmdp/mdp.hpp"
#include "nsmdp/rng.hpp"

namespace testsupport {

// partial-pivot Gaussian elimination, small dense systems only
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-13) throw std::runtime_error("solve_linear: singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int row = col + 1; row < n; ++row) {
            double f = a[row][col] / a[col][col];
            for (int k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int row = n - 1; row >= 0; --row) {
        double acc = b[row];
        for (int k = row + 1; k < n; ++k) acc -= a[row][k] * x[k];
        x[row] = acc / a[row][row];
    }
    return x;
}

// stationary distribution of an irreducible row-stochastic matrix restricted
// to the states in `members`
inline std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& p,
                                                   const std::vector<int>& members) {
    const int n = static_cast<int>(members.size());
    // (P^T - I) mu = 0 with the last equation replaced by sum mu = 1
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = p[members[j]][members[i]] - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) a[n - 1][j] = 1.0;
    b[n - 1] = 1.0;
    return solve_linear(std::move(a), std::move(b));
}

// Optimal gain of one slice by brute force over all deterministic stationary
// policies: per policy, find the closed communicating classes of its chain
// and take the best per-class stationary-distribution gain. Equals the LP
// optimum for communicating slices.
inline double enumeration_gain(const nsmdp::MdpSlice& slice) {
    const int S = slice.num_states();
    std::vector<int> policy(S, 0);
    double best = -std::numeric_limits<double>::infinity();
    for (;;) {
        std::vector<std::vector<double>> p(S, std::vector<double>(S));
        for (int s = 0; s < S; ++s) {
            auto row = slice.row(s, policy[s]);
            for (int sp = 0; sp < S; ++sp) p[s][sp] = row[sp];
        }
        // boolean reachability closure
        std::vector<std::vector<char>> reach(S, std::vector<char>(S, 0));
        for (int s = 0; s < S; ++s) {
            reach[s][s] = 1;
            for (int sp = 0; sp < S; ++sp)
                if (p[s][sp] > 1e-15) reach[s][sp] = 1;
        }
        for (int k = 0; k < S; ++k)
            for (int i = 0; i < S; ++i)
                for (int j = 0; j < S; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
        std::vector<char> seen(S, 0);
        for (int s = 0; s < S; ++s) {
            if (seen[s]) continue;
            std::vector<int> members;
            for (int sp = 0; sp < S; ++sp)
                if (reach[s][sp] && reach[sp][s]) members.push_back(sp);
            for (int m : members) seen[m] = 1;
            bool closed = true;
            for (int m : members)
                for (int sp = 0; sp < S && closed; ++sp)
                    if (p[m][sp] > 1e-15 && !(reach[s][sp] && reach[sp][s])) closed = false;
            if (!closed) continue;
            std::vector<double> mu = stationary_distribution(p, members);
            double gain = 0.0;
            for (std::size_t i = 0; i < members.size(); ++i)
                gain += mu[i] * slice.reward(members[i], policy[members[i]]);
            best = std::max(best, gain);
        }
        // next policy in lexicographic order
        int s = 0;
        while (s < S) {
            policy[s] += 1;
            if (policy[s] < slice.layout.actions_per_state[s]) break;
            policy[s] = 0;
            s += 1;
        }
        if (s == S) break;
    }
    return best;
}

// exhaustive lattice search over {p : p_i = k_i * resolution, p in simplex,
// ||p - center||_1 <= budget}; returns the best objective value
inline double grid_inner_max(const std::vector<double>& u, const std::vector<double>& center,
                             double budget, double resolution = 1e-3) {
    const int S = static_cast<int>(u.size());
    const long D = std::lround(1.0 / resolution);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<long> ks(S, 0);
    // depth-first over coordinates with L1 pruning
    auto recurse = [&](auto&& self, int coord, long remaining, double dist) -> void {
        if (dist > budget + 1e-9) return;
        if (coord == S - 1) {
            double p_last = static_cast<double>(remaining) / D;
            double total = dist + std::abs(p_last - center[coord]);
            if (total > budget + 1e-9) return;
            double obj = u[coord] * p_last;
            for (int i = 0; i < S - 1; ++i) obj += u[i] * (static_cast<double>(ks[i]) / D);
            best = std::max(best, obj);
            return;
        }
        for (long k = 0; k <= remaining; ++k) {
            ks[coord] = k;
            double p = static_cast<double>(k) / D;
            self(self, coord + 1, remaining - k, dist + std::abs(p - center[coord]));
        }
    };
    recurse(recurse, 0, D, 0.0);
    return best;
}

// exact LP optimum by vertex enumeration of simplex intersect L1 ball: every
// vertex has at most two coordinates that sit strictly between 0 and the
// center value, so enumerate zero-sets x fractional pairs x sign patterns
inline double vertex_inner_max(const std::vector<double>& u, const std::vector<double>& center,
                               double budget) {
    const int S = static_cast<int>(u.size());
    constexpr double kTol = 1e-9;
    double best = -std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& p) {
        double sum = 0.0, dist = 0.0, obj = 0.0;
        for (int i = 0; i < S; ++i) {
            if (p[i] < -kTol || p[i] > 1.0 + kTol) return;
            sum += p[i];
            dist += std::abs(p[i] - center[i]);
            obj += u[i] * p[i];
        }
        if (std::abs(sum - 1.0) > kTol || dist > budget + kTol) return;
        best = std::max(best, obj);
    };

    consider(center);
    for (int j = 0; j < S; ++j) {
        std::vector<double> p(S, 0.0);
        p[j] = 1.0;
        consider(p);
    }
    for (int mask = 0; mask < (1 << S); ++mask) {
        double freed = 0.0;
        for (int i = 0; i < S; ++i)
            if (mask & (1 << i)) freed += center[i];
        // one fractional coordinate
        for (int i = 0; i < S; ++i) {
            if (mask & (1 << i)) continue;
            std::vector<double> p(center);
            for (int k = 0; k < S; ++k)
                if (mask & (1 << k)) p[k] = 0.0;
            p[i] = center[i] + freed;
            consider(p);
        }
        // two fractional coordinates with the ball tight
        for (int i = 0; i < S; ++i) {
            if (mask & (1 << i)) continue;
            for (int j = 0; j < S; ++j) {
                if (j == i || (mask & (1 << j))) continue;
                // x_i >= 0, x_j <= 0, x_i + x_j = freed, x_i - x_j = budget - freed
                double xi = (budget) / 2.0; // (freed + budget - freed) / 2
                double xj = freed - xi;
                std::vector<double> p(center);
                for (int k = 0; k < S; ++k)
                    if (mask & (1 << k)) p[k] = 0.0;
                p[i] = center[i] + xi;
                p[j] = center[j] + xj;
                if (xi >= -kTol && xj <= kTol) consider(p);
            }
        }
    }
    return best;
}

inline std::vector<double> random_distribution(nsmdp::RandomStream& rng, int S) {
    std::vector<double> p(S);
    double z = 0.0;
    for (int i = 0; i < S; ++i) {
        p[i] = -std::log(1.0 - rng.uniform() + 1e-12);
        z += p[i];
    }
    for (int i = 0; i < S; ++i) p[i] /= z;
    return p;
}

// random dense slice: every transition entry positive, so every policy chain
// is irreducible and the slice is communicating
inline nsmdp::MdpSlice random_dense_slice(nsmdp::RandomStream& rng, int S,
                                          const std::vector<int>& actions) {
    nsmdp::MdpSlice slice;
    slice.layout = nsmdp::ActionLayout(S, actions);
    slice.rewards.resize(slice.layout.total_pairs());
    slice.transitions.resize(static_cast<std::size_t>(slice.layout.total_pairs()) * S);
    for (int pair = 0; pair < slice.layout.total_pairs(); ++pair) {
        slice.rewards[pair] = rng.uniform();
        std::vector<double> row = random_distribution(rng, S);
        for (int sp = 0; sp < S; ++sp) slice.transitions[pair * S + sp] = row[sp];
    }
    return slice;
}

} // namespace testsupport
