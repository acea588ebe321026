#pragma once

#include <cmath>
#include <random>
#include <string>

#include "epigame/scenario.hpp"

namespace epigame::test {

inline std::string data_path(const std::string& name) {
    return std::string(EPIGAME_DATA_DIR) + "/" + name;
}

/// Spectral radius by repeated squaring of the normalized matrix (Gelfand),
/// deliberately independent of the power-iteration implementation.
inline double rho_squaring_oracle(Mat m) {
    const int n = m.rows();
    double log_rho = 0.0;
    double weight = 1.0;
    for (int it = 0; it < 48; ++it) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += std::fabs(m(i, j));
            norm = std::max(norm, row);
        }
        if (norm == 0.0) return 0.0;
        log_rho += weight * std::log(norm);
        Mat s(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += m(i, k) * m(k, j);
                s(i, j) = acc / (norm * norm);
            }
        m = s;
        weight /= 2.0;
    }
    return std::exp(log_rho);
}

/// Small dense random scenario: fully connected graphs, positive matrices,
/// interior-friendly boxes, unbounded budgets. Deterministic in seed.
inline Scenario random_dense_scenario(int K, int N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Scenario s;
    s.K = K;
    s.N = N;
    s.horizon_days = 10.0 * (N + 1);
    for (int n = 0; n <= N; ++n) s.campaign_times.push_back(10.0 * n);
    s.B0 = Mat(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l)
            s.B0(k, l) = (k == l ? 0.4 + 0.6 * U(rng) : 0.02 + 0.2 * U(rng));
    s.Bhat = Mat(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) s.Bhat(k, l) = 0.5 * s.B0(k, l);
    s.gamma.assign(K, 0.0);
    for (int k = 0; k < K; ++k) s.gamma[k] = 0.15 + 0.15 * U(rng);
    s.epi_adj = Adj::full(K);
    for (int n = 0; n <= N; ++n) {
        s.inf_adj.push_back(Adj::full(K));
        Mat p(K, K);
        for (int k = 0; k < K; ++k) {
            double row = 0.0;
            Vec w(K);
            for (int l = 0; l < K; ++l) {
                w[l] = 0.2 + U(rng) + (k == l ? 1.0 : 0.0);
                row += w[l];
            }
            for (int l = 0; l < K; ++l) p(k, l) = w[l] / row;
        }
        s.P.push_back(p);
    }
    s.u_min = Mat(K, K, 0.0);
    s.u_max = Mat(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) s.u_max(k, l) = 0.95 * s.B0(k, l);
    s.v_min = Mat(K, K, 0.05);
    s.v_max = Mat(K, K, 1.0);
    s.weights.a.assign(K, 0.0);
    s.weights.b_local.assign(K, 0.0);
    s.weights.b_global.assign(K, 0.0);
    s.weights.c.assign(K, 0.0);
    s.weights.d.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        s.weights.a[k] = 0.05 + 0.4 * U(rng);
        s.weights.b_local[k] = 0.05 + 0.3 * U(rng);
        s.weights.b_global[k] = 1.0 + 6.0 * U(rng);
        s.weights.c[k] = 0.05 + 0.3 * U(rng);
        s.weights.d[k] = 0.02 + 0.2 * U(rng);
    }
    s.budgets.phi.assign(K, kUnbounded);
    s.budgets.psi_hat = Mat(K, N + 1, kUnbounded);
    s.budgets.r_max.assign(K, kUnbounded);
    s.budgets.theta_max.assign(K, kUnbounded);
    s.i0.assign(K, 0.0);
    s.s0.assign(K, 0.0);
    s.r0.assign(K, 0.0);
    s.theta0.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        s.i0[k] = 0.005 + 0.03 * U(rng);
        s.s0[k] = 1.0 - s.i0[k];
        s.theta0[k] = 0.15 + 0.7 * U(rng);
    }
    return s;
}

/// Random interior action profile for a scenario, deterministic in seed.
inline ActionProfile random_interior_actions(const Scenario& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.1, 0.9);
    ActionProfile act;
    act.U = Mat(s.K, s.K, 0.0);
    for (int k = 0; k < s.K; ++k)
        for (int l = 0; l < s.K; ++l)
            if (s.epi_adj(k, l) && s.B0(k, l) > 0.0)
                act.U(k, l) = s.u_min(k, l) + U(rng) * (s.u_max(k, l) - s.u_min(k, l));
    for (int n = 0; n <= s.N; ++n) {
        Mat v(s.K, s.K, 0.0);
        for (int k = 0; k < s.K; ++k)
            for (int l = 0; l < s.K; ++l)
                if (s.inf_adj[n](k, l))
                    v(k, l) = s.v_min(k, l) + U(rng) * (s.v_max(k, l) - s.v_min(k, l));
        act.V.push_back(v);
    }
    return act;
}

/// Tiny K<=2 instance with diagonal-only controls over a dense 2x2 coupling;
/// strict diagonal convexity (b_local, d > 0) keeps the equilibrium unique.
inline Scenario tiny_game(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int K = 2;
    Scenario s;
    s.K = K;
    s.N = 0;
    s.horizon_days = 20;
    s.campaign_times = {0.0};
    s.B0 = Mat(K, K, 0.0);
    s.B0(0, 0) = 0.3 + 0.7 * U(rng);
    s.B0(1, 1) = 0.3 + 0.7 * U(rng);
    s.B0(0, 1) = (0.2 + 0.3 * U(rng)) * s.B0(0, 0);
    s.B0(1, 0) = (0.2 + 0.3 * U(rng)) * s.B0(1, 1);
    s.Bhat = Mat(K, K, 0.0);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) s.Bhat(k, l) = 0.5 * s.B0(k, l);
    s.gamma = {0.15 + 0.1 * U(rng), 0.15 + 0.1 * U(rng)};
    s.epi_adj = Adj::full(K);
    s.inf_adj = {Adj::full(K)};
    const double p0 = 0.55 + 0.35 * U(rng), p1 = 0.55 + 0.35 * U(rng);
    s.P = {Mat(K, K)};
    s.P[0](0, 0) = p0;
    s.P[0](0, 1) = 1 - p0;
    s.P[0](1, 0) = 1 - p1;
    s.P[0](1, 1) = p1;
    s.u_min = Mat(K, K, 0.0);
    s.u_max = Mat(K, K, 0.0);
    for (int k = 0; k < K; ++k) s.u_max(k, k) = 0.95 * s.B0(k, k);
    s.v_min = Mat(K, K, 1.0);
    s.v_max = Mat(K, K, 1.0);
    for (int k = 0; k < K; ++k) s.v_min(k, k) = 0.1;
    s.weights.a = {0.05 + 0.3 * U(rng), 0.05 + 0.3 * U(rng)};
    s.weights.b_local = {0.05 + 0.25 * U(rng), 0.05 + 0.25 * U(rng)};
    s.weights.b_global = {2.0 + 6.0 * U(rng), 2.0 + 6.0 * U(rng)};
    s.weights.c = {0.02 + 0.2 * U(rng), 0.02 + 0.2 * U(rng)};
    s.weights.d = {0.02 + 0.2 * U(rng), 0.02 + 0.2 * U(rng)};
    s.budgets.phi = {kUnbounded, kUnbounded};
    s.budgets.psi_hat = Mat(K, 1, kUnbounded);
    s.budgets.r_max = {kUnbounded, kUnbounded};
    s.budgets.theta_max = {kUnbounded, kUnbounded};
    s.i0 = {0.02, 0.05};
    s.r0 = {0, 0};
    s.s0 = {0.98, 0.95};
    s.theta0 = {0.3 + 0.6 * U(rng), 0.3 + 0.6 * U(rng)};
    return s;
}

}  // namespace epigame::test
