#pragma once

#include "epigame/solvers.hpp"

namespace epigame {

struct PoAReport {
    double poa_uv = 0.0, poa_u = 0.0, poa_v = 0.0;
    double gne_cost = 0.0, gne_cost_u_only = 0.0, gne_cost_v_only = 0.0, central_cost = 0.0;
    double mean_global_r_gne = 0.0, mean_global_r_central = 0.0;  // sum_{n<=N} rho / (N+1)
    double control_cost_gne = 0.0, control_cost_central = 0.0;    // unweighted log control cost
    bool converged_gne = false, converged_u = false, converged_v = false, converged_central = false;
    SolveReport gne, gne_u_only, gne_v_only, central;
};

/// One centralized solve plus the free / no-influence / no-epidemic-control
/// equilibria, assembled into the three Price-of-Anarchy ratios.
PoAReport compute_poa(const Scenario& scn, const SolverConfig& cfg);

/// Rebuilds weights a = c = 1-alpha, b_global = 10*alpha (b_local = d = 0)
/// with the uniform influence matrix P = 1/K, and computes PoA per point.
std::vector<std::pair<double, PoAReport>> alpha_sweep(const Scenario& base, const Vec& alphas,
                                                      const SolverConfig& cfg, int threads = 1);

struct DegreeCell {
    int epi_degree = 0, inf_degree = 0;
    double mean_poa = 0.0, std_poa = 0.0;
    int n_converged = 0, n_total = 0;
};

/// Random-graph sweep with a = c = 1, b_global = 10: `trials` draws per
/// (epi_degree, inf_degree) cell, averaging poa_uv over converged draws.
/// Deterministic in seed at any thread count.
std::vector<DegreeCell> degree_table(const Scenario& base, const std::vector<int>& epi_degrees,
                                     const std::vector<int>& inf_degrees, int trials,
                                     std::uint64_t seed, const SolverConfig& cfg,
                                     int threads = 1);

struct AggregateAction {
    double u_pct = 0.0;   // (100/K) sum_l u/beta0, floor edges excluded
    double v1_pct = 0.0;  // (100/K) sum_l (1 - v(t_1))
};

std::vector<AggregateAction> aggregate_actions(const Scenario& scn, const ActionProfile& act);

/// Weight override used by the alpha sweep and the degree table.
Scenario with_weights(const Scenario& base, double a, double c, double b_global);

}  // namespace epigame
