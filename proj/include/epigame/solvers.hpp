#pragma once

#include <optional>

#include "epigame/auxgame.hpp"
#include "epigame/game.hpp"

namespace epigame {

struct SolverConfig {
    /// Player weights for the normalized equilibrium. Empty means the
    /// defaults (1/b_global_1, ..., 1/b_global_K, 1), which make the shared
    /// multipliers reproduce each region's spectral-radius weight.
    Vec delta_bar;
    double step = 1e-3;        // initial flow step
    double step_max = 2.0;     // adaptive cap
    double active_tol = 1e-6;  // rows with h > -active_tol get multipliers
    double conv_tol = 1e-5;    // terminal |dxi/dt|_inf
    double max_time = 4000.0;  // flow-time cap
    double ridge = 1e-10;      // regularization of the multiplier system
    int trace_stride = 16;     // Lyapunov trace decimation
};

/// Coordinates to hold at their restricted-game values during the flow.
struct FixedMask {
    bool v_at_one = false;   // all xi_omega frozen at 0 (v == 1)
    bool u_at_zero = false;  // all xi_y frozen at log(beta0 - u_min)
};

struct SolveReport {
    AuxPoint xi_star;
    ActionProfile act_star;
    bool converged = false;
    double flow_time = 0.0;
    int steps = 0;
    std::vector<std::pair<double, double>> lyapunov_trace;  // (t, V)
    int lyapunov_violations = 0;   // accepted steps with dV > 1e-8
    double max_violation = 0.0;    // max over the trajectory of max_j h_j
    double grad_norm = 0.0;        // final |dxi/dt|_inf
    double mu_max = 0.0;           // largest multiplier seen (should stay <= 0)
    double kkt_residual = 0.0;
    std::vector<int> active_rows;  // final active coupled rows
    std::vector<std::string> active_labels;
    double objective = 0.0;  // sum cost at act_star
};

/// Projected pseudo-gradient flow over the auxiliary game; converges to the
/// normalized equilibrium for the configured delta_bar. `fixed` freezes
/// coordinates for the restricted price-of-anarchy games.
SolveReport solve_gne(const Scenario& scn, const SolverConfig& cfg,
                      const FixedMask* fixed = nullptr);

/// Same flow applied to the single summed objective
/// sum_k J~_k + (sum_k b_global_k) J~_{K+1}; returns the sum-cost minimizer.
SolveReport solve_central(const Scenario& scn, const SolverConfig& cfg);

/// Max of primal feasibility, complementary slackness and per-player
/// stationarity defect at xi, with multipliers fitted by sign-constrained
/// least squares. Zero at an exact normalized equilibrium.
double kkt_residual(const Scenario& scn, const AuxPoint& xi, const Vec& delta_bar);

/// Iterated best response on a uniform grid of each player's box; K <= 2 and
/// N <= 1 only. Returns nullopt when best responses cycle.
std::optional<ActionProfile> brute_force_gne(const Scenario& scn, int grid_points);

/// Exhaustive grid minimization of the sum cost over the joint action grid;
/// same size limits as brute_force_gne.
ActionProfile brute_force_central(const Scenario& scn, int grid_points);

}  // namespace epigame
