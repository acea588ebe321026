#pragma once

#include "epigame/scenario.hpp"

namespace epigame {

/// Residual value standing in for an unbounded budget; large negative so it
/// never enters an active set.
inline constexpr double kUnboundedResidual = -1e30;

struct CostBreakdown {
    double econ = 0.0;          // a_k log term
    double local_repro = 0.0;   // b_local term
    double global_repro = 0.0;  // b_global spectral-radius term
    double influence = 0.0;     // c_k log term
    double drift = 0.0;         // d_k term
    double total = 0.0;
};

/// Per-region costs J_k. Throws std::domain_error when u_{kl} >= beta0_{kl}
/// on an edge or v <= 0 (outside the logarithm domains).
std::vector<CostBreakdown> cost(const Scenario& scn, const ActionProfile& act);

double sum_cost(const Scenario& scn, const ActionProfile& act);

struct LabeledResidual {
    std::string label;
    double value;  // <= 0 means satisfied
};

/// All constraint residuals of the coupled sets, in fixed order: epidemic
/// budgets (per k), influence budgets (per k,n), local reproduction caps
/// (per k,m), opinion caps (per k,m), then the action-box residuals.
/// Unbounded budgets report kUnboundedResidual.
std::vector<LabeledResidual> constraint_residuals(const Scenario& scn, const ActionProfile& act);

}  // namespace epigame
