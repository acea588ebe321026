#pragma once

#include "epigame/scenario.hpp"

namespace epigame {

/// Time-stamped states of the hybrid system. theta carries the whole discrete
/// opinion path theta(0..N+1); the flow between campaign instants holds
/// theta(n) on [t_n, t_{n+1}) and theta(N) on [t_N, T].
struct Trajectory {
    Vec times;
    std::vector<Vec> s, i, r;  // one K-vector per time stamp
    std::vector<Vec> theta;    // N+2 opinion vectors
};

/// Exact opinion recursion theta(n+1) = [V(n) o P(n)] theta(n), n = 0..N.
std::vector<Vec> opinion_path(const Scenario& scn, const std::vector<Mat>& V);

/// Classical fixed-step 4th-order integration of the SIR flow with the
/// discrete opinion updates applied at each campaign instant. States are
/// clamped to [0,1] only within 1e-6; larger excursions throw.
Trajectory simulate(const Scenario& scn, const ActionProfile& act, double dt);

}  // namespace epigame
