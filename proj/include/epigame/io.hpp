#pragma once

#include <string>

#include "epigame/auxgame.hpp"
#include "epigame/dynamics.hpp"
#include "epigame/efficiency.hpp"
#include "epigame/game.hpp"

namespace epigame {

/// Every CLI run writes its manifest first; output files share the stem.
struct RunManifest {
    std::string command;
    std::string scenario_path;
    std::string overrides;  // flattened flag overrides
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string version;
    std::string wall_clock;  // ISO start time
};

void write_manifest(const RunManifest& m, const std::string& path);

void write_trajectory_csv(const Trajectory& t, const std::string& sir_path,
                          const std::string& theta_path);
void write_cost_csv(const std::vector<CostBreakdown>& costs, const std::string& path);

/// Layout `k,l,n,value` with n = -1 for U entries; only graph edges appear.
void write_actions_csv(const Scenario& scn, const ActionProfile& act, const std::string& path);
ActionProfile read_actions_csv(const Scenario& scn, const std::string& path);

void write_trace_csv(const SolveReport& rep, const std::string& path);
void write_aggregate_csv(const std::vector<AggregateAction>& agg, const std::string& path);
void write_poa_csv(const PoAReport& r, const std::string& path);
void write_sweep_csv(const std::vector<std::pair<double, PoAReport>>& rows,
                     const std::string& path);
void write_degree_table_csv(const std::vector<DegreeCell>& cells, const std::string& path);
void write_aux_debug_csv(const Scenario& scn, const AuxPoint& xi, const std::string& path);

}  // namespace epigame
