#include "epigame/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace epigame {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    return os;
}

}  // namespace

void write_manifest(const RunManifest& m, const std::string& path) {
    auto os = open_out(path);
    os << "command " << m.command << "\n";
    os << "scenario " << m.scenario_path << "\n";
    os << "overrides " << (m.overrides.empty() ? "-" : m.overrides) << "\n";
    os << "seed " << m.seed << "\n";
    os << "out_dir " << m.out_dir << "\n";
    os << "version " << m.version << "\n";
    os << "wall_clock " << m.wall_clock << "\n";
}

void write_trajectory_csv(const Trajectory& t, const std::string& sir_path,
                          const std::string& theta_path) {
    auto os = open_out(sir_path);
    os << "t,region,s,i,r\n";
    for (size_t i = 0; i < t.times.size(); ++i)
        for (size_t k = 0; k < t.s[i].size(); ++k)
            os << num(t.times[i]) << ',' << k << ',' << num(t.s[i][k]) << ',' << num(t.i[i][k])
               << ',' << num(t.r[i][k]) << '\n';
    auto ot = open_out(theta_path);
    ot << "n,region,theta\n";
    for (size_t n = 0; n < t.theta.size(); ++n)
        for (size_t k = 0; k < t.theta[n].size(); ++k)
            ot << n << ',' << k << ',' << num(t.theta[n][k]) << '\n';
}

void write_cost_csv(const std::vector<CostBreakdown>& costs, const std::string& path) {
    auto os = open_out(path);
    os << "region,econ,local_repro,global_repro,influence,drift,total\n";
    for (size_t k = 0; k < costs.size(); ++k)
        os << k << ',' << num(costs[k].econ) << ',' << num(costs[k].local_repro) << ','
           << num(costs[k].global_repro) << ',' << num(costs[k].influence) << ','
           << num(costs[k].drift) << ',' << num(costs[k].total) << '\n';
}

void write_actions_csv(const Scenario& scn, const ActionProfile& act, const std::string& path) {
    auto os = open_out(path);
    os << "k,l,n,value\n";
    for (int k = 0; k < scn.K; ++k)
        for (int l = 0; l < scn.K; ++l)
            if (scn.epi_adj(k, l))
                os << k << ',' << l << ",-1," << num(act.U(k, l)) << '\n';
    for (int n = 0; n <= scn.N; ++n)
        for (int k = 0; k < scn.K; ++k)
            for (int l = 0; l < scn.K; ++l)
                if (scn.inf_adj[n](k, l))
                    os << k << ',' << l << ',' << n << ',' << num(act.V[n](k, l)) << '\n';
}

ActionProfile read_actions_csv(const Scenario& scn, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open '" + path + "'", 0);
    ActionProfile act = neutral_actions(scn);
    std::string line;
    int lineno = 0;
    if (!std::getline(is, line)) throw ParseError("empty actions file", 0);
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int k, l, n;
        double val;
        if (!(ss >> k >> l >> n >> val))
            throw ParseError("bad actions row", lineno + 1);
        if (k < 0 || k >= scn.K || l < 0 || l >= scn.K || n < -1 || n > scn.N)
            throw DimensionError("actions row out of range at line " + std::to_string(lineno + 1));
        if (n < 0)
            act.U(k, l) = val;
        else
            act.V[n](k, l) = val;
    }
    return act;
}

void write_trace_csv(const SolveReport& rep, const std::string& path) {
    auto os = open_out(path);
    os << "t,V,kkt_residual\n";
    for (size_t i = 0; i < rep.lyapunov_trace.size(); ++i) {
        os << num(rep.lyapunov_trace[i].first) << ',' << num(rep.lyapunov_trace[i].second) << ',';
        if (i + 1 == rep.lyapunov_trace.size()) os << num(rep.kkt_residual);
        os << '\n';
    }
}

void write_aggregate_csv(const std::vector<AggregateAction>& agg, const std::string& path) {
    auto os = open_out(path);
    os << "region,u_pct,v1_pct\n";
    for (size_t k = 0; k < agg.size(); ++k)
        os << k << ',' << num(agg[k].u_pct) << ',' << num(agg[k].v1_pct) << '\n';
}

void write_poa_csv(const PoAReport& r, const std::string& path) {
    auto os = open_out(path);
    os << "poa_uv,poa_u,poa_v,gne_cost,gne_cost_u_only,gne_cost_v_only,central_cost,"
          "mean_R_gne,mean_R_central,ctrl_cost_gne,ctrl_cost_central,"
          "conv_gne,conv_u,conv_v,conv_central\n";
    os << num(r.poa_uv) << ',' << num(r.poa_u) << ',' << num(r.poa_v) << ',' << num(r.gne_cost)
       << ',' << num(r.gne_cost_u_only) << ',' << num(r.gne_cost_v_only) << ','
       << num(r.central_cost) << ',' << num(r.mean_global_r_gne) << ','
       << num(r.mean_global_r_central) << ',' << num(r.control_cost_gne) << ','
       << num(r.control_cost_central) << ',' << r.converged_gne << ',' << r.converged_u << ','
       << r.converged_v << ',' << r.converged_central << '\n';
}

void write_sweep_csv(const std::vector<std::pair<double, PoAReport>>& rows,
                     const std::string& path) {
    auto os = open_out(path);
    os << "alpha,poa_uv,poa_u,poa_v,mean_R_gne,mean_R_central,ctrl_cost_gne,ctrl_cost_central\n";
    for (const auto& [alpha, r] : rows)
        os << num(alpha) << ',' << num(r.poa_uv) << ',' << num(r.poa_u) << ',' << num(r.poa_v)
           << ',' << num(r.mean_global_r_gne) << ',' << num(r.mean_global_r_central) << ','
           << num(r.control_cost_gne) << ',' << num(r.control_cost_central) << '\n';
}

void write_degree_table_csv(const std::vector<DegreeCell>& cells, const std::string& path) {
    auto os = open_out(path);
    os << "epi_degree,inf_degree,mean_poa,std_poa,n_converged\n";
    for (const auto& c : cells)
        os << c.epi_degree << ',' << c.inf_degree << ',' << num(c.mean_poa) << ','
           << num(c.std_poa) << ',' << c.n_converged << '\n';
}

void write_aux_debug_csv(const Scenario& scn, const AuxPoint& xi, const std::string& path) {
    const AuxSpace sp = aux_space(scn);
    auto os = open_out(path);
    os << "block,index,value\n";
    for (int e = 0; e < sp.ny(); ++e)
        os << "y," << e << ',' << num(xi.xi_y(sp.y_edges[e].first, sp.y_edges[e].second)) << '\n';
    for (int p = 0; p < sp.nw(); ++p) os << "omega," << p << ',' << num(xi.xi_w[p]) << '\n';
    for (int m = 0; m < sp.nl(); ++m) os << "lambda," << m << ',' << num(xi.xi_lambda[m]) << '\n';
    for (int m = 0; m < sp.nl(); ++m)
        for (int l = 0; l < sp.K; ++l)
            os << "x," << m * sp.K + l << ',' << num(xi.xi_x(m, l)) << '\n';
}

}  // namespace epigame
