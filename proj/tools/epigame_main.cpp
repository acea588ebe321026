// Command-line front end: validates scenarios, simulates the hybrid SIR /
// opinion model, computes equilibria and centralized optima, and emits the
// efficiency sweeps as CSV. Exit codes: 0 success, 1 domain/infeasibility,
// 2 I/O or parse failure, 3 solver non-convergence on a required run.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "epigame/io.hpp"
#include "epigame/version.hpp"

namespace {

using namespace epigame;

constexpr int kExitOk = 0, kExitDomain = 1, kExitParse = 2, kExitNoConverge = 3;

std::string now_iso() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
    return buf;
}

struct Common {
    std::string scenario_path;
    std::string out_dir = ".";
    std::string delta;
    double step = 1e-3, conv_tol = 1e-6, max_time = 2000.0;
    std::uint64_t seed = 0;
    int threads = 1;
};

SolverConfig make_config(const Common& c, const Scenario& scn) {
    SolverConfig cfg;
    cfg.step = c.step;
    cfg.conv_tol = c.conv_tol;
    cfg.max_time = c.max_time;
    if (!c.delta.empty()) {
        std::stringstream ss(c.delta);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.delta_bar.push_back(std::stod(tok));
        if (cfg.delta_bar.size() != static_cast<size_t>(scn.K + 1))
            throw std::invalid_argument("--delta needs K+1 comma-separated weights");
    }
    return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
    return (std::filesystem::path(c.out_dir) / name).string();
}

void emit_manifest(const Common& c, const std::string& command, const std::string& overrides) {
    std::filesystem::create_directories(c.out_dir);
    RunManifest m;
    m.command = command;
    m.scenario_path = c.scenario_path;
    m.overrides = overrides;
    m.seed = c.seed;
    m.out_dir = c.out_dir;
    m.version = kVersion;
    m.wall_clock = now_iso();
    write_manifest(m, out_path(c, command + ".manifest"));
}

Vec parse_grid(const std::string& spec) {
    // "a:b:step" or comma-separated values
    Vec out;
    if (spec.find(':') != std::string::npos) {
        double a, b, h;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &h) != 3 || h <= 0)
            throw std::invalid_argument("bad --alpha-grid, want lo:hi:step");
        for (double x = a; x <= b + 1e-12; x += h) out.push_back(std::min(x, b));
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<int> parse_degrees(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

int require_valid(const Scenario& scn) {
    const auto viol = validate(scn);
    for (const auto& v : viol) std::cerr << v.code << ": " << v.detail << "\n";
    return viol.empty() ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized epidemic management game"};
    app.set_version_flag("--version", epigame::kVersion);
    app.require_subcommand(1);

    Common c;
    std::string actions_path;
    double dt = 0.01;
    bool fix_u0 = false, fix_v1 = false;
    std::string alpha_grid = "0:1:0.1";
    std::string epi_degrees = "0,2,6,10", inf_degrees = "0,2,6,10";
    int trials = 100;

    auto add_common = [&](CLI::App* sub, bool solver_flags) {
        sub->add_option("scenario", c.scenario_path, "scenario file")->required();
        sub->add_option("--out-dir", c.out_dir, "output directory");
        if (solver_flags) {
            sub->add_option("--delta", c.delta, "comma-separated delta weights (K+1)");
            sub->add_option("--step", c.step, "flow step");
            sub->add_option("--conv-tol", c.conv_tol, "terminal |dxi/dt|_inf");
            sub->add_option("--max-time", c.max_time, "flow-time cap");
            sub->add_option("--threads", c.threads, "worker parallelism (default 1)");
            sub->add_option("--seed", c.seed, "random seed");
        }
    };

    auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    add_common(validate_cmd, false);

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate the hybrid dynamics");
    add_common(simulate_cmd, false);
    simulate_cmd->add_option("--actions", actions_path, "actions CSV (k,l,n,value)")->required();
    simulate_cmd->add_option("--dt", dt, "integration step in days");

    auto* gne_cmd = app.add_subcommand("gne", "generalized Nash equilibrium");
    add_common(gne_cmd, true);
    gne_cmd->add_flag("--fix-u0", fix_u0, "freeze epidemic control at zero");
    gne_cmd->add_flag("--fix-v1", fix_v1, "freeze influence control at one");

    auto* central_cmd = app.add_subcommand("central", "centralized sum-cost minimum");
    add_common(central_cmd, true);

    auto* poa_cmd = app.add_subcommand("poa", "price-of-anarchy report");
    add_common(poa_cmd, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "PoA against the alpha weight sweep");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--alpha-grid", alpha_grid, "lo:hi:step or comma list");

    auto* table_cmd = app.add_subcommand("table", "PoA against random graph degrees");
    add_common(table_cmd, true);
    table_cmd->add_option("--epi-degrees", epi_degrees, "comma list");
    table_cmd->add_option("--inf-degrees", inf_degrees, "comma list");
    table_cmd->add_option("--trials", trials, "draws per cell");

    CLI11_PARSE(app, argc, argv);

    try {
        const Scenario scn = epigame::load_scenario(c.scenario_path);

        if (validate_cmd->parsed()) {
            emit_manifest(c, "validate", "");
            return require_valid(scn);
        }

        if (simulate_cmd->parsed()) {
            emit_manifest(c, "simulate", "dt=" + std::to_string(dt));
            if (int rc = require_valid(scn); rc != 0) return rc;
            const ActionProfile act = read_actions_csv(scn, actions_path);
            if (!actions_in_boxes(scn, act)) {
                std::cerr << "actions outside the scenario boxes\n";
                return kExitDomain;
            }
            const Trajectory t = simulate(scn, act, dt);
            write_trajectory_csv(t, out_path(c, "simulate_sir.csv"),
                                 out_path(c, "simulate_theta.csv"));
            write_cost_csv(cost(scn, act), out_path(c, "simulate_costs.csv"));
            return kExitOk;
        }

        const SolverConfig cfg = make_config(c, scn);

        if (gne_cmd->parsed() || central_cmd->parsed()) {
            const bool central = central_cmd->parsed();
            const std::string name = central ? "central" : "gne";
            emit_manifest(c, name,
                          std::string(fix_u0 ? "fix-u0 " : "") + (fix_v1 ? "fix-v1 " : ""));
            if (int rc = require_valid(scn); rc != 0) return rc;
            FixedMask mask{fix_v1, fix_u0};
            const SolveReport rep = central ? solve_central(scn, cfg)
                                            : solve_gne(scn, cfg, &mask);
            write_trace_csv(rep, out_path(c, name + "_trace.csv"));
            write_actions_csv(scn, rep.act_star, out_path(c, name + "_actions.csv"));
            write_cost_csv(cost(scn, rep.act_star), out_path(c, name + "_costs.csv"));
            write_aggregate_csv(aggregate_actions(scn, rep.act_star),
                                out_path(c, name + "_aggregate.csv"));
            write_aux_debug_csv(scn, rep.xi_star, out_path(c, name + "_aux.csv"));
            std::cout << name << ": objective " << rep.objective << ", kkt " << rep.kkt_residual
                      << ", flow time " << rep.flow_time << "\n";
            if (!rep.converged) {
                std::cerr << name << " did not converge within --max-time\n";
                return kExitNoConverge;
            }
            return kExitOk;
        }

        if (poa_cmd->parsed()) {
            emit_manifest(c, "poa", "");
            if (int rc = require_valid(scn); rc != 0) return rc;
            const PoAReport r = compute_poa(scn, cfg);
            write_poa_csv(r, out_path(c, "poa.csv"));
            std::cout << "poa_uv " << r.poa_uv << " poa_u " << r.poa_u << " poa_v " << r.poa_v
                      << "\n";
            if (!(r.converged_gne && r.converged_u && r.converged_v && r.converged_central)) {
                std::cerr << "at least one solve did not converge\n";
                return kExitNoConverge;
            }
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            emit_manifest(c, "sweep", "alpha-grid=" + alpha_grid);
            if (int rc = require_valid(scn); rc != 0) return rc;
            const Vec grid = parse_grid(alpha_grid);
            const auto rows = alpha_sweep(scn, grid, cfg, c.threads);
            write_sweep_csv(rows, out_path(c, "sweep.csv"));
            bool all = true;
            for (const auto& [a, r] : rows)
                all = all && r.converged_gne && r.converged_central && r.converged_u &&
                      r.converged_v;
            if (!all) {
                std::cerr << "some sweep points did not converge (flags in CSV)\n";
                return kExitNoConverge;
            }
            return kExitOk;
        }

        if (table_cmd->parsed()) {
            emit_manifest(c, "table",
                          "trials=" + std::to_string(trials) + " epi=" + epi_degrees +
                              " inf=" + inf_degrees);
            if (int rc = require_valid(scn); rc != 0) return rc;
            const auto cells = degree_table(scn, parse_degrees(epi_degrees),
                                            parse_degrees(inf_degrees), trials, c.seed, cfg,
                                            c.threads);
            write_degree_table_csv(cells, out_path(c, "table.csv"));
            return kExitOk;
        }
    } catch (const epigame::ParseError& e) {
        std::cerr << "parse error: " << e.what()
                  << (e.line > 0 ? " (line " + std::to_string(e.line) + ")" : "") << "\n";
        return kExitParse;
    } catch (const epigame::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitOk;
}
