#include "epigame/efficiency.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "epigame/dynamics.hpp"
#include "epigame/spectral.hpp"

namespace epigame {

namespace {

double mean_global_r(const Scenario& s, const ActionProfile& act) {
    const std::vector<Vec> th = opinion_path(s, act.V);
    double acc = 0.0;
    for (int m = 0; m <= s.N; ++m) {
        Mat mat(s.K, s.K);
        for (int k = 0; k < s.K; ++k)
            for (int l = 0; l < s.K; ++l)
                mat(k, l) = (s.B0(k, l) - act.U(k, l) + th[m][k] * s.Bhat(k, l)) / s.gamma[k];
        acc += perron(mat).rho;
    }
    return acc / (s.N + 1);
}

double log_control_cost(const Scenario& s, const ActionProfile& act) {
    double acc = 0.0;
    for (int k = 0; k < s.K; ++k) {
        for (int l = 0; l < s.K; ++l)
            if (s.epi_adj(k, l) && s.B0(k, l) > 0.0)
                acc += -std::log((s.B0(k, l) - act.U(k, l)) / s.B0(k, l));
        for (int n = 0; n <= s.N; ++n)
            for (int l = 0; l < s.K; ++l)
                if (s.inf_adj[n](k, l)) acc += -std::log(act.V[n](k, l));
    }
    return acc;
}

template <class Job>
void run_jobs(int threads, int count, Job&& job) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int nt = std::min(threads, count);
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                job(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace

PoAReport compute_poa(const Scenario& scn, const SolverConfig& cfg) {
    PoAReport r;
    r.central = solve_central(scn, cfg);
    r.gne = solve_gne(scn, cfg);
    FixedMask no_v{true, false}, no_u{false, true};
    r.gne_u_only = solve_gne(scn, cfg, &no_v);
    r.gne_v_only = solve_gne(scn, cfg, &no_u);

    r.central_cost = r.central.objective;
    r.gne_cost = r.gne.objective;
    r.gne_cost_u_only = r.gne_u_only.objective;
    r.gne_cost_v_only = r.gne_v_only.objective;
    r.poa_uv = r.gne_cost / r.central_cost;
    r.poa_u = r.gne_cost_u_only / r.central_cost;
    r.poa_v = r.gne_cost_v_only / r.central_cost;
    r.converged_central = r.central.converged;
    r.converged_gne = r.gne.converged;
    r.converged_u = r.gne_u_only.converged;
    r.converged_v = r.gne_v_only.converged;
    r.mean_global_r_gne = mean_global_r(scn, r.gne.act_star);
    r.mean_global_r_central = mean_global_r(scn, r.central.act_star);
    r.control_cost_gne = log_control_cost(scn, r.gne.act_star);
    r.control_cost_central = log_control_cost(scn, r.central.act_star);
    return r;
}

Scenario with_weights(const Scenario& base, double a, double c, double b_global) {
    Scenario s = base;
    for (int k = 0; k < s.K; ++k) {
        s.weights.a[k] = a;
        s.weights.c[k] = c;
        s.weights.b_global[k] = b_global;
    }
    return s;
}

std::vector<std::pair<double, PoAReport>> alpha_sweep(const Scenario& base, const Vec& alphas,
                                                      const SolverConfig& cfg, int threads) {
    // Fig. 1/2 setting: uniform influence everywhere, weights from alpha.
    Scenario tpl = base;
    const Adj full = Adj::full(tpl.K);
    Mat p(tpl.K, tpl.K, 1.0 / tpl.K);
    for (int n = 0; n <= tpl.N; ++n) {
        tpl.inf_adj[n] = full;
        tpl.P[n] = p;
    }
    std::vector<std::pair<double, PoAReport>> out(alphas.size());
    run_jobs(threads, static_cast<int>(alphas.size()), [&](int i) {
        const double alpha = alphas[i];
        const Scenario s =
            with_weights(tpl, 1.0 - alpha, 1.0 - alpha, std::max(10.0 * alpha, 1e-8));
        out[i] = {alpha, compute_poa(s, cfg)};
    });
    return out;
}

std::vector<DegreeCell> degree_table(const Scenario& base, const std::vector<int>& epi_degrees,
                                     const std::vector<int>& inf_degrees, int trials,
                                     std::uint64_t seed, const SolverConfig& cfg, int threads) {
    const Scenario tpl = with_weights(base, 1.0, 1.0, 10.0);
    const int cells = static_cast<int>(epi_degrees.size() * inf_degrees.size());
    std::vector<DegreeCell> out(cells);
    std::vector<std::vector<double>> samples(cells);
    for (auto& v : samples) v.assign(trials, std::nan(""));

    run_jobs(threads, cells * trials, [&](int job) {
        const int cell = job / trials, trial = job % trials;
        const int ei = cell / static_cast<int>(inf_degrees.size());
        const int ii = cell % static_cast<int>(inf_degrees.size());
        const Scenario s = random_graph_scenario(tpl, epi_degrees[ei], inf_degrees[ii],
                                                 seed_mix(seed, 10007ULL * cell + trial));
        try {
            const PoAReport r = compute_poa(s, cfg);
            if (r.converged_gne && r.converged_central && r.central_cost > 0.0)
                samples[cell][trial] = r.poa_uv;
        } catch (const std::exception&) {
            // non-converged / degenerate draws are skipped and counted below
        }
    });

    for (int cell = 0; cell < cells; ++cell) {
        DegreeCell& c = out[cell];
        c.epi_degree = epi_degrees[cell / inf_degrees.size()];
        c.inf_degree = inf_degrees[cell % inf_degrees.size()];
        c.n_total = trials;
        double sum = 0.0;
        for (double x : samples[cell])
            if (!std::isnan(x)) {
                sum += x;
                ++c.n_converged;
            }
        if (c.n_converged > 0) c.mean_poa = sum / c.n_converged;
        double ss = 0.0;
        for (double x : samples[cell])
            if (!std::isnan(x)) ss += (x - c.mean_poa) * (x - c.mean_poa);
        if (c.n_converged > 1) c.std_poa = std::sqrt(ss / (c.n_converged - 1));
    }
    return out;
}

std::vector<AggregateAction> aggregate_actions(const Scenario& s, const ActionProfile& act) {
    std::vector<AggregateAction> out(s.K);
    for (int k = 0; k < s.K; ++k) {
        double u = 0.0, v = 0.0;
        for (int l = 0; l < s.K; ++l) {
            if (s.epi_adj(k, l) && s.B0(k, l) > 1e-8) u += act.U(k, l) / s.B0(k, l);
            if (s.inf_adj[0](k, l)) v += 1.0 - act.V[0](k, l);
        }
        out[k].u_pct = 100.0 * u / s.K;
        out[k].v1_pct = 100.0 * v / s.K;
    }
    return out;
}

}  // namespace epigame
