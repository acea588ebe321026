#include "epigame/game.hpp"

#include <cmath>
#include <stdexcept>

#include "epigame/dynamics.hpp"
#include "epigame/spectral.hpp"

namespace epigame {

namespace {

void check_log_domains(const Scenario& s, const ActionProfile& act) {
    for (int k = 0; k < s.K; ++k)
        for (int l = 0; l < s.K; ++l) {
            if (s.epi_adj(k, l) && s.B0(k, l) > 0.0 && act.U(k, l) >= s.B0(k, l))
                throw std::domain_error("cost: u >= beta0 on edge (" + std::to_string(k) + "," +
                                        std::to_string(l) + ")");
        }
    for (int n = 0; n <= s.N; ++n)
        for (int k = 0; k < s.K; ++k)
            for (int l = 0; l < s.K; ++l)
                if (s.inf_adj[n](k, l) && act.V[n](k, l) <= 0.0)
                    throw std::domain_error("cost: v <= 0 on influence edge");
}

}  // namespace

std::vector<CostBreakdown> cost(const Scenario& s, const ActionProfile& act) {
    check_log_domains(s, act);
    const int K = s.K, N = s.N;
    const std::vector<Vec> theta = opinion_path(s, act.V);

    Vec rho(N + 2, 0.0);
    for (int m = 0; m <= N + 1; ++m) {
        Mat mat(K, K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                mat(k, l) = (s.B0(k, l) - act.U(k, l) + theta[m][k] * s.Bhat(k, l)) / s.gamma[k];
        rho[m] = perron(mat).rho;
    }

    std::vector<CostBreakdown> out(K);
    for (int k = 0; k < K; ++k) {
        CostBreakdown& c = out[k];
        for (int l = 0; l < K; ++l) {
            if (!s.epi_adj(k, l) || s.B0(k, l) <= 0.0) continue;
            c.econ += -s.weights.a[k] * std::log(1.0 - act.U(k, l) / s.B0(k, l));
            for (int m = 0; m <= N + 1; ++m)
                c.local_repro += s.weights.b_local[k] *
                                 (s.B0(k, l) - act.U(k, l) + theta[m][k] * s.Bhat(k, l)) /
                                 s.gamma[k];
        }
        for (int m = 0; m <= N + 1; ++m) {
            c.global_repro += s.weights.b_global[k] * rho[m];
            c.drift += s.weights.d[k] * theta[m][k];
        }
        for (int n = 0; n <= N; ++n)
            for (int l = 0; l < K; ++l)
                if (s.inf_adj[n](k, l))
                    c.influence += -s.weights.c[k] * std::log(act.V[n](k, l));
        c.total = c.econ + c.local_repro + c.global_repro + c.influence + c.drift;
    }
    return out;
}

double sum_cost(const Scenario& s, const ActionProfile& act) {
    double total = 0.0;
    for (const CostBreakdown& c : cost(s, act)) total += c.total;
    return total;
}

std::vector<LabeledResidual> constraint_residuals(const Scenario& s, const ActionProfile& act) {
    const int K = s.K, N = s.N;
    const std::vector<Vec> theta = opinion_path(s, act.V);
    std::vector<LabeledResidual> out;
    auto tag = [](const std::string& base, int a, int b = -1) {
        std::string t = base + " k=" + std::to_string(a);
        if (b >= 0) t += " n=" + std::to_string(b);
        return t;
    };

    for (int k = 0; k < K; ++k) {
        if (s.budgets.phi[k] == kUnbounded) {
            out.push_back({tag("budget-u", k), kUnboundedResidual});
            continue;
        }
        double sum = 0.0;
        for (int l = 0; l < K; ++l)
            if (s.epi_adj(k, l) && s.B0(k, l) > 0.0) sum += act.U(k, l) / s.B0(k, l);
        out.push_back({tag("budget-u", k), sum - s.budgets.phi[k]});
    }
    for (int k = 0; k < K; ++k)
        for (int n = 0; n <= N; ++n) {
            if (s.budgets.psi_hat(k, n) == kUnbounded) {
                out.push_back({tag("budget-v", k, n), kUnboundedResidual});
                continue;
            }
            double sum = 0.0;
            for (int l = 0; l < K; ++l)
                if (s.inf_adj[n](k, l)) sum += -std::log(act.V[n](k, l));
            out.push_back({tag("budget-v", k, n), sum - s.budgets.psi_hat(k, n)});
        }
    for (int k = 0; k < K; ++k)
        for (int m = 0; m <= N + 1; ++m) {
            if (s.budgets.r_max[k] == kUnbounded) {
                out.push_back({tag("local-R", k, m), kUnboundedResidual});
                continue;
            }
            double sum = 0.0;
            for (int l = 0; l < K; ++l)
                if (s.epi_adj(k, l))
                    sum += (s.B0(k, l) - act.U(k, l) + s.Bhat(k, l) * theta[m][k]) / s.gamma[k];
            out.push_back({tag("local-R", k, m), sum - s.budgets.r_max[k]});
        }
    for (int k = 0; k < K; ++k)
        for (int m = 0; m <= N + 1; ++m) {
            if (s.budgets.theta_max[k] == kUnbounded) {
                out.push_back({tag("theta-max", k, m), kUnboundedResidual});
                continue;
            }
            out.push_back({tag("theta-max", k, m), theta[m][k] - s.budgets.theta_max[k]});
        }
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            if (!s.epi_adj(k, l)) continue;
            const std::string where = std::to_string(k) + "," + std::to_string(l);
            out.push_back({"box-u-lo " + where, s.u_min(k, l) - act.U(k, l)});
            out.push_back({"box-u-hi " + where, act.U(k, l) - s.u_max(k, l)});
        }
    for (int n = 0; n <= N; ++n)
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) {
                if (!s.inf_adj[n](k, l)) continue;
                const std::string where =
                    std::to_string(k) + "," + std::to_string(l) + " n=" + std::to_string(n);
                out.push_back({"box-v-lo " + where, s.v_min(k, l) - act.V[n](k, l)});
                out.push_back({"box-v-hi " + where, act.V[n](k, l) - s.v_max(k, l)});
            }
    return out;
}

}  // namespace epigame
