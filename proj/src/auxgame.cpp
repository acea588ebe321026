#include "epigame/auxgame.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "epigame/dynamics.hpp"
#include "epigame/spectral.hpp"

namespace epigame {

namespace {

// Visits the edges (from, to, slice) of a path: (k,l_n) at slice n, then
// (l_n,l_{n-1}) at n-1, ..., (l_1,l_0) at slice 0.
template <class F>
void walk_edges(const PathIndex& p, F&& fn) {
    for (int j = 0; j <= p.n; ++j) fn(p.nodes[j], p.nodes[j + 1], p.n - j);
}

bool is_padded_tele(const PathIndex& p) {
    for (size_t j = 2; j < p.nodes.size(); ++j)
        if (p.nodes[j] != p.nodes[0]) return false;
    return true;
}

bool is_suffix_tele(const PathIndex& p) {
    for (size_t j = 2; j < p.nodes.size(); ++j)
        if (p.nodes[j] != p.nodes[1]) return false;
    return true;
}

}  // namespace

PathTable enumerate_paths(const Scenario& scn) {
    const int K = scn.K, N = scn.N;
    PathTable t;
    t.K = K;
    t.N = N;
    t.slice.assign(K, std::vector<std::pair<int, int>>(N + 1, {0, 0}));
    t.tele.assign(N + 1, std::vector<int>(static_cast<size_t>(K) * K, -1));
    t.tele_b.assign(N + 1, std::vector<int>(static_cast<size_t>(K) * K, -1));

    std::vector<int> nodes;
    double alpha = 1.0;
    // depth-first, children in increasing region order => lexicographic order
    auto dfs = [&](auto&& self, int slice) -> void {
        if (slice < 0) {
            const int idx = static_cast<int>(t.paths.size());
            PathIndex p{static_cast<int>(nodes.size()) - 2, nodes};
            if (is_padded_tele(p)) t.tele[p.n][p.nodes[0] * K + p.nodes[1]] = idx;
            if (is_suffix_tele(p)) t.tele_b[p.n][p.nodes[0] * K + p.nodes[1]] = idx;
            t.alpha.push_back(alpha);
            t.theta_src.push_back(nodes.back());
            t.paths.push_back(std::move(p));
            return;
        }
        const int cur = nodes.back();
        for (int next = 0; next < K; ++next) {
            if (!scn.inf_adj[slice](cur, next)) continue;
            nodes.push_back(next);
            const double w = scn.P[slice](cur, next);
            alpha *= w;
            self(self, slice - 1);
            alpha = (w != 0.0) ? alpha / w : alpha;
            nodes.pop_back();
        }
    };
    for (int k = 0; k < K; ++k)
        for (int n = 0; n <= N; ++n) {
            const int begin = static_cast<int>(t.paths.size());
            nodes = {k};
            alpha = 1.0;
            dfs(dfs, n);
            t.slice[k][n] = {begin, static_cast<int>(t.paths.size())};
        }
    return t;
}

AuxSpace aux_space(const Scenario& scn) {
    AuxSpace sp;
    sp.table = enumerate_paths(scn);
    sp.K = scn.K;
    sp.N = scn.N;
    sp.y_slot = Mat(scn.K, scn.K, -1.0);
    for (int k = 0; k < scn.K; ++k)
        for (int l = 0; l < scn.K; ++l)
            if (scn.epi_adj(k, l) && scn.B0(k, l) > 0.0) {
                sp.y_slot(k, l) = static_cast<double>(sp.y_edges.size());
                sp.y_edges.emplace_back(k, l);
            }
    return sp;
}

Vec aux_pack(const AuxSpace& sp, const AuxPoint& p) {
    Vec z(sp.dim(), 0.0);
    for (int e = 0; e < sp.ny(); ++e) z[e] = p.xi_y(sp.y_edges[e].first, sp.y_edges[e].second);
    for (int w = 0; w < sp.nw(); ++w) z[sp.w_at(w)] = p.xi_w[w];
    for (int m = 0; m < sp.nl(); ++m) z[sp.l_at(m)] = p.xi_lambda[m];
    for (int m = 0; m < sp.nl(); ++m)
        for (int l = 0; l < sp.K; ++l) z[sp.x_at(m, l)] = p.xi_x(m, l);
    return z;
}

AuxPoint aux_unpack(const AuxSpace& sp, const Vec& z) {
    AuxPoint p;
    p.xi_y = Mat(sp.K, sp.K, 0.0);
    for (int e = 0; e < sp.ny(); ++e) p.xi_y(sp.y_edges[e].first, sp.y_edges[e].second) = z[e];
    p.xi_w.assign(sp.nw(), 0.0);
    for (int w = 0; w < sp.nw(); ++w) p.xi_w[w] = z[sp.w_at(w)];
    p.xi_lambda.assign(sp.nl(), 0.0);
    for (int m = 0; m < sp.nl(); ++m) p.xi_lambda[m] = z[sp.l_at(m)];
    p.xi_x = Mat(sp.nl(), sp.K, 0.0);
    for (int m = 0; m < sp.nl(); ++m)
        for (int l = 0; l < sp.K; ++l) p.xi_x(m, l) = z[sp.x_at(m, l)];
    return p;
}

RhoBounds rho_box_bounds(const Scenario& scn) {
    const int K = scn.K;
    RhoBounds out;
    Mat lo(K, K), hi(K, K);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            lo(k, l) = std::max(0.0, scn.B0(k, l) - scn.u_max(k, l)) / scn.gamma[k];
            hi(k, l) = (scn.B0(k, l) - scn.u_min(k, l) + scn.Bhat(k, l)) / scn.gamma[k];
        }
    if (!is_irreducible(lo)) {
        out.floored = true;
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) lo(k, l) = std::max(lo(k, l), 1e-10);
    }
    out.rho_min = perron(lo).rho;
    out.rho_max = perron(hi).rho;
    return out;
}

namespace {

std::vector<Vec> theta_tilde_impl(const Scenario& scn, const AuxSpace& sp, const AuxPoint& xi) {
    std::vector<Vec> th;
    th.push_back(scn.theta0);
    for (int m = 1; m <= scn.N + 1; ++m) {
        Vec v(scn.K, 0.0);
        for (int k = 0; k < scn.K; ++k) {
            const auto [b, e] = sp.table.slice[k][m - 1];
            double acc = 0.0;
            for (int p = b; p < e; ++p)
                acc += sp.table.alpha[p] * std::exp(xi.xi_w[p]) * scn.theta0[sp.table.theta_src[p]];
            v[k] = acc;
        }
        th.push_back(std::move(v));
    }
    return th;
}

// B0 - U entry: exponential of the y variable on-graph, constant beta0 off.
double bu_entry(const Scenario& scn, const AuxSpace& sp, const AuxPoint& xi, int k, int l) {
    return sp.y_slot(k, l) >= 0.0 ? std::exp(xi.xi_y(k, l)) : scn.B0(k, l);
}

}  // namespace

AuxPoint to_aux(const Scenario& scn, const ActionProfile& act) {
    const AuxSpace sp = aux_space(scn);
    const int K = scn.K, N = scn.N;
    AuxPoint xi;
    xi.xi_y = Mat(K, K, 0.0);
    for (auto [k, l] : sp.y_edges) {
        const double gap = scn.B0(k, l) - act.U(k, l);
        if (gap <= 0.0) throw std::domain_error("to_aux: u >= beta0 on an edge");
        xi.xi_y(k, l) = std::log(gap);
    }
    xi.xi_w.assign(sp.nw(), 0.0);
    for (int p = 0; p < sp.nw(); ++p) {
        double acc = 0.0;
        walk_edges(sp.table.paths[p], [&](int i, int j, int n) {
            const double v = act.V[n](i, j);
            if (v <= 0.0) throw std::domain_error("to_aux: v <= 0 on an edge");
            acc += std::log(v);
        });
        xi.xi_w[p] = acc;
    }

    const std::vector<Vec> theta = opinion_path(scn, act.V);
    xi.xi_lambda.assign(N + 2, 0.0);
    xi.xi_x = Mat(N + 2, K, 0.0);
    const double floor = kEpsX * (1.0 + 2.0 * K * kEpsX);
    for (int m = 0; m <= N + 1; ++m) {
        Mat mat(K, K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                mat(k, l) = (bu_entry(scn, sp, xi, k, l) + theta[m][k] * scn.Bhat(k, l)) /
                            scn.gamma[k];
        PerronData pd = perron(mat);
        Vec x = pd.right;
        double sum = 0.0;
        for (double& c : x) {
            c = std::max(c, floor);
            sum += c;
        }
        for (double& c : x) c /= sum;
        // Collatz-Wielandt value at the (possibly clipped) vector keeps the
        // eigen rows feasible with equality at the binding component.
        Vec mx = matvec(mat, x);
        double lam = 0.0;
        for (int k = 0; k < K; ++k) lam = std::max(lam, mx[k] / x[k]);
        xi.xi_lambda[m] = std::log(lam);
        for (int l = 0; l < K; ++l) xi.xi_x(m, l) = std::log(x[l]);
    }
    return xi;
}

ActionProfile from_aux(const Scenario& scn, const AuxPoint& xi) {
    const AuxSpace sp = aux_space(scn);
    const int K = scn.K, N = scn.N;
    ActionProfile act;
    act.U = Mat(K, K, 0.0);
    for (auto [k, l] : sp.y_edges) {
        double u = scn.B0(k, l) - std::exp(xi.xi_y(k, l));
        u = std::min(scn.u_max(k, l), std::max(scn.u_min(k, l), u));
        act.U(k, l) = u;
    }
    const double tol = 1e-8;
    for (int n = 0; n <= N; ++n) {
        Mat v(K, K, 0.0);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) {
                if (!scn.inf_adj[n](k, l)) continue;
                const int a = sp.table.tele[n][k * K + l];
                if (a < 0) throw std::runtime_error("from_aux: padded path missing, graph lacks telescoping edges");
                double logv = xi.xi_w[a];
                if (n > 0) {
                    const int b = sp.table.tele_b[n - 1][l * K + k];
                    if (b < 0)
                        throw std::runtime_error("from_aux: padded path missing, graph lacks telescoping edges");
                    logv -= xi.xi_w[b];
                }
                double val = std::exp(logv);
                if (val < scn.v_min(k, l) - tol || val > scn.v_max(k, l) + tol)
                    throw std::runtime_error(
                        "from_aux: telescoped v outside its box: v(" + std::to_string(k) + "," +
                        std::to_string(l) + ")(" + std::to_string(n) + ") = " +
                        std::to_string(val));
                v(k, l) = std::min(scn.v_max(k, l), std::max(scn.v_min(k, l), val));
            }
        act.V.push_back(std::move(v));
    }
    return act;
}

std::vector<Vec> theta_tilde(const Scenario& scn, const AuxPoint& xi) {
    return theta_tilde_impl(scn, aux_space(scn), xi);
}

namespace {

Vec aux_costs_impl(const Scenario& scn, const AuxSpace& sp, const AuxPoint& xi) {
    const int K = scn.K, N = scn.N;
    const std::vector<Vec> th = theta_tilde_impl(scn, sp, xi);
    Vec J(K + 1, 0.0);
    for (int k = 0; k < K; ++k) {
        double econ = 0.0, local = 0.0, infl = 0.0, drift = 0.0;
        for (int l = 0; l < K; ++l) {
            if (sp.y_slot(k, l) >= 0.0)
                econ += xi.xi_y(k, l) - std::log(scn.B0(k, l));
            for (int m = 0; m <= N + 1; ++m)
                if (scn.epi_adj(k, l))
                    local += (bu_entry(scn, sp, xi, k, l) + scn.Bhat(k, l) * th[m][k]) /
                             scn.gamma[k];
        }
        for (int n = 1; n <= N; ++n)
            for (int l = 0; l < K; ++l) {
                if (!scn.inf_adj[n](k, l)) continue;
                const int a = sp.table.tele[n][k * K + l];
                const int b = sp.table.tele_b[n - 1][l * K + k];
                infl += xi.xi_w[a] - xi.xi_w[b];
            }
        for (int l = 0; l < K; ++l)
            if (scn.inf_adj[0](k, l)) infl += xi.xi_w[sp.table.tele[0][k * K + l]];
        for (int m = 0; m <= N + 1; ++m) drift += th[m][k];
        J[k] = -scn.weights.a[k] * econ + scn.weights.b_local[k] * local -
               scn.weights.c[k] * infl + scn.weights.d[k] * drift;
    }
    for (int m = 0; m <= N + 1; ++m) J[K] += std::exp(xi.xi_lambda[m]);
    return J;
}

std::vector<std::vector<std::pair<int, double>>> aux_cost_gradients_impl(const Scenario& scn,
                                                                         const AuxSpace& sp,
                                                                         const AuxPoint& xi) {
    const int K = scn.K, N = scn.N;
    std::vector<std::map<int, double>> g(K + 1);
    for (int k = 0; k < K; ++k) {
        double bh_row = 0.0;
        for (int l = 0; l < K; ++l)
            if (scn.epi_adj(k, l)) bh_row += scn.Bhat(k, l);
        for (int l = 0; l < K; ++l) {
            const int e = static_cast<int>(sp.y_slot(k, l));
            if (e < 0) continue;
            g[k][e] += -scn.weights.a[k] +
                       scn.weights.b_local[k] * (N + 2) * std::exp(xi.xi_y(k, l)) / scn.gamma[k];
        }
        const double coef = scn.weights.b_local[k] * bh_row / scn.gamma[k] + scn.weights.d[k];
        if (coef != 0.0)
            for (int n = 0; n <= N; ++n) {
                const auto [b, e] = sp.table.slice[k][n];
                for (int p = b; p < e; ++p)
                    g[k][sp.w_at(p)] += coef * sp.table.alpha[p] * std::exp(xi.xi_w[p]) *
                                        scn.theta0[sp.table.theta_src[p]];
            }
        if (scn.weights.c[k] != 0.0) {
            for (int n = 1; n <= N; ++n)
                for (int l = 0; l < K; ++l) {
                    if (!scn.inf_adj[n](k, l)) continue;
                    g[k][sp.w_at(sp.table.tele[n][k * K + l])] += -scn.weights.c[k];
                    if (l == k)  // the suffix path is rooted at l, ours only when l == k
                        g[k][sp.w_at(sp.table.tele_b[n - 1][k * K + k])] += scn.weights.c[k];
                }
            for (int l = 0; l < K; ++l)
                if (scn.inf_adj[0](k, l))
                    g[k][sp.w_at(sp.table.tele[0][k * K + l])] += -scn.weights.c[k];
        }
    }
    for (int m = 0; m <= N + 1; ++m) g[K][sp.l_at(m)] = std::exp(xi.xi_lambda[m]);

    std::vector<std::vector<std::pair<int, double>>> out(K + 1);
    for (int p = 0; p <= K; ++p) out[p].assign(g[p].begin(), g[p].end());
    return out;
}

}  // namespace

Vec aux_costs(const Scenario& scn, const AuxPoint& xi) {
    return aux_costs_impl(scn, aux_space(scn), xi);
}

std::vector<std::vector<std::pair<int, double>>> aux_cost_gradients(const Scenario& scn,
                                                                    const AuxPoint& xi) {
    return aux_cost_gradients_impl(scn, aux_space(scn), xi);
}

std::vector<ConstraintRow> aux_constraints(const Scenario& scn, const AuxPoint& xi) {
    const AuxSpace sp = aux_space(scn);
    const int K = scn.K, N = scn.N;
    const std::vector<Vec> th = theta_tilde_impl(scn, sp, xi);
    const RhoBounds rb = rho_box_bounds(scn);
    std::vector<ConstraintRow> rows;
    auto loc = [](std::initializer_list<std::pair<const char*, int>> parts) {
        std::string s;
        for (auto& [k, v] : parts) s += std::string(" ") + k + "=" + std::to_string(v);
        return s;
    };

    // eigen-inequality rows
    for (int m = 0; m <= N + 1; ++m) {
        Vec ex(K);
        for (int l = 0; l < K; ++l) ex[l] = std::exp(xi.xi_x(m, l));
        for (int k = 0; k < K; ++k) {
            double q = 0.0, bh = 0.0;
            for (int l = 0; l < K; ++l) {
                q += (bu_entry(scn, sp, xi, k, l) + th[m][k] * scn.Bhat(k, l)) * ex[l];
                bh += scn.Bhat(k, l) * ex[l];
            }
            q /= scn.gamma[k];
            bh /= scn.gamma[k];
            const double fac = std::exp(-xi.xi_lambda[m] - xi.xi_x(m, k));
            const double val = q * fac;
            ConstraintRow row;
            row.label = "eigen" + loc({{"m", m}, {"k", k}});
            row.value = val - 1.0;
            for (int l = 0; l < K; ++l) {
                const int e = static_cast<int>(sp.y_slot(k, l));
                if (e >= 0)
                    row.grad.emplace_back(e, std::exp(xi.xi_y(k, l)) * ex[l] * fac / scn.gamma[k]);
            }
            if (m >= 1) {
                const auto [b, e] = sp.table.slice[k][m - 1];
                for (int p = b; p < e; ++p)
                    row.grad.emplace_back(sp.w_at(p), bh * fac * sp.table.alpha[p] *
                                                          std::exp(xi.xi_w[p]) *
                                                          scn.theta0[sp.table.theta_src[p]]);
            }
            row.grad.emplace_back(sp.l_at(m), -val);
            for (int j = 0; j < K; ++j) {
                double gx = (bu_entry(scn, sp, xi, k, j) + th[m][k] * scn.Bhat(k, j)) * ex[j] *
                            fac / scn.gamma[k];
                if (j == k) gx -= val;
                row.grad.emplace_back(sp.x_at(m, j), gx);
            }
            rows.push_back(std::move(row));
        }
    }
    // simplex rows
    for (int m = 0; m <= N + 1; ++m) {
        ConstraintRow row;
        row.label = "simplex" + loc({{"m", m}});
        double sum = 0.0;
        for (int l = 0; l < K; ++l) {
            const double e = std::exp(xi.xi_x(m, l));
            sum += e;
            row.grad.emplace_back(sp.x_at(m, l), e);
        }
        row.value = sum - 1.0;
        rows.push_back(std::move(row));
    }
    // lambda boxes
    for (int m = 0; m <= N + 1; ++m) {
        rows.push_back({"box-lambda-lo" + loc({{"m", m}}),
                        std::log(rb.rho_min) - xi.xi_lambda[m],
                        {{sp.l_at(m), -1.0}}});
        rows.push_back({"box-lambda-hi" + loc({{"m", m}}),
                        xi.xi_lambda[m] - std::log(rb.rho_max),
                        {{sp.l_at(m), 1.0}}});
    }
    // x boxes
    for (int m = 0; m <= N + 1; ++m)
        for (int l = 0; l < K; ++l) {
            rows.push_back({"box-x-lo" + loc({{"m", m}, {"l", l}}),
                            std::log(kEpsX) - xi.xi_x(m, l),
                            {{sp.x_at(m, l), -1.0}}});
            rows.push_back(
                {"box-x-hi" + loc({{"m", m}, {"l", l}}), xi.xi_x(m, l), {{sp.x_at(m, l), 1.0}}});
        }
    // y boxes
    for (int e = 0; e < sp.ny(); ++e) {
        auto [k, l] = sp.y_edges[e];
        const double lo = std::log(scn.B0(k, l) - scn.u_max(k, l));
        const double hi = std::log(scn.B0(k, l) - scn.u_min(k, l));
        rows.push_back(
            {"box-y-lo" + loc({{"k", k}, {"l", l}}), lo - xi.xi_y(k, l), {{e, -1.0}}});
        rows.push_back(
            {"box-y-hi" + loc({{"k", k}, {"l", l}}), xi.xi_y(k, l) - hi, {{e, 1.0}}});
    }
    // omega boxes
    for (int p = 0; p < sp.nw(); ++p) {
        double lo = 0.0, hi = 0.0;
        walk_edges(sp.table.paths[p], [&](int i, int j, int) {
            lo += std::log(scn.v_min(i, j));
            hi += std::log(scn.v_max(i, j));
        });
        rows.push_back({"box-w-lo" + loc({{"p", p}}), lo - xi.xi_w[p], {{sp.w_at(p), -1.0}}});
        rows.push_back({"box-w-hi" + loc({{"p", p}}), xi.xi_w[p] - hi, {{sp.w_at(p), 1.0}}});
    }
    // opinion caps
    for (int k = 0; k < K; ++k) {
        if (scn.budgets.theta_max[k] == kUnbounded) continue;
        for (int m = 0; m <= N + 1; ++m) {
            ConstraintRow row;
            row.label = "theta-cap" + loc({{"k", k}, {"m", m}});
            row.value = th[m][k] - scn.budgets.theta_max[k];
            if (m >= 1) {
                const auto [b, e] = sp.table.slice[k][m - 1];
                for (int p = b; p < e; ++p)
                    row.grad.emplace_back(sp.w_at(p), sp.table.alpha[p] * std::exp(xi.xi_w[p]) *
                                                          scn.theta0[sp.table.theta_src[p]]);
            }
            rows.push_back(std::move(row));
        }
    }
    // local reproduction caps
    for (int k = 0; k < K; ++k) {
        if (scn.budgets.r_max[k] == kUnbounded) continue;
        for (int m = 0; m <= N + 1; ++m) {
            ConstraintRow row;
            row.label = "local-R" + loc({{"k", k}, {"m", m}});
            double sum = 0.0, bh = 0.0;
            for (int l = 0; l < K; ++l) {
                if (!scn.epi_adj(k, l)) continue;
                sum += bu_entry(scn, sp, xi, k, l) + scn.Bhat(k, l) * th[m][k];
                bh += scn.Bhat(k, l);
                const int e = static_cast<int>(sp.y_slot(k, l));
                if (e >= 0) row.grad.emplace_back(e, std::exp(xi.xi_y(k, l)) / scn.gamma[k]);
            }
            row.value = sum / scn.gamma[k] - scn.budgets.r_max[k];
            if (m >= 1) {
                const auto [b, e] = sp.table.slice[k][m - 1];
                for (int p = b; p < e; ++p)
                    row.grad.emplace_back(sp.w_at(p), bh / scn.gamma[k] * sp.table.alpha[p] *
                                                          std::exp(xi.xi_w[p]) *
                                                          scn.theta0[sp.table.theta_src[p]]);
            }
            rows.push_back(std::move(row));
        }
    }
    // epidemic budgets, log form
    for (int k = 0; k < K; ++k) {
        if (scn.budgets.phi[k] == kUnbounded) continue;
        ConstraintRow row;
        row.label = "budget-u" + loc({{"k", k}});
        double sum = 0.0;
        for (int l = 0; l < K; ++l) {
            const int e = static_cast<int>(sp.y_slot(k, l));
            if (e < 0) continue;
            sum += xi.xi_y(k, l) - std::log(scn.B0(k, l));
            row.grad.emplace_back(e, -1.0);
        }
        row.value = -sum - scn.budgets.phi[k];
        rows.push_back(std::move(row));
    }
    // influence budgets, telescoped
    for (int k = 0; k < K; ++k)
        for (int n = 0; n <= N; ++n) {
            if (scn.budgets.psi_hat(k, n) == kUnbounded) continue;
            ConstraintRow row;
            row.label = "budget-v" + loc({{"k", k}, {"n", n}});
            std::map<int, double> grad;
            double sum = 0.0;
            for (int l = 0; l < K; ++l) {
                if (!scn.inf_adj[n](k, l)) continue;
                const int a = sp.table.tele[n][k * K + l];
                sum += xi.xi_w[a];
                grad[sp.w_at(a)] -= 1.0;
                if (n > 0) {
                    const int b = sp.table.tele_b[n - 1][l * K + k];
                    sum -= xi.xi_w[b];
                    grad[sp.w_at(b)] += 1.0;
                }
            }
            row.value = -sum - scn.budgets.psi_hat(k, n);
            row.grad.assign(grad.begin(), grad.end());
            rows.push_back(std::move(row));
        }
    // telescoped v boxes for n >= 1 (n = 0 coincides with the omega box)
    for (int n = 1; n <= N; ++n)
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) {
                if (!scn.inf_adj[n](k, l)) continue;
                const int a = sp.table.tele[n][k * K + l];
                const int b = sp.table.tele_b[n - 1][l * K + k];
                const double diff = xi.xi_w[a] - xi.xi_w[b];
                rows.push_back({"v-box-lo" + loc({{"k", k}, {"l", l}, {"n", n}}),
                                std::log(scn.v_min(k, l)) - diff,
                                {{sp.w_at(a), -1.0}, {sp.w_at(b), 1.0}}});
                rows.push_back({"v-box-hi" + loc({{"k", k}, {"l", l}, {"n", n}}),
                                diff - std::log(scn.v_max(k, l)),
                                {{sp.w_at(a), 1.0}, {sp.w_at(b), -1.0}}});
            }
    return rows;
}

double dsc_check(const Scenario& scn, const AuxPoint& xi0, const AuxPoint& xi1, const Vec& delta) {
    const AuxSpace sp = aux_space(scn);
    auto stacked = [&](const AuxPoint& xi) {
        Vec g(sp.dim(), 0.0);
        auto blocks = aux_cost_gradients_impl(scn, sp, xi);
        for (size_t p = 0; p < blocks.size(); ++p)
            for (auto [i, v] : blocks[p]) g[i] += delta[p] * v;
        return g;
    };
    const Vec z0 = aux_pack(sp, xi0), z1 = aux_pack(sp, xi1);
    const Vec g0 = stacked(xi0), g1 = stacked(xi1);
    double acc = 0.0;
    for (int i = 0; i < sp.dim(); ++i) acc += (z1[i] - z0[i]) * (g1[i] - g0[i]);
    return acc;
}

}  // namespace epigame
