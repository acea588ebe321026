#include "epigame/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>

#include <cstdio>
#include <cstdlib>

#include "epigame/dynamics.hpp"
#include "epigame/spectral.hpp"

namespace epigame {

namespace {

using Col = std::vector<std::pair<int, double>>;  // sparse, ascending indices

double sparse_dot(const Col& a, const Col& b) {
    double s = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            ++i;
        else if (a[i].first > b[j].first)
            ++j;
        else
            s += a[i].second * b[j].second, ++i, ++j;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Reduced coordinates: one log variable per epidemic edge (y), one per
// influence edge and campaign (the independent generators of all omega path
// sums), lambda, and x. All auxiliary-game rows are evaluated through the
// consistent path sums, so the flow lives on the manifold where omega
// telescopes exactly and from_aux is always well posed.
// ---------------------------------------------------------------------------


// min || -g + H mu ||  s.t.  mu <= 0, via Lawson-Hanson with a warm-started
// passive set. gram = H^T H (+ridge on the diagonal inside the subset solves),
// rhs = H^T g. The exact sign-constrained fit keeps the flow field continuous
// in the state and never pushes a dropped row back into violation.
Vec nnls_nonpositive(const Mat& gram, const Vec& rhs, double ridge, Vec mu) {
    const int mb = gram.rows();
    if (mu.size() != static_cast<size_t>(mb)) mu.assign(mb, 0.0);
    for (double& x : mu) x = std::min(x, 0.0);
    std::vector<std::uint8_t> passive(mb, 0);
    for (int j = 0; j < mb; ++j) passive[j] = mu[j] < 0.0;
    const double tol = 1e-12;
    auto subset_solve = [&](Vec& out) {
        std::vector<int> idx;
        for (int j = 0; j < mb; ++j)
            if (passive[j]) idx.push_back(j);
        out.assign(mb, 0.0);
        if (idx.empty()) return;
        const int nk = static_cast<int>(idx.size());
        Mat sub(nk, nk);
        Vec srhs(nk, 0.0);
        for (int a = 0; a < nk; ++a) {
            for (int b = 0; b < nk; ++b) sub(a, b) = gram(idx[a], idx[b]);
            srhs[a] = rhs[idx[a]];
        }
        Vec smu = cholesky_solve(sub, srhs, ridge);
        for (int a = 0; a < nk; ++a) out[idx[a]] = smu[a];
    };
    for (int outer = 0; outer < 4 * mb + 8; ++outer) {
        Vec trial;
        subset_solve(trial);
        // pull the iterate toward the trial, stopping at the first sign flip
        for (int inner = 0; inner < mb + 2; ++inner) {
            double alpha = 1.0;
            int block = -1;
            for (int j = 0; j < mb; ++j) {
                if (!passive[j] || trial[j] <= tol) continue;
                const double denom = mu[j] - trial[j];
                const double a = denom < 0.0 ? mu[j] / denom : 0.0;
                if (a < alpha) {
                    alpha = a;
                    block = j;
                }
            }
            if (block < 0) {
                mu = trial;
                break;
            }
            for (int j = 0; j < mb; ++j)
                if (passive[j]) mu[j] = std::min(0.0, mu[j] + alpha * (trial[j] - mu[j]));
            mu[block] = 0.0;
            passive[block] = 0;
            subset_solve(trial);
        }
        // optimality: for at-zero multipliers, grad of the LS objective >= 0,
        // i.e. (G mu - rhs)_j <= 0 means relaxing mu_j below zero would help
        int worst = -1;
        double worst_val = 1e-10;
        for (int j = 0; j < mb; ++j) {
            if (passive[j]) continue;
            double w = -rhs[j];
            for (int b = 0; b < mb; ++b)
                if (mu[b] != 0.0) w += gram(j, b) * mu[b];
            // w = d(obj)/d(mu_j); pushing mu_j negative helps when w > 0
            if (w > worst_val) {
                worst_val = w;
                worst = j;
            }
        }
        if (worst < 0) break;
        passive[worst] = 1;
    }
    return mu;
}

enum class RowKind { Eigen, Simplex, ThetaCap, LocalR, BudgetU, BudgetV };

struct RowSpec {
    RowKind kind;
    int k = 0, m = 0;  // m doubles as the campaign index for BudgetV
};

struct Reduced {
    const Scenario* scn = nullptr;
    int K = 0, N = 0;
    std::vector<std::pair<int, int>> y_edges;
    std::vector<std::array<int, 3>> v_edges;  // (n, k, l)
    Mat y_slot;                               // K x K -> y coordinate or -1
    std::vector<Mat> v_slot;                  // per n: K x K -> v coordinate or -1
    int ov = 0, ol = 0, ox = 0, dim = 0;
    Vec lo, hi;
    std::vector<std::uint8_t> frozen;
    Vec delta;  // K+1 weights
    bool central = false;
    double sum_b = 1.0;
    std::vector<RowSpec> rows;
    std::vector<std::string> labels;

    struct Cache {
        Vec z;
        std::vector<Mat> W;             // V(n) o P(n)
        std::vector<Vec> th;            // theta~(0..N+1)
        Mat BU;                         // beta0 - u as exp(y) / constants
        std::vector<Vec> ex;            // exp(x(m))
        Vec el;                         // exp(lambda(m))
        std::vector<std::vector<Mat>> L;  // L[m][r] = W(m-1)...W(r+1)
        std::vector<Mat> SL;            // SL[r] = sum_{m>r} L[m][r]
    };

    void build(const Scenario& s, const FixedMask* mask, bool central_mode, Vec delta_bar) {
        scn = &s;
        K = s.K;
        N = s.N;
        central = central_mode;
        sum_b = 0.0;
        for (double b : s.weights.b_global) sum_b += b;
        if (delta_bar.empty()) {
            delta.assign(K + 1, 1.0);
            for (int k = 0; k < K; ++k) delta[k] = 1.0 / s.weights.b_global[k];
        } else {
            delta = std::move(delta_bar);
        }

        y_slot = Mat(K, K, -1.0);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                if (s.epi_adj(k, l) && s.B0(k, l) > 0.0) {
                    y_slot(k, l) = static_cast<double>(y_edges.size());
                    y_edges.emplace_back(k, l);
                }
        ov = static_cast<int>(y_edges.size());
        v_slot.assign(N + 1, Mat(K, K, -1.0));
        for (int n = 0; n <= N; ++n)
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l)
                    if (s.inf_adj[n](k, l)) {
                        v_slot[n](k, l) = static_cast<double>(v_edges.size());
                        v_edges.push_back({n, k, l});
                    }
        ol = ov + static_cast<int>(v_edges.size());
        ox = ol + (N + 2);
        dim = ox + (N + 2) * K;

        const RhoBounds rb = rho_box_bounds(s);
        lo.assign(dim, 0.0);
        hi.assign(dim, 0.0);
        for (size_t e = 0; e < y_edges.size(); ++e) {
            auto [k, l] = y_edges[e];
            lo[e] = std::log(s.B0(k, l) - s.u_max(k, l));
            hi[e] = std::log(s.B0(k, l) - s.u_min(k, l));
        }
        for (size_t e = 0; e < v_edges.size(); ++e) {
            auto [n, k, l] = v_edges[e];
            (void)n;
            lo[ov + e] = std::log(s.v_min(k, l));
            hi[ov + e] = std::log(s.v_max(k, l));
        }
        for (int m = 0; m <= N + 1; ++m) {
            lo[ol + m] = std::log(rb.rho_min);
            hi[ol + m] = std::log(rb.rho_max);
        }
        for (int m = 0; m <= N + 1; ++m)
            for (int l = 0; l < K; ++l) {
                lo[ox + m * K + l] = std::log(kEpsX);
                hi[ox + m * K + l] = 0.0;
            }

        frozen.assign(dim, 0);
        for (int i = 0; i < dim; ++i)
            if (hi[i] - lo[i] < 1e-15) frozen[i] = 1;
        if (mask) {
            if (mask->v_at_one)
                for (size_t e = 0; e < v_edges.size(); ++e) frozen[ov + e] = 1;
            if (mask->u_at_zero)
                for (size_t e = 0; e < y_edges.size(); ++e) frozen[e] = 1;
        }

        for (int m = 0; m <= N + 1; ++m)
            for (int k = 0; k < K; ++k) {
                rows.push_back({RowKind::Eigen, k, m});
                labels.push_back("eigen m=" + std::to_string(m) + " k=" + std::to_string(k));
            }
        for (int m = 0; m <= N + 1; ++m) {
            rows.push_back({RowKind::Simplex, 0, m});
            labels.push_back("simplex m=" + std::to_string(m));
        }
        for (int k = 0; k < K; ++k) {
            if (s.budgets.theta_max[k] != kUnbounded)
                for (int m = 1; m <= N + 1; ++m) {
                    rows.push_back({RowKind::ThetaCap, k, m});
                    labels.push_back("theta-cap k=" + std::to_string(k) +
                                     " m=" + std::to_string(m));
                }
            if (s.budgets.r_max[k] != kUnbounded)
                for (int m = 0; m <= N + 1; ++m) {
                    rows.push_back({RowKind::LocalR, k, m});
                    labels.push_back("local-R k=" + std::to_string(k) +
                                     " m=" + std::to_string(m));
                }
            if (s.budgets.phi[k] != kUnbounded) {
                rows.push_back({RowKind::BudgetU, k, 0});
                labels.push_back("budget-u k=" + std::to_string(k));
            }
            for (int n = 0; n <= N; ++n)
                if (s.budgets.psi_hat(k, n) != kUnbounded) {
                    rows.push_back({RowKind::BudgetV, k, n});
                    labels.push_back("budget-v k=" + std::to_string(k) +
                                     " n=" + std::to_string(n));
                }
        }
    }

    void clamp(Vec& z) const {
        // snap-to-face: keeps box membership exact against step-level noise
        for (int i = 0; i < dim; ++i) {
            if (frozen[i]) continue;
            double v = std::min(hi[i], std::max(lo[i], z[i]));
            if (v < lo[i] + 1e-9) v = lo[i];
            if (v > hi[i] - 1e-9) v = hi[i];
            z[i] = v;
        }
    }

    Cache cache(const Vec& z) const {
        const Scenario& s = *scn;
        Cache c;
        c.z = z;
        c.W.assign(N + 1, Mat(K, K, 0.0));
        for (size_t e = 0; e < v_edges.size(); ++e) {
            auto [n, k, l] = v_edges[e];
            c.W[n](k, l) = std::exp(z[ov + e]) * s.P[n](k, l);
        }
        c.th.push_back(s.theta0);
        for (int n = 0; n <= N; ++n) c.th.push_back(matvec(c.W[n], c.th.back()));
        c.BU = Mat(K, K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) {
                const int e = static_cast<int>(y_slot(k, l));
                c.BU(k, l) = e >= 0 ? std::exp(z[e]) : s.B0(k, l);
            }
        c.el.assign(N + 2, 0.0);
        c.ex.assign(N + 2, Vec(K, 0.0));
        for (int m = 0; m <= N + 1; ++m) {
            c.el[m] = std::exp(z[ol + m]);
            for (int l = 0; l < K; ++l) c.ex[m][l] = std::exp(z[ox + m * K + l]);
        }
        // suffix products of the opinion maps, for drift derivatives
        c.L.assign(N + 2, {});
        for (int m = 1; m <= N + 1; ++m) {
            c.L[m].assign(m, Mat());
            Mat acc = Mat::identity(K);
            for (int r = m - 1; r >= 0; --r) {
                c.L[m][r] = acc;
                if (r > 0) acc = matmul(acc, c.W[r]);
            }
        }
        c.SL.assign(N + 1, Mat(K, K, 0.0));
        for (int r = 0; r <= N; ++r)
            for (int m = r + 1; m <= N + 1; ++m)
                for (int k = 0; k < K; ++k)
                    for (int i = 0; i < K; ++i) c.SL[r](k, i) += c.L[m][r](k, i);
        return c;
    }

    // delta-weighted pseudo-gradient (per-player own blocks), or the full
    // gradient of the scaled summed objective in central mode.
    Vec grad(const Vec& z, const Cache& c) const {
        const Scenario& s = *scn;
        Vec g(dim, 0.0);
        Vec coef(K, 0.0);  // b_local_k sum_l Bhat_kl / gamma_k + d_k
        for (int k = 0; k < K; ++k) {
            double bh = 0.0;
            for (int l = 0; l < K; ++l)
                if (s.epi_adj(k, l)) bh += s.Bhat(k, l);
            coef[k] = s.weights.b_local[k] * bh / s.gamma[k] + s.weights.d[k];
        }
        for (size_t e = 0; e < y_edges.size(); ++e) {
            auto [k, l] = y_edges[e];
            const double own = -s.weights.a[k] +
                               s.weights.b_local[k] * (N + 2) * std::exp(z[e]) / s.gamma[k];
            g[e] = central ? own / sum_b : delta[k] * own;
        }
        for (size_t e = 0; e < v_edges.size(); ++e) {
            auto [n, k, l] = v_edges[e];
            double own = -s.weights.c[k];
            if (coef[k] != 0.0) own += coef[k] * c.SL[n](k, k) * c.W[n](k, l) * c.th[n][l];
            if (central) {
                double cross = 0.0;
                for (int kk = 0; kk < K; ++kk) {
                    if (kk == k || coef[kk] == 0.0) continue;
                    cross += coef[kk] * c.SL[n](kk, k) * c.W[n](k, l) * c.th[n][l];
                }
                g[ov + e] = (own + cross) / sum_b;
            } else {
                g[ov + e] = delta[k] * own;
            }
        }
        for (int m = 0; m <= N + 1; ++m)
            g[ol + m] = central ? c.el[m] : delta[K] * c.el[m];
        for (int i = 0; i < dim; ++i)
            if (frozen[i]) g[i] = 0.0;
        return g;
    }

    double row_value(const RowSpec& r, const Cache& c) const {
        const Scenario& s = *scn;
        switch (r.kind) {
            case RowKind::Eigen: {
                const int m = r.m, k = r.k;
                double q = 0.0;
                for (int l = 0; l < K; ++l)
                    q += (c.BU(k, l) + c.th[m][k] * s.Bhat(k, l)) * c.ex[m][l];
                q /= s.gamma[k];
                return q / (c.el[m] * c.ex[m][k]) - 1.0;
            }
            case RowKind::Simplex: {
                double sum = 0.0;
                for (int l = 0; l < K; ++l) sum += c.ex[r.m][l];
                return sum - 1.0;
            }
            case RowKind::ThetaCap:
                return c.th[r.m][r.k] - s.budgets.theta_max[r.k];
            case RowKind::LocalR: {
                double sum = 0.0;
                for (int l = 0; l < K; ++l)
                    if (s.epi_adj(r.k, l)) sum += c.BU(r.k, l) + s.Bhat(r.k, l) * c.th[r.m][r.k];
                return sum / s.gamma[r.k] - s.budgets.r_max[r.k];
            }
            case RowKind::BudgetU: {
                double sum = 0.0;
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(y_slot(r.k, l));
                    if (e >= 0) sum += c.z[e] - std::log(s.B0(r.k, l));
                }
                return -sum - s.budgets.phi[r.k];
            }
            case RowKind::BudgetV: {
                double sum = 0.0;
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(v_slot[r.m](r.k, l));
                    if (e >= 0) sum += c.z[ov + e];
                }
                return -sum - s.budgets.psi_hat(r.k, r.m);
            }
        }
        return 0.0;
    }

    // scratch for assembling one sparse gradient column
    mutable Vec scratch_;
    mutable std::vector<int> touched_;

    void add_entry(int idx, double val) const {
        if (val == 0.0) return;
        if (scratch_[idx] == 0.0) touched_.push_back(idx);
        scratch_[idx] += val;
    }

    // d theta~_k(m) / d xi_v, scaled by `scale`, accumulated into the scratch.
    void theta_grad_into(int k, int m, double scale, const Cache& c) const {
        for (int r = 0; r < m; ++r)
            for (int i = 0; i < K; ++i) {
                const double lk = c.L[m][r](k, i);
                if (lk == 0.0) continue;
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(v_slot[r](i, l));
                    if (e < 0) continue;
                    add_entry(ov + e, scale * lk * c.W[r](i, l) * c.th[r][l]);
                }
            }
    }

    Col row_grad(const RowSpec& r, const Cache& c) const {
        const Scenario& s = *scn;
        if (scratch_.empty()) scratch_.assign(dim, 0.0);
        touched_.clear();
        switch (r.kind) {
            case RowKind::Eigen: {
                const int m = r.m, k = r.k;
                const double fac = 1.0 / (c.el[m] * c.ex[m][k] * s.gamma[k]);
                double q = 0.0, bh = 0.0;
                for (int l = 0; l < K; ++l) {
                    q += (c.BU(k, l) + c.th[m][k] * s.Bhat(k, l)) * c.ex[m][l];
                    bh += s.Bhat(k, l) * c.ex[m][l];
                }
                const double val = q * fac;
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(y_slot(k, l));
                    if (e >= 0) add_entry(e, c.BU(k, l) * c.ex[m][l] * fac);
                }
                if (m >= 1 && bh != 0.0) theta_grad_into(k, m, bh * fac, c);
                add_entry(ol + m, -val);
                for (int j = 0; j < K; ++j) {
                    double gx = (c.BU(k, j) + c.th[m][k] * s.Bhat(k, j)) * c.ex[m][j] * fac;
                    if (j == k) gx -= val;
                    add_entry(ox + m * K + j, gx);
                }
                break;
            }
            case RowKind::Simplex:
                for (int l = 0; l < K; ++l) add_entry(ox + r.m * K + l, c.ex[r.m][l]);
                break;
            case RowKind::ThetaCap:
                theta_grad_into(r.k, r.m, 1.0, c);
                break;
            case RowKind::LocalR: {
                double bh = 0.0;
                for (int l = 0; l < K; ++l) {
                    if (!s.epi_adj(r.k, l)) continue;
                    bh += s.Bhat(r.k, l);
                    const int e = static_cast<int>(y_slot(r.k, l));
                    if (e >= 0) add_entry(e, c.BU(r.k, l) / s.gamma[r.k]);
                }
                if (r.m >= 1 && bh != 0.0) theta_grad_into(r.k, r.m, bh / s.gamma[r.k], c);
                break;
            }
            case RowKind::BudgetU:
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(y_slot(r.k, l));
                    if (e >= 0) add_entry(e, -1.0);
                }
                break;
            case RowKind::BudgetV:
                for (int l = 0; l < K; ++l) {
                    const int e = static_cast<int>(v_slot[r.m](r.k, l));
                    if (e >= 0) add_entry(ov + e, -1.0);
                }
                break;
        }
        std::sort(touched_.begin(), touched_.end());
        Col col;
        col.reserve(touched_.size());
        for (int i : touched_) {
            if (!frozen[i] && scratch_[i] != 0.0) col.emplace_back(i, scratch_[i]);
            scratch_[i] = 0.0;
        }
        touched_.clear();
        return col;
    }

    void init_point(Vec& z) const {
        const Scenario& s = *scn;
        z.assign(dim, 0.0);
        for (int i = 0; i < ov; ++i) z[i] = 0.5 * (lo[i] + hi[i]);
        for (size_t e = 0; e < v_edges.size(); ++e)
            z[ov + e] = 0.5 * (lo[ov + e] + hi[ov + e]);
        for (size_t e = 0; e < y_edges.size(); ++e)
            if (frozen[e]) z[e] = hi[e];  // u = u_min for the no-epidemic-control game
        for (size_t e = 0; e < v_edges.size(); ++e)
            if (frozen[ov + e]) z[ov + e] = hi[ov + e];  // v = v_max (== 1)
        Cache c0 = cache(z);
        const double floor = kEpsX * (1.0 + 2.0 * K * kEpsX);
        for (int m = 0; m <= N + 1; ++m) {
            Mat mat(K, K);
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l)
                    mat(k, l) = (c0.BU(k, l) + c0.th[m][k] * s.Bhat(k, l)) / s.gamma[k];
            PerronData pd = perron(mat);
            Vec x = pd.right;
            double sum = 0.0;
            for (double& v : x) {
                v = std::max(v, floor);
                sum += v;
            }
            for (double& v : x) v /= sum;
            Vec mx = matvec(mat, x);
            double lam = 0.0;
            for (int k = 0; k < K; ++k) lam = std::max(lam, mx[k] / x[k]);
            z[ol + m] = std::log(lam);
            for (int l = 0; l < K; ++l) z[ox + m * K + l] = std::log(x[l]);
        }
        clamp(z);
    }

    // Gauss-Newton restoration: violated coupled rows are brought back to the
    // surface, and rows carrying a multiplier are held on it from both sides
    // (the discretized flow otherwise lets them sag out of the active band).
    void polish(Vec& z, const Vec* loaded = nullptr, double tol = 1e-10, int iters = 8) const {
        clamp(z);
        for (int pass = 0; pass < iters; ++pass) {
            Cache c = cache(z);
            std::vector<int> viol;
            Vec hv;
            for (size_t j = 0; j < rows.size(); ++j) {
                const double h = row_value(rows[j], c);
                const bool pin = loaded && (*loaded)[j] < -1e-14;
                if (h > tol || (pin && std::fabs(h) > tol)) {
                    viol.push_back(static_cast<int>(j));
                    hv.push_back(h);
                }
            }
            if (viol.empty()) return;
            // corrections act only on coordinates strictly inside their boxes
            std::vector<Col> cols;
            Vec rhs;
            for (size_t a = 0; a < viol.size(); ++a) {
                Col col = row_grad(rows[viol[a]], c);
                Col inner;
                for (auto [i, v] : col)
                    if (z[i] > lo[i] + 1e-13 && z[i] < hi[i] - 1e-13) inner.emplace_back(i, v);
                if (!inner.empty()) {
                    cols.push_back(std::move(inner));
                    rhs.push_back(hv[a]);
                }
            }
            if (cols.empty()) return;
            const int mb = static_cast<int>(cols.size());
            Mat gram(mb, mb);
            for (int a = 0; a < mb; ++a)
                for (int b = a; b < mb; ++b) gram(a, b) = gram(b, a) = sparse_dot(cols[a], cols[b]);
            Vec w = cholesky_solve(gram, rhs, 1e-12);
            for (int a = 0; a < mb; ++a)
                for (auto [i, v] : cols[a]) z[i] -= w[a] * v;
            clamp(z);
        }
    }
};

struct FlowEval {
    Reduced::Cache cache;
    Vec g, f;
    std::vector<int> active;       // coupled rows in the band
    std::vector<int> keys;         // one per column: row id, or -(coord+1) for a face
    std::vector<std::uint8_t> member;
    Vec mu;
    Vec mu_of_row;                       // multiplier by row id (0 when inactive)
    std::map<int, double> mu_by_key;     // warm start for the next fit
    double V = 0.0, fmax = 0.0, hmax = 0.0, mu_max = 0.0;
};

FlowEval evaluate(const Reduced& rd, const Vec& z, const SolverConfig& cfg,
                  const FlowEval* prev = nullptr) {
    FlowEval ev;
    ev.hmax = -1e300;
    ev.cache = rd.cache(z);
    ev.g = rd.grad(z, ev.cache);

    // Coupled rows activate inside the tolerance band; coordinates sitting on
    // a box face contribute unit columns. One ridge least-squares fit over the
    // active columns, positive multipliers clipped to zero: the clip releases
    // a face or row continuously, so the flow stays smooth across changes of
    // the active set.
    ev.member.assign(rd.rows.size(), 0);
    std::vector<Col> cols;
    for (size_t j = 0; j < rd.rows.size(); ++j) {
        const double h = rd.row_value(rd.rows[j], ev.cache);
        ev.hmax = std::max(ev.hmax, h);
        if (h > -cfg.active_tol) {
            Col col = rd.row_grad(rd.rows[j], ev.cache);
            if (!col.empty()) {
                ev.member[j] = 1;
                ev.active.push_back(static_cast<int>(j));
                ev.keys.push_back(static_cast<int>(j));
                cols.push_back(std::move(col));
            }
        }
    }
    const int n_coupled = static_cast<int>(cols.size());
    for (int i = 0; i < rd.dim; ++i) {
        if (rd.frozen[i]) continue;
        if (z[i] >= rd.hi[i] - 1e-12) {
            cols.push_back({{i, 1.0}});
            ev.keys.push_back(-(i + 1));
        } else if (z[i] <= rd.lo[i] + 1e-12) {
            cols.push_back({{i, -1.0}});
            ev.keys.push_back(-(i + 1));
        }
    }
    const int mb = static_cast<int>(cols.size());
    ev.mu.assign(mb, 0.0);
    if (mb > 0) {
        Mat gram(mb, mb);
        Vec rhs(mb, 0.0);
        for (int a = 0; a < mb; ++a) {
            for (int b = a; b < mb; ++b) gram(a, b) = gram(b, a) = sparse_dot(cols[a], cols[b]);
            double s = 0.0;
            for (auto [i, v] : cols[a]) s += v * ev.g[i];
            rhs[a] = s;
        }
        Vec warm(mb, 0.0);
        if (prev)
            for (int a = 0; a < mb; ++a) {
                auto it = prev->mu_by_key.find(ev.keys[a]);
                if (it != prev->mu_by_key.end()) warm[a] = it->second;
            }
        ev.mu = nnls_nonpositive(gram, rhs, cfg.ridge, std::move(warm));
        for (int a = 0; a < mb; ++a)
            if (ev.mu[a] != 0.0) ev.mu_by_key[ev.keys[a]] = ev.mu[a];
    }
    ev.mu_of_row.assign(rd.rows.size(), 0.0);
    for (int a = 0; a < n_coupled; ++a) ev.mu_of_row[ev.active[a]] = ev.mu[a];
    for (double m : ev.mu) ev.mu_max = std::max(ev.mu_max, m);
    ev.f = ev.g;
    for (double& x : ev.f) x = -x;
    for (int a = 0; a < mb; ++a)
        for (auto [i, v] : cols[a]) ev.f[i] += ev.mu[a] * v;
    for (int i = 0; i < rd.dim; ++i)
        if (rd.frozen[i]) ev.f[i] = 0.0;
    ev.V = 0.5 * dot(ev.f, ev.f);
    ev.fmax = max_abs(ev.f);
    return ev;
}

AuxPoint reduced_to_aux(const Reduced& rd, const Vec& z) {
    const Scenario& s = *rd.scn;
    const AuxSpace sp = aux_space(s);
    AuxPoint xi;
    xi.xi_y = Mat(rd.K, rd.K, 0.0);
    for (size_t e = 0; e < rd.y_edges.size(); ++e)
        xi.xi_y(rd.y_edges[e].first, rd.y_edges[e].second) = z[e];
    xi.xi_w.assign(sp.nw(), 0.0);
    for (int p = 0; p < sp.nw(); ++p) {
        double acc = 0.0;
        const PathIndex& path = sp.table.paths[p];
        for (int j = 0; j <= path.n; ++j) {
            const int e = static_cast<int>(rd.v_slot[path.n - j](path.nodes[j], path.nodes[j + 1]));
            acc += z[rd.ov + e];
        }
        xi.xi_w[p] = acc;
    }
    xi.xi_lambda.assign(rd.N + 2, 0.0);
    xi.xi_x = Mat(rd.N + 2, rd.K, 0.0);
    for (int m = 0; m <= rd.N + 1; ++m) {
        xi.xi_lambda[m] = z[rd.ol + m];
        for (int l = 0; l < rd.K; ++l) xi.xi_x(m, l) = z[rd.ox + m * rd.K + l];
    }
    return xi;
}

void set_reduced_from_aux(const Reduced& rd, const AuxPoint& xi, Vec& z) {
    const Scenario& s = *rd.scn;
    z.assign(rd.dim, 0.0);
    for (size_t e = 0; e < rd.y_edges.size(); ++e)
        z[e] = xi.xi_y(rd.y_edges[e].first, rd.y_edges[e].second);
    const ActionProfile act = from_aux(s, xi);
    for (size_t e = 0; e < rd.v_edges.size(); ++e) {
        auto [n, k, l] = rd.v_edges[e];
        z[rd.ov + e] = std::log(act.V[n](k, l));
    }
    for (int m = 0; m <= rd.N + 1; ++m) {
        z[rd.ol + m] = xi.xi_lambda[m];
        for (int l = 0; l < rd.K; ++l) z[rd.ox + m * rd.K + l] = xi.xi_x(m, l);
    }
}

SolveReport run_flow(const Scenario& scn, const SolverConfig& cfg, const FixedMask* fixed,
                     bool central) {
    Reduced rd;
    rd.build(scn, fixed, central, cfg.delta_bar);
    Vec z;
    rd.init_point(z);
    rd.polish(z);

    const bool debug = std::getenv("EPIGAME_DEBUG") != nullptr;
    long back_evals = 0;
    SolveReport rep;
    FlowEval ev = evaluate(rd, z, cfg);
    rep.max_violation = ev.hmax;
    rep.mu_max = ev.mu_max;
    double t = 0.0, eta = cfg.step;
    int step = 0;
    rep.lyapunov_trace.emplace_back(0.0, ev.V);
    while (t < cfg.max_time) {
        if (ev.fmax < cfg.conv_tol) {
            rep.converged = true;
            break;
        }
        Vec znew(rd.dim);
        FlowEval evn;
        bool forced = false;
        for (;;) {
            znew = z;
            for (int i = 0; i < rd.dim; ++i) znew[i] += eta * ev.f[i];
            rd.polish(znew, &ev.mu_of_row);
            evn = evaluate(rd, znew, cfg, &ev);
            ++back_evals;
            if (debug && step > 1200 && back_evals < 200000 &&
                evn.V > ev.V * (1.0 + 1e-9) + 1e-12) {
                std::printf("[rej] step=%d eta=%.2e dV=%+.3e act %zu->%zu mu(B)=%d mu(T)=%d lost:",
                            step, eta, evn.V - ev.V, ev.active.size(), evn.active.size(),
                            (int)ev.mu.size(), (int)evn.mu.size());
                for (size_t j = 0; j < rd.rows.size(); ++j)
                    if (ev.member[j] && !evn.member[j])
                        std::printf(" %zu[%s](mu=%.2e h=%.2e)", j, rd.labels[j].c_str(),
                                    ev.mu_of_row[j], rd.row_value(rd.rows[j], evn.cache));
                std::printf("\n");
            }
            if (evn.V <= ev.V * (1.0 + 1e-9) + 1e-12) break;
            if (eta <= 1e-9) {
                forced = true;
                break;
            }
            eta *= 0.5;
        }
        if (forced && evn.V > ev.V + 1e-8) ++rep.lyapunov_violations;
        z.swap(znew);
        t += eta;
        ++step;
        ev = std::move(evn);
        rep.max_violation = std::max(rep.max_violation, ev.hmax);
        rep.mu_max = std::max(rep.mu_max, ev.mu_max);
        if (step % cfg.trace_stride == 0 || ev.fmax < cfg.conv_tol)
            rep.lyapunov_trace.emplace_back(t, ev.V);
        eta = std::min(eta * 1.3, cfg.step_max);
        if (debug && step % 500 == 0) {
            std::printf("[flow] step=%d t=%.4g eta=%.2e V=%.6e fmax=%.2e act=%zu backev=%ld\n",
                        step, t, eta, ev.V, ev.fmax, ev.active.size(), back_evals);
            {
                int am = 0;
                for (int i = 0; i < rd.dim; ++i)
                    if (std::fabs(ev.f[i]) > std::fabs(ev.f[am])) am = i;
                std::printf("  fargmax=%d (oy<%d ov<%d ol<%d) f=%+.3e z=%.4f lo=%.4f hi=%.4f\n",
                            am, rd.ov, rd.ol, rd.ox, ev.f[am], z[am], rd.lo[am], rd.hi[am]);
            }
            if (step % 2000 == 0) {
                for (size_t j = 0; j < rd.rows.size(); ++j) {
                    const double h = rd.row_value(rd.rows[j], ev.cache);
                    std::printf("  row %zu [%s] h=%+.3e mu=%+.3e\n", j, rd.labels[j].c_str(), h,
                                ev.mu_of_row[j]);
                }
            }
            std::fflush(stdout);
        }
    }
    rep.flow_time = t;
    rep.steps = step;
    rep.grad_norm = ev.fmax;
    rep.active_rows = ev.active;
    for (int j : ev.active) rep.active_labels.push_back(rd.labels[j]);
    rep.xi_star = reduced_to_aux(rd, z);
    rep.act_star = from_aux(scn, rep.xi_star);
    rep.kkt_residual = kkt_residual(scn, rep.xi_star, rd.delta);
    rep.objective = sum_cost(scn, rep.act_star);
    return rep;
}

}  // namespace

SolveReport solve_gne(const Scenario& scn, const SolverConfig& cfg, const FixedMask* fixed) {
    return run_flow(scn, cfg, fixed, false);
}

SolveReport solve_central(const Scenario& scn, const SolverConfig& cfg) {
    return run_flow(scn, cfg, nullptr, true);
}

double kkt_residual(const Scenario& scn, const AuxPoint& xi, const Vec& delta_bar) {
    Reduced rd;
    rd.build(scn, nullptr, false, delta_bar);
    Vec z;
    set_reduced_from_aux(rd, xi, z);
    Reduced::Cache c = rd.cache(z);
    Vec g = rd.grad(z, c);

    const double tol = 1e-8;
    double feas = 0.0;
    std::vector<Col> cols;
    Vec hact;
    for (size_t j = 0; j < rd.rows.size(); ++j) {
        const double h = rd.row_value(rd.rows[j], c);
        feas = std::max(feas, h);
        if (h > -tol) {
            Col col = rd.row_grad(rd.rows[j], c);
            if (!col.empty()) {
                cols.push_back(std::move(col));
                hact.push_back(h);
            }
        }
    }
    for (int i = 0; i < rd.dim; ++i) {
        feas = std::max(feas, rd.lo[i] - z[i]);
        feas = std::max(feas, z[i] - rd.hi[i]);
        if (z[i] < rd.lo[i] + tol) {
            cols.push_back({{i, -1.0}});
            hact.push_back(rd.lo[i] - z[i]);
        }
        if (z[i] > rd.hi[i] - tol) {
            cols.push_back({{i, 1.0}});
            hact.push_back(z[i] - rd.hi[i]);
        }
    }
    const int mb = static_cast<int>(cols.size());
    Vec mu(mb, 0.0);
    if (mb > 0) {
        Mat gram(mb, mb);
        Vec rhs(mb, 0.0);
        for (int a = 0; a < mb; ++a) {
            for (int b = a; b < mb; ++b) gram(a, b) = gram(b, a) = sparse_dot(cols[a], cols[b]);
            double s = 0.0;
            for (auto [i, v] : cols[a]) s += v * g[i];
            rhs[a] = s;
        }
        mu = cholesky_solve(gram, rhs, 1e-10);
        for (double& m : mu) m = std::min(m, 0.0);
    }
    Vec f = g;
    for (double& x : f) x = -x;
    for (int a = 0; a < mb; ++a)
        for (auto [i, v] : cols[a]) f[i] += mu[a] * v;
    double slack = 0.0;
    for (int a = 0; a < mb; ++a) slack += mu[a] * hact[a];
    return std::max({feas, std::fabs(slack), max_abs(f)});
}

// ---------------------------------------------------------------------------
// grid oracles for tiny instances
// ---------------------------------------------------------------------------

namespace {

double rho_closed(const Mat& m) {
    if (m.rows() == 1) return m(0, 0);
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

struct GridAxes {
    // free coordinates of one player: u edges then v edges (n-major)
    struct Axis {
        bool is_u;
        int n, k, l;
        Vec values;
    };
    std::vector<std::vector<Axis>> per_player;
};

GridAxes make_axes(const Scenario& s, int grid_points) {
    if (s.K > 2 || s.N > 1) throw std::invalid_argument("grid oracle: K <= 2 and N <= 1 only");
    if (grid_points < 2 || grid_points > 64)
        throw std::invalid_argument("grid oracle: 2 <= grid_points <= 64");
    GridAxes axes;
    axes.per_player.resize(s.K);
    auto linspace = [&](double a, double b) {
        Vec v(grid_points);
        for (int i = 0; i < grid_points; ++i)
            v[i] = a + (b - a) * i / (grid_points - 1);
        return v;
    };
    double combos_worst = 1.0;
    for (int k = 0; k < s.K; ++k) {
        // degenerate boxes are not decision axes
        for (int l = 0; l < s.K; ++l)
            if (s.epi_adj(k, l) && s.B0(k, l) > 0.0 && s.u_max(k, l) - s.u_min(k, l) > 1e-15)
                axes.per_player[k].push_back({true, 0, k, l, linspace(s.u_min(k, l), s.u_max(k, l))});
        for (int n = 0; n <= s.N; ++n)
            for (int l = 0; l < s.K; ++l)
                if (s.inf_adj[n](k, l) && s.v_max(k, l) - s.v_min(k, l) > 1e-15)
                    axes.per_player[k].push_back(
                        {false, n, k, l, linspace(s.v_min(k, l), s.v_max(k, l))});
        combos_worst = std::max(combos_worst, std::pow(grid_points, axes.per_player[k].size()));
    }
    if (combos_worst > 2.1e6)
        throw std::invalid_argument("grid oracle: per-player grid too large");
    return axes;
}

// Direct cost evaluation for the oracle, independent of the solver path:
// closed-form spectral radius, explicit opinion recursion.
Vec oracle_costs(const Scenario& s, const ActionProfile& act) {
    const int K = s.K, N = s.N;
    std::vector<Vec> th = opinion_path(s, act.V);
    Vec rho(N + 2, 0.0);
    for (int m = 0; m <= N + 1; ++m) {
        Mat mat(K, K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                mat(k, l) = (s.B0(k, l) - act.U(k, l) + th[m][k] * s.Bhat(k, l)) / s.gamma[k];
        rho[m] = rho_closed(mat);
    }
    Vec J(K, 0.0);
    for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        for (int l = 0; l < K; ++l) {
            if (!s.epi_adj(k, l) || s.B0(k, l) <= 0.0) continue;
            acc += -s.weights.a[k] * std::log(1.0 - act.U(k, l) / s.B0(k, l));
            for (int m = 0; m <= N + 1; ++m)
                acc += s.weights.b_local[k] *
                       (s.B0(k, l) - act.U(k, l) + th[m][k] * s.Bhat(k, l)) / s.gamma[k];
        }
        for (int m = 0; m <= N + 1; ++m)
            acc += s.weights.b_global[k] * rho[m] + s.weights.d[k] * th[m][k];
        for (int n = 0; n <= N; ++n)
            for (int l = 0; l < K; ++l)
                if (s.inf_adj[n](k, l)) acc += -s.weights.c[k] * std::log(act.V[n](k, l));
        J[k] = acc;
    }
    return J;
}

bool grid_feasible(const Scenario& s, const ActionProfile& act, bool any_budget) {
    if (!any_budget) return true;
    for (const LabeledResidual& r : constraint_residuals(s, act))
        if (r.value > 1e-12 && r.value != kUnboundedResidual) return false;
    return true;
}

ActionProfile apply_axes(const Scenario& s, const GridAxes& axes,
                         const std::vector<std::vector<int>>& idx) {
    ActionProfile act = neutral_actions(s);
    for (int k = 0; k < s.K; ++k)
        for (size_t a = 0; a < axes.per_player[k].size(); ++a) {
            const auto& ax = axes.per_player[k][a];
            const double val = ax.values[idx[k][a]];
            if (ax.is_u)
                act.U(ax.k, ax.l) = val;
            else
                act.V[ax.n](ax.k, ax.l) = val;
        }
    return act;
}

bool any_finite_budget(const Scenario& s) {
    for (double b : s.budgets.phi)
        if (b != kUnbounded) return true;
    for (double b : s.budgets.r_max)
        if (b != kUnbounded) return true;
    for (double b : s.budgets.theta_max)
        if (b != kUnbounded) return true;
    for (int k = 0; k < s.K; ++k)
        for (int n = 0; n <= s.N; ++n)
            if (s.budgets.psi_hat(k, n) != kUnbounded) return true;
    return false;
}

}  // namespace

std::optional<ActionProfile> brute_force_gne(const Scenario& s, int grid_points) {
    const GridAxes axes = make_axes(s, grid_points);
    const bool budgets = any_finite_budget(s);
    std::vector<std::vector<int>> idx(s.K);
    for (int k = 0; k < s.K; ++k) idx[k].assign(axes.per_player[k].size(), grid_points / 2);

    auto encode = [&]() {
        std::string key;
        for (auto& v : idx)
            for (int i : v) key += std::to_string(i) + ",";
        return key;
    };
    std::set<std::string> seen;
    for (int round = 0; round < 1000; ++round) {
        bool changed = false;
        for (int k = 0; k < s.K; ++k) {
            const size_t na = axes.per_player[k].size();
            std::vector<int> best = idx[k];
            double best_cost = 1e300;
            std::vector<int> probe(na, 0);
            for (;;) {
                std::vector<std::vector<int>> cand = idx;
                cand[k] = probe;
                const ActionProfile act = apply_axes(s, axes, cand);
                if (grid_feasible(s, act, budgets)) {
                    const double jk = oracle_costs(s, act)[k];
                    if (jk < best_cost - 1e-15) {
                        best_cost = jk;
                        best = probe;
                    }
                }
                size_t d = 0;
                while (d < na && ++probe[d] == grid_points) probe[d++] = 0;
                if (d == na) break;
            }
            if (best != idx[k]) {
                idx[k] = best;
                changed = true;
            }
        }
        if (!changed) return apply_axes(s, axes, idx);
        const std::string key = encode();
        if (!seen.insert(key).second) return std::nullopt;  // best-response cycle
    }
    return std::nullopt;
}

ActionProfile brute_force_central(const Scenario& s, int grid_points) {
    const GridAxes axes = make_axes(s, grid_points);
    const bool budgets = any_finite_budget(s);
    // joint enumeration over all players
    std::vector<const GridAxes::Axis*> flat;
    for (auto& pa : axes.per_player)
        for (auto& a : pa) flat.push_back(&a);
    const size_t na = flat.size();
    if (std::pow(grid_points, na) > 2.1e7)
        throw std::invalid_argument("brute_force_central: joint grid too large");
    std::vector<int> probe(na, 0);
    double best = 1e300;
    std::vector<int> best_probe = probe;
    for (;;) {
        ActionProfile act = neutral_actions(s);
        for (size_t a = 0; a < na; ++a) {
            const auto& ax = *flat[a];
            if (ax.is_u)
                act.U(ax.k, ax.l) = ax.values[probe[a]];
            else
                act.V[ax.n](ax.k, ax.l) = ax.values[probe[a]];
        }
        if (grid_feasible(s, act, budgets)) {
            const Vec J = oracle_costs(s, act);
            double sum = 0.0;
            for (double j : J) sum += j;
            if (sum < best - 1e-15) {
                best = sum;
                best_probe = probe;
            }
        }
        size_t d = 0;
        while (d < na && ++probe[d] == grid_points) probe[d++] = 0;
        if (d == na) break;
    }
    probe = best_probe;
    ActionProfile act = neutral_actions(s);
    for (size_t a = 0; a < na; ++a) {
        const auto& ax = *flat[a];
        if (ax.is_u)
            act.U(ax.k, ax.l) = ax.values[probe[a]];
        else
            act.V[ax.n](ax.k, ax.l) = ax.values[probe[a]];
    }
    return act;
}

}  // namespace epigame
