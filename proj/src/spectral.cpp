#include "epigame/spectral.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace epigame {

namespace {

// Tarjan strongly-connected-components, iterative. Returns the SCC count.
int scc_count(const Mat& m) {
    const int n = m.rows();
    std::vector<int> index(n, -1), low(n, 0), on(n, 0), stk;
    std::vector<std::pair<int, int>> call;  // (node, next-neighbor)
    int next_index = 0, comps = 0;
    for (int s = 0; s < n; ++s) {
        if (index[s] >= 0) continue;
        call.emplace_back(s, 0);
        index[s] = low[s] = next_index++;
        stk.push_back(s);
        on[s] = 1;
        while (!call.empty()) {
            auto& [v, j] = call.back();
            if (j < n) {
                const int w = j++;
                if (m(v, w) == 0.0) continue;
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stk.push_back(w);
                    on[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
            } else {
                if (low[v] == index[v]) {
                    ++comps;
                    for (;;) {
                        const int w = stk.back();
                        stk.pop_back();
                        on[w] = 0;
                        if (w == v) break;
                    }
                }
                const int vdone = v;
                call.pop_back();
                if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vdone]);
            }
        }
    }
    return comps;
}


// Solves (sigma I - m) x = b by Gaussian elimination with partial pivoting.
// For sigma above the spectral radius the system is an M-matrix, so the
// solution keeps the sign structure needed by inverse iteration.
bool resolvent_solve(const Mat& m, double sigma, Vec& x) {
    const int n = m.rows();
    Mat a(n, n + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = (i == j ? sigma : 0.0) - m(i, j);
        a(i, n) = x[i];
    }
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a(r, c)) > std::fabs(a(p, c))) p = r;
        if (a(p, c) == 0.0) return false;
        if (p != c)
            for (int j = c; j <= n; ++j) std::swap(a(p, j), a(c, j));
        for (int r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            if (f == 0.0) continue;
            for (int j = c; j <= n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = a(r, n);
        for (int j = r + 1; j < n; ++j) s -= a(r, j) * x[j];
        x[r] = s / a(r, r);
    }
    return true;
}

double eigen_residual(const Mat& m, const Vec& v, double rho) {
    Vec mv = matvec(m, v);
    double r = 0.0;
    for (size_t i = 0; i < v.size(); ++i) r = std::max(r, std::fabs(mv[i] - rho * v[i]));
    const double scale = std::max(rho, 1e-300);
    return r / scale;
}

}  // namespace

bool is_irreducible(const Mat& m) {
    const int n = m.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m(i, j) < 0.0) throw std::invalid_argument("is_irreducible: negative entry");
    return scc_count(m) == 1;
}

static std::atomic<long> g_perron_calls{0}, g_perron_iters{0};
static struct PerronStats {
    ~PerronStats() {
        if (std::getenv("EPIGAME_DEBUG"))
            std::fprintf(stderr, "[perron] calls=%ld iters=%ld\n", g_perron_calls.load(),
                         g_perron_iters.load());
    }
} g_perron_stats;

PerronData perron(const Mat& m) {
    const int n = m.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m(i, j) < 0.0) throw std::invalid_argument("perron: negative entry");

    // Shift by a fraction of the largest entry; periodic matrices (e.g. pure
    // cycles) do not converge without it.
    double amax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) amax = std::max(amax, m(i, j));
    const double eps = (amax > 0.0 ? 1e-3 * amax : 1e-3);
    Mat ms = m;
    for (int i = 0; i < n; ++i) ms(i, i) += eps;

    const int cap = 2000;
    const double target = 1e-13;

    auto iterate = [&](const Mat& a, Vec v, double& rho_out, int& it_out) {
        double rho = 0.0;
        int it = 0;
        double best = 1e300, best_mark = 1e300;
        Vec best_v = v;
        for (; it < cap; ++it) {
            Vec w = matvec(a, v);
            double s = 0.0;
            for (double x : w) s += x;
            if (s <= 0.0) break;
            for (double& x : w) x /= s;
            rho = s;  // since v sums to one, sum(Av) is the Rayleigh-like estimate
            const double res = eigen_residual(a, w, rho);
            v = w;
            if (res < best) {
                best = res;
                best_v = v;
            }
            if (res < target) break;
            // nearly-tied dominant eigenvalues (1e-10 adjacency floors) leave
            // a residual plateau; stop once no real progress is being made
            if (it % 2000 == 1999) {
                if (best > 0.5 * best_mark) break;
                best_mark = best;
            }
        }
        rho_out = rho;
        it_out = it;
        return best_v;
    };

    // power iteration, then shifted inverse iteration to split eigenvalue
    // clusters created by the 1e-10 adjacency floors
    auto refine = [&](const Mat& a, Vec v, int& iters) {
        double rho = 0.0;
        for (int pass = 0; pass < 250; ++pass) {
            Vec w = matvec(a, v);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < n; ++i) {
                num += w[i] * v[i];
                den += v[i] * v[i];
            }
            rho = num / den;
            if (eigen_residual(a, v, rho) < 1e-14) break;
            const double sigma = rho * (1.0 + std::max(0.2 * eigen_residual(a, v, rho), 1e-13));
            Vec x = v;
            if (!resolvent_solve(a, sigma, x)) break;
            double s = 0.0;
            for (double& c : x) {
                c = std::max(c, 0.0);
                s += c;
            }
            if (s <= 0.0) break;
            for (double& c : x) c /= s;
            v = std::move(x);
            ++iters;
        }
        return v;
    };

    Vec v0(n, 1.0 / n);
    double rho_s = 0.0;
    int its = 0;
    Vec right = iterate(ms, v0, rho_s, its);
    if (eigen_residual(ms, right, rho_s) > target) right = refine(ms, right, its);
    double sum = 0.0;
    for (double x : right) sum += x;
    for (double& x : right) x /= sum;
    {
        Vec w = matvec(ms, right);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            num += w[i] * right[i];
            den += right[i] * right[i];
        }
        rho_s = num / den;
    }

    // Left vector from the transpose, same shift.
    Mat mt(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mt(i, j) = ms(j, i);
    double rho_l = 0.0;
    int itl = 0;
    Vec left = iterate(mt, v0, rho_l, itl);
    if (eigen_residual(mt, left, rho_l) > target) left = refine(mt, left, itl);

    PerronData out;
    out.rho = rho_s - eps;
    out.right = right;
    const double lr = dot(left, right);
    if (lr <= 0.0) throw NumericalError("perron: degenerate left/right pair");
    for (double& x : left) x /= lr;
    out.left = left;
    out.iterations = its + itl;
    ++g_perron_calls;
    g_perron_iters += out.iterations;
    out.residual = eigen_residual(m, right, out.rho);
    // matrices with floor-level coupling between tied blocks plateau around
    // the floor/rho ratio; 1e-8 is still far below every downstream tolerance
    if (out.residual > 1e-8) {
        if (std::getenv("EPIGAME_DEBUG")) {
            std::fprintf(stderr, "[perron fail] res=%.3e rho=%.6e n=%d iters=%d\n", out.residual,
                         out.rho, n, out.iterations);
            for (int i = 0; i < n && i < 4; ++i) {
                for (int j = 0; j < n && j < 4; ++j) std::fprintf(stderr, "%.3e ", m(i, j));
                std::fprintf(stderr, "\n");
            }
        }
        throw NumericalError("perron: power iteration did not converge", out.residual);
    }
    return out;
}

Mat rho_gradient(const Mat& m) {
    PerronData p = perron(m);
    const int n = m.rows();
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = p.left[i] * p.right[j];
    return g;
}

}  // namespace epigame
