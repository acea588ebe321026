#include "epigame/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "epigame/spectral.hpp"

namespace epigame {

namespace {

const double kAdjFloor = 1e-10;  // keeps masked transmission matrices irreducible

void check(std::vector<Violation>& out, bool ok, const std::string& code,
           const std::string& detail) {
    if (!ok) out.push_back({code, detail});
}

Mat corner_matrix(const Scenario& s, const Mat& u, double theta) {
    Mat m(s.K, s.K);
    for (int k = 0; k < s.K; ++k)
        for (int l = 0; l < s.K; ++l)
            m(k, l) = (s.B0(k, l) - u(k, l) + theta * s.Bhat(k, l)) / s.gamma[k];
    return m;
}

}  // namespace

std::vector<Violation> validate(const Scenario& s) {
    std::vector<Violation> v;
    const int K = s.K, N = s.N;
    if (K <= 0 || N < 0) {
        v.push_back({"dimension", "K must be positive and N non-negative"});
        return v;
    }
    auto dims_ok = [&](const Mat& m) { return m.rows() == K && m.cols() == K; };
    bool shapes = dims_ok(s.B0) && dims_ok(s.Bhat) && dims_ok(s.u_min) && dims_ok(s.u_max) &&
                  dims_ok(s.v_min) && dims_ok(s.v_max) && s.gamma.size() == size_t(K) &&
                  s.epi_adj.size() == K && s.inf_adj.size() == size_t(N + 1) &&
                  s.P.size() == size_t(N + 1) && s.s0.size() == size_t(K) &&
                  s.i0.size() == size_t(K) && s.r0.size() == size_t(K) &&
                  s.theta0.size() == size_t(K) && s.campaign_times.size() == size_t(N + 1) &&
                  s.weights.a.size() == size_t(K) && s.weights.b_local.size() == size_t(K) &&
                  s.weights.b_global.size() == size_t(K) && s.weights.c.size() == size_t(K) &&
                  s.weights.d.size() == size_t(K) && s.budgets.phi.size() == size_t(K) &&
                  s.budgets.psi_hat.rows() == K && s.budgets.psi_hat.cols() == N + 1 &&
                  s.budgets.r_max.size() == size_t(K) && s.budgets.theta_max.size() == size_t(K);
    for (const auto& a : s.inf_adj) shapes = shapes && a.size() == K;
    for (const auto& p : s.P) shapes = shapes && dims_ok(p);
    if (!shapes) {
        v.push_back({"dimension", "field shapes inconsistent with K/N"});
        return v;
    }

    check(v, s.horizon_days > 0.0, "horizon", "horizon_days must be positive");
    bool times_ok = s.campaign_times[0] == 0.0;
    for (int n = 0; n + 1 <= N; ++n)
        times_ok = times_ok && s.campaign_times[n] < s.campaign_times[n + 1];
    times_ok = times_ok && s.campaign_times[N] < s.horizon_days;
    check(v, times_ok, "campaign-times", "need 0 = t_0 < t_1 < ... < t_N < T");

    for (int k = 0; k < K; ++k) {
        check(v, s.gamma[k] > 0.0, "gamma-positive", "region " + std::to_string(k));
        check(v, std::fabs(s.s0[k] + s.i0[k] + s.r0[k] - 1.0) <= 1e-12, "simplex-s0i0r0",
              "region " + std::to_string(k));
        check(v,
              s.s0[k] >= 0 && s.s0[k] <= 1 && s.i0[k] >= 0 && s.i0[k] <= 1 && s.r0[k] >= 0 &&
                  s.r0[k] <= 1,
              "state-range", "region " + std::to_string(k));
        check(v, s.theta0[k] >= 0 && s.theta0[k] <= 1, "theta0-range",
              "region " + std::to_string(k));
        check(v,
              s.weights.a[k] >= 0 && s.weights.b_local[k] >= 0 && s.weights.b_global[k] >= 0 &&
                  s.weights.c[k] >= 0 && s.weights.d[k] >= 0,
              "weights-nonneg", "region " + std::to_string(k));
        check(v, s.weights.b_global[k] > 0.0, "b-global-positive", "region " + std::to_string(k));
    }

    // Assumption 1(i)
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l)
            check(v, (s.B0(k, l) == 0.0) == (s.Bhat(k, l) == 0.0), "assumption-1-i",
                  "entry (" + std::to_string(k) + "," + std::to_string(l) + ")");

    // Assumption 1(ii): rows of P(n) sum to one over the neighbor set
    for (int n = 0; n <= N; ++n)
        for (int k = 0; k < K; ++k) {
            double sum = 0.0;
            bool any = false;
            for (int l = 0; l < K; ++l)
                if (s.inf_adj[n](k, l)) {
                    any = true;
                    sum += s.P[n](k, l);
                    check(v, s.P[n](k, l) >= 0.0, "assumption-1-ii",
                          "negative weight, P(" + std::to_string(n) + ") row " + std::to_string(k));
                }
            if (any)
                check(v, std::fabs(sum - 1.0) <= 1e-9, "assumption-1-ii",
                      "P(" + std::to_string(n) + ") row " + std::to_string(k) + " sums to " +
                          std::to_string(sum));
        }

    // action boxes
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            if (s.epi_adj(k, l)) {
                check(v,
                      0.0 <= s.u_min(k, l) && s.u_min(k, l) <= s.u_max(k, l) &&
                          s.u_max(k, l) <= s.B0(k, l),
                      "box-u", "edge (" + std::to_string(k) + "," + std::to_string(l) + ")");
            } else {
                check(v, s.u_min(k, l) == 0.0 && s.u_max(k, l) == 0.0, "box-u",
                      "nonzero bound off the epidemic graph at (" + std::to_string(k) + "," +
                          std::to_string(l) + ")");
            }
            check(v,
                  0.0 < s.v_min(k, l) && s.v_min(k, l) <= s.v_max(k, l) && s.v_max(k, l) <= 1.0,
                  "box-v", "entry (" + std::to_string(k) + "," + std::to_string(l) + ")");
        }

    // Assumption 1(iii) at the four corners
    for (int cu = 0; cu < 2; ++cu)
        for (int ct = 0; ct < 2; ++ct) {
            Mat m = corner_matrix(s, cu ? s.u_max : s.u_min, ct ? 1.0 : 0.0);
            bool nonneg = true;
            for (int k = 0; k < K && nonneg; ++k)
                for (int l = 0; l < K && nonneg; ++l) nonneg = m(k, l) >= 0.0;
            const std::string corner = std::string(cu ? "u_max" : "u_min") + "/theta=" +
                                       (ct ? "1" : "0");
            check(v, nonneg, "assumption-1-iii-nonneg", corner);
            if (nonneg)
                check(v, is_irreducible(m), "assumption-1-iii-irreducible", corner);
        }

    // The auxiliary-game path telescoping needs self-loops and reverse edges
    // one campaign earlier; without them v cannot be recovered from omega.
    if (N >= 1) {
        bool ok = true;
        std::string where;
        for (int n = 0; n <= N && ok; ++n)
            for (int k = 0; k < K && ok; ++k) {
                if (!s.inf_adj[n](k, k)) {
                    ok = false;
                    where = "missing self-loop, slice " + std::to_string(n) + " region " +
                            std::to_string(k);
                }
            }
        for (int n = 1; n <= N && ok; ++n)
            for (int k = 0; k < K && ok; ++k)
                for (int l = 0; l < K && ok; ++l)
                    if (s.inf_adj[n](k, l) && !s.inf_adj[n - 1](l, k)) {
                        ok = false;
                        where = "edge (" + std::to_string(k) + "," + std::to_string(l) +
                                ") at slice " + std::to_string(n) + " lacks reverse edge at " +
                                std::to_string(n - 1);
                    }
        check(v, ok, "influence-telescope", where);
    }
    return v;
}

// ---------------------------------------------------------------------------
// file format: one key per line, values whitespace-separated, row-major
// matrices, "inf" for unbounded budgets, '#' starts a comment line.
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double x) {
    if (x == kUnbounded) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_vec(std::ostream& os, const std::string& key, const Vec& v) {
    os << key;
    for (double x : v) os << ' ' << fmt(x);
    os << '\n';
}

void write_mat(std::ostream& os, const std::string& key, const Mat& m) {
    os << key;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) os << ' ' << fmt(m(i, j));
    os << '\n';
}

void write_adj(std::ostream& os, const std::string& key, const Adj& a) {
    os << key;
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j) os << ' ' << (a(i, j) ? 1 : 0);
    os << '\n';
}

struct RawFile {
    std::map<std::string, std::pair<Vec, int>> fields;  // key -> (values, line)

    const Vec& get(const std::string& key, size_t want) const {
        auto it = fields.find(key);
        if (it == fields.end()) throw ParseError("missing field '" + key + "'", 0);
        if (it->second.first.size() != want)
            throw DimensionError("field '" + key + "' has " +
                                 std::to_string(it->second.first.size()) + " values, expected " +
                                 std::to_string(want));
        return it->second.first;
    }
    bool has(const std::string& key) const { return fields.count(key) != 0; }
};

Mat to_mat(const Vec& v, int r, int c) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = v[static_cast<size_t>(i) * c + j];
    return m;
}

Adj to_adj(const Vec& v, int n) {
    Adj a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.set(i, j, v[static_cast<size_t>(i) * n + j] != 0.0);
    return a;
}

}  // namespace

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << "# epigame scenario\n";
    os << "K " << s.K << "\nN " << s.N << "\n";
    os << "horizon_days " << fmt(s.horizon_days) << "\n";
    write_vec(os, "campaign_times", s.campaign_times);
    write_mat(os, "B0", s.B0);
    write_mat(os, "Bhat", s.Bhat);
    write_vec(os, "gamma", s.gamma);
    write_adj(os, "epi_adj", s.epi_adj);
    for (int n = 0; n <= s.N; ++n) write_adj(os, "inf_adj." + std::to_string(n), s.inf_adj[n]);
    for (int n = 0; n <= s.N; ++n) write_mat(os, "P." + std::to_string(n), s.P[n]);
    write_mat(os, "u_min", s.u_min);
    write_mat(os, "u_max", s.u_max);
    write_mat(os, "v_min", s.v_min);
    write_mat(os, "v_max", s.v_max);
    write_vec(os, "weights.a", s.weights.a);
    write_vec(os, "weights.b_local", s.weights.b_local);
    write_vec(os, "weights.b_global", s.weights.b_global);
    write_vec(os, "weights.c", s.weights.c);
    write_vec(os, "weights.d", s.weights.d);
    write_vec(os, "budgets.phi", s.budgets.phi);
    write_mat(os, "budgets.psi_hat", s.budgets.psi_hat);
    write_vec(os, "budgets.R_max", s.budgets.r_max);
    write_vec(os, "budgets.theta_max", s.budgets.theta_max);
    write_vec(os, "s0", s.s0);
    write_vec(os, "i0", s.i0);
    write_vec(os, "r0", s.r0);
    write_vec(os, "theta0", s.theta0);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open '" + path + "'", 0);
    RawFile raw;
    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key) || key[0] == '#') continue;
        any = true;
        Vec vals;
        std::string tok;
        while (ss >> tok) {
            if (tok == "inf" || tok == "+inf") {
                vals.push_back(kUnbounded);
            } else {
                try {
                    size_t used = 0;
                    double d = std::stod(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                    vals.push_back(d);
                } catch (const std::exception&) {
                    throw ParseError("bad number '" + tok + "' in field '" + key + "'", lineno);
                }
            }
        }
        raw.fields[key] = {vals, lineno};
    }
    if (!any) throw ParseError("empty scenario file", 0);

    Scenario s;
    const Vec& kv = raw.get("K", 1);
    const Vec& nv = raw.get("N", 1);
    s.K = static_cast<int>(kv[0]);
    s.N = static_cast<int>(nv[0]);
    if (s.K <= 0 || s.N < 0) throw ParseError("K must be positive, N non-negative", 0);
    const int K = s.K, N = s.N;
    const size_t kk = static_cast<size_t>(K) * K;

    s.horizon_days = raw.get("horizon_days", 1)[0];
    s.campaign_times = raw.get("campaign_times", N + 1);
    s.B0 = to_mat(raw.get("B0", kk), K, K);
    s.Bhat = to_mat(raw.get("Bhat", kk), K, K);
    s.gamma = raw.get("gamma", K);
    s.epi_adj = to_adj(raw.get("epi_adj", kk), K);
    for (int n = 0; n <= N; ++n) {
        s.inf_adj.push_back(to_adj(raw.get("inf_adj." + std::to_string(n), kk), K));
        s.P.push_back(to_mat(raw.get("P." + std::to_string(n), kk), K, K));
    }
    s.u_min = to_mat(raw.get("u_min", kk), K, K);
    s.u_max = to_mat(raw.get("u_max", kk), K, K);
    s.v_min = to_mat(raw.get("v_min", kk), K, K);
    s.v_max = to_mat(raw.get("v_max", kk), K, K);
    s.weights.a = raw.get("weights.a", K);
    s.weights.b_local = raw.get("weights.b_local", K);
    s.weights.b_global = raw.get("weights.b_global", K);
    s.weights.c = raw.get("weights.c", K);
    s.weights.d = raw.get("weights.d", K);
    s.budgets.phi = raw.get("budgets.phi", K);
    if (raw.has("budgets.phi_hat") && !raw.has("budgets.psi_hat")) {
        // reciprocal influence budget: sum_l 1/v >= phi_hat; converted once to
        // the log form via the symmetric point v = deg/phi_hat.
        Mat ph = to_mat(raw.get("budgets.phi_hat", kk ? static_cast<size_t>(K) * (N + 1) : 0), K,
                        N + 1);
        s.budgets.psi_hat = Mat(K, N + 1, kUnbounded);
        for (int k = 0; k < K; ++k)
            for (int n = 0; n <= N; ++n) {
                if (ph(k, n) == kUnbounded) continue;
                int deg = 0;
                for (int l = 0; l < K; ++l)
                    if (s.inf_adj[n](k, l)) ++deg;
                if (deg > 0 && ph(k, n) > 0.0)
                    s.budgets.psi_hat(k, n) = deg * std::log(ph(k, n) / deg);
            }
    } else {
        s.budgets.psi_hat = to_mat(raw.get("budgets.psi_hat", static_cast<size_t>(K) * (N + 1)),
                                   K, N + 1);
    }
    s.budgets.r_max = raw.get("budgets.R_max", K);
    s.budgets.theta_max = raw.get("budgets.theta_max", K);
    s.s0 = raw.get("s0", K);
    s.i0 = raw.get("i0", K);
    s.r0 = raw.get("r0", K);
    s.theta0 = raw.get("theta0", K);
    return s;
}

// ---------------------------------------------------------------------------
// random regular graphs
// ---------------------------------------------------------------------------

namespace {

// Undirected d-regular graph on K vertices: circulant start, then randomized
// by double-edge swaps. Deterministic in the generator state.
std::vector<std::pair<int, int>> regular_graph(int K, int d, std::mt19937_64& rng) {
    std::vector<std::pair<int, int>> edges;
    Adj has(K);
    auto add = [&](int a, int b) {
        edges.emplace_back(a, b);
        has.set(a, b, true);
        has.set(b, a, true);
    };
    for (int step = 1; step <= d / 2; ++step)
        for (int k = 0; k < K; ++k) {
            int l = (k + step) % K;
            if (2 * step == K && k >= l) continue;  // antipodal pairs only once
            add(k, l);
        }
    if (edges.empty()) return edges;
    std::uniform_int_distribution<size_t> pick(0, edges.size() - 1);
    std::bernoulli_distribution flip(0.5);
    const long attempts = 400L * K * d;
    for (long t = 0; t < attempts; ++t) {
        size_t e1 = pick(rng), e2 = pick(rng);
        if (e1 == e2) continue;
        auto [a, b] = edges[e1];
        auto [c, dd] = edges[e2];
        if (flip(rng)) std::swap(c, dd);
        if (a == c || a == dd || b == c || b == dd) continue;
        if (has(a, c) || has(b, dd)) continue;
        has.set(a, b, false);
        has.set(b, a, false);
        has.set(c, dd, false);
        has.set(dd, c, false);
        has.set(a, c, true);
        has.set(c, a, true);
        has.set(b, dd, true);
        has.set(dd, b, true);
        edges[e1] = {a, c};
        edges[e2] = {b, dd};
    }
    return edges;
}

Adj degree_adjacency(int K, int degree, std::mt19937_64& rng) {
    if (degree >= K) return Adj::full(K);
    Adj adj = Adj::identity(K);
    for (auto [a, b] : regular_graph(K, degree, rng)) {
        adj.set(a, b, true);
        adj.set(b, a, true);
    }
    return adj;
}

}  // namespace

Scenario random_graph_scenario(const Scenario& base, int epi_degree, int inf_degree,
                               std::uint64_t seed) {
    const int K = base.K;
    auto feasible = [K](int d) { return d == 0 || d >= K || (d > 0 && d % 2 == 0 && d < K); };
    if (!feasible(epi_degree) || !feasible(inf_degree) || epi_degree < 0 || inf_degree < 0)
        throw std::invalid_argument("random_graph_scenario: degree must be 0, even and < K, or K");

    Scenario s = base;
    std::mt19937_64 rng_epi(seed_mix(seed, 1));
    std::mt19937_64 rng_inf(seed_mix(seed, 2));

    const Adj epi = degree_adjacency(K, epi_degree, rng_epi);
    s.epi_adj = epi;
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            const double mask = epi(k, l) ? 1.0 : kAdjFloor;
            s.B0(k, l) = base.B0(k, l) * mask;
            s.Bhat(k, l) = base.Bhat(k, l) * mask;
            s.u_min(k, l) = epi(k, l) ? base.u_min(k, l) : 0.0;
            s.u_max(k, l) = epi(k, l) ? base.u_max(k, l) : 0.0;
        }

    const Adj inf = inf_degree == 0 ? Adj::identity(K) : degree_adjacency(K, inf_degree, rng_inf);
    Mat p(K, K);
    for (int k = 0; k < K; ++k) {
        int deg = 0;
        for (int l = 0; l < K; ++l)
            if (inf(k, l)) ++deg;
        for (int l = 0; l < K; ++l) p(k, l) = inf(k, l) ? 1.0 / deg : 0.0;
    }
    for (int n = 0; n <= base.N; ++n) {
        s.inf_adj[n] = inf;
        s.P[n] = p;
    }
    return s;
}

ActionProfile neutral_actions(const Scenario& scn) {
    ActionProfile act;
    act.U = Mat(scn.K, scn.K, 0.0);
    for (int k = 0; k < scn.K; ++k)
        for (int l = 0; l < scn.K; ++l)
            if (scn.epi_adj(k, l)) act.U(k, l) = std::max(0.0, scn.u_min(k, l));
    for (int n = 0; n <= scn.N; ++n) {
        Mat v(scn.K, scn.K, 0.0);
        for (int k = 0; k < scn.K; ++k)
            for (int l = 0; l < scn.K; ++l)
                if (scn.inf_adj[n](k, l)) v(k, l) = scn.v_max(k, l);
        act.V.push_back(v);
    }
    return act;
}

bool actions_in_boxes(const Scenario& s, const ActionProfile& act, double tol) {
    for (int k = 0; k < s.K; ++k)
        for (int l = 0; l < s.K; ++l) {
            if (s.epi_adj(k, l)) {
                if (act.U(k, l) < s.u_min(k, l) - tol || act.U(k, l) > s.u_max(k, l) + tol)
                    return false;
            } else if (act.U(k, l) != 0.0) {
                return false;
            }
        }
    for (int n = 0; n <= s.N; ++n)
        for (int k = 0; k < s.K; ++k)
            for (int l = 0; l < s.K; ++l) {
                if (s.inf_adj[n](k, l)) {
                    if (act.V[n](k, l) < s.v_min(k, l) - tol ||
                        act.V[n](k, l) > s.v_max(k, l) + tol)
                        return false;
                } else if (act.V[n](k, l) != 0.0) {
                    return false;
                }
            }
    return true;
}

}  // namespace epigame
