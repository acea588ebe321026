#pragma once

#include "epigame/scenario.hpp"

namespace epigame {

/// Lower bound for the auxiliary eigenvector box: x_l(m) >= kEpsX. Small
/// enough that no Perron component of the scenario corner matrices is cut.
inline constexpr double kEpsX = 1e-6;

/// One opinion-product variable omega_{k l_n ... l_0}(n): the walk starts at
/// k, takes edge (k,l_n) in slice n, then (l_n,l_{n-1}) in slice n-1, down to
/// (l_1,l_0) in slice 0. nodes.size() == n+2.
struct PathIndex {
    int n = 0;
    std::vector<int> nodes;
};

/// All graph-feasible paths in a fixed order: grouped by root region, then by
/// campaign index, then lexicographic in the node sequence.
struct PathTable {
    int K = 0, N = 0;
    std::vector<PathIndex> paths;
    Vec alpha;                   // per path, product of P weights along it
    std::vector<int> theta_src;  // per path, l_0
    // slice[k][n] = [begin,end) range of paths rooted at k with campaign index n
    std::vector<std::vector<std::pair<int, int>>> slice;
    // tele[n][k*K+l] = index of the root-padded path (k,l,k,...,k), or -1
    std::vector<std::vector<int>> tele;
    // tele_b[n][a*K+b] = index of the suffix-padded path (a,b,b,...,b), or -1;
    // the pair telescopes: omega(k,l,k..k)(n) - omega(l,k..k)(n-1) = log v_kl(n)
    std::vector<std::vector<int>> tele_b;
};

PathTable enumerate_paths(const Scenario& scn);

/// Log-domain auxiliary decision point.
struct AuxPoint {
    Mat xi_y;       // K x K, log(beta0 - u); entries off the epidemic graph unused
    Vec xi_w;       // one per PathTable path, log omega
    Vec xi_lambda;  // N+2
    Mat xi_x;       // (N+2) x K
};

/// Flat coordinate layout shared by gradients: the y block (one coordinate
/// per epidemic edge with beta0 > 0), then the omega block (PathTable order),
/// then lambda, then x (m-major).
struct AuxSpace {
    PathTable table;
    std::vector<std::pair<int, int>> y_edges;
    Mat y_slot;  // K x K -> flat y index, -1 off-graph
    int K = 0, N = 0;
    int ny() const { return static_cast<int>(y_edges.size()); }
    int nw() const { return static_cast<int>(table.paths.size()); }
    int nl() const { return N + 2; }
    int nx() const { return (N + 2) * K; }
    int dim() const { return ny() + nw() + nl() + nx(); }
    int w_at(int path) const { return ny() + path; }
    int l_at(int m) const { return ny() + nw() + m; }
    int x_at(int m, int l) const { return ny() + nw() + nl() + m * K + l; }
};

AuxSpace aux_space(const Scenario& scn);

Vec aux_pack(const AuxSpace& sp, const AuxPoint& p);
AuxPoint aux_unpack(const AuxSpace& sp, const Vec& z);

/// Bounds [rho_min, rho_max] for the lambda box. When B0 - u_max is
/// reducible the lower matrix is floored at 1e-10 and `floored` is set.
struct RhoBounds {
    double rho_min = 0.0, rho_max = 0.0;
    bool floored = false;
};
RhoBounds rho_box_bounds(const Scenario& scn);

/// Change of variables into the auxiliary game; (lambda, x) are filled with
/// the Perron pair of each induced matrix so the epigraph rows hold with
/// equality. Requires act strictly interior to the logarithm domains.
AuxPoint to_aux(const Scenario& scn, const ActionProfile& act);

/// Inverse map; throws std::runtime_error if the telescoped v violate the
/// action boxes by more than 1e-8.
ActionProfile from_aux(const Scenario& scn, const AuxPoint& xi);

/// Posynomial opinion drift: theta~(0) = theta0 and
/// theta~_k(m) = sum over slice(k,m-1) of alpha * exp(xi_w) * theta0(l_0).
std::vector<Vec> theta_tilde(const Scenario& scn, const AuxPoint& xi);

/// Auxiliary costs J~_1..J~_K and the epigraph player J~_{K+1}.
Vec aux_costs(const Scenario& scn, const AuxPoint& xi);

struct ConstraintRow {
    std::string label;
    double value = 0.0;                        // <= 0 feasible
    std::vector<std::pair<int, double>> grad;  // sparse over the AuxSpace layout
};

/// The jointly convex constraint map: eigen-inequality rows, simplex rows,
/// the lambda/x/y/omega boxes, opinion caps, local reproduction caps, budget
/// rows, and the telescoped v-box rows that keep recovered actions inside
/// their boxes. Order is fixed; unbounded budgets contribute no row.
std::vector<ConstraintRow> aux_constraints(const Scenario& scn, const AuxPoint& xi);

/// Per-player own-block gradients of the auxiliary costs, sparse over the
/// AuxSpace layout. Entry K is the epigraph player (nonzero only on lambda).
std::vector<std::vector<std::pair<int, double>>> aux_cost_gradients(const Scenario& scn,
                                                                    const AuxPoint& xi);

/// (xi1 - xi0) . (g(xi1,delta) - g(xi0,delta)) with g the stacked
/// delta-weighted pseudo-gradient; positive iff the pair witnesses diagonal
/// strict convexity.
double dsc_check(const Scenario& scn, const AuxPoint& xi0, const AuxPoint& xi1, const Vec& delta);

}  // namespace epigame
