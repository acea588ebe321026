#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "epigame/linalg.hpp"

namespace epigame {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Boolean adjacency, row k = neighbor set of region k.
class Adj {
public:
    Adj() = default;
    Adj(int n, bool fill = false) : n_(n), a_(static_cast<size_t>(n) * n, fill ? 1 : 0) {}
    static Adj full(int n) { return Adj(n, true); }
    static Adj identity(int n) {
        Adj a(n);
        for (int i = 0; i < n; ++i) a.set(i, i, true);
        return a;
    }
    int size() const { return n_; }
    bool operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j] != 0; }
    void set(int i, int j, bool v) { a_[static_cast<size_t>(i) * n_ + j] = v ? 1 : 0; }
    bool operator==(const Adj&) const = default;

private:
    int n_ = 0;
    std::vector<std::uint8_t> a_;
};

struct RegionWeights {
    Vec a, b_local, b_global, c, d;  // each length K, all >= 0
};

struct Budgets {
    Vec phi;        // K, epidemic-control budget
    Mat psi_hat;    // K x (N+1), influence budget in log form
    Vec r_max;      // K
    Vec theta_max;  // K
};

/// Full problem instance. Immutable by convention once built; everything the
/// dynamics, game, and solvers need lives here.
struct Scenario {
    int K = 0;  // regions
    int N = 0;  // influence campaigns are indexed 0..N
    double horizon_days = 0.0;
    Vec campaign_times;  // N+1 instants, campaign_times[0] == 0

    Mat B0;     // K x K natural transmission rates
    Mat Bhat;   // K x K opinion-induced amplitudes
    Vec gamma;  // K recovery rates

    Adj epi_adj;               // epidemic neighbor sets
    std::vector<Adj> inf_adj;  // N+1 influence neighbor sets
    std::vector<Mat> P;        // N+1 natural influence weights, row-stochastic

    Mat u_min, u_max;  // action boxes, zero off epi_adj
    Mat v_min, v_max;

    RegionWeights weights;
    Budgets budgets;

    Vec s0, i0, r0;  // initial compartments, s0+i0+r0 == 1
    Vec theta0;      // initial opinions in [0,1]
};

/// Physical control matrix U plus the per-campaign influence matrices V(n).
struct ActionProfile {
    Mat U;               // zero off epi_adj
    std::vector<Mat> V;  // N+1 matrices, zero off inf_adj(n)
};

struct Violation {
    std::string code;    // stable identifier, e.g. "assumption-1-ii"
    std::string detail;  // human-readable location
};

/// Empty iff Assumption 1 (i)-(iii) and all type invariants hold. Check (iii)
/// runs at the four corners U in {u_min,u_max} x theta in {0,1}.
std::vector<Violation> validate(const Scenario& scn);

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line) : std::runtime_error(msg), line(line) {}
    int line;
};
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scn, const std::string& path);

/// Scenario with freshly drawn epidemic / influence graphs: random d-regular
/// graphs plus self-loops, B0 = base.B0 masked with a 1e-10 floor off-edges,
/// P(n) uniform over neighbor sets. Degrees must be 0 or even (or K, meaning
/// fully connected). Deterministic in seed.
Scenario random_graph_scenario(const Scenario& base, int epi_degree, int inf_degree,
                               std::uint64_t seed);

/// Zero controls of the right shapes (u = 0, v = v_max off / clamped on edges).
ActionProfile neutral_actions(const Scenario& scn);

/// True if act lies inside the boxes on the graph edges and is zero off-graph.
bool actions_in_boxes(const Scenario& scn, const ActionProfile& act, double tol = 1e-12);

}  // namespace epigame
