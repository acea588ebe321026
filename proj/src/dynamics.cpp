#include "epigame/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace epigame {

std::vector<Vec> opinion_path(const Scenario& scn, const std::vector<Mat>& V) {
    std::vector<Vec> theta;
    theta.push_back(scn.theta0);
    for (int n = 0; n <= scn.N; ++n) {
        Vec next(scn.K, 0.0);
        for (int k = 0; k < scn.K; ++k) {
            double acc = 0.0;
            for (int l = 0; l < scn.K; ++l)
                if (scn.inf_adj[n](k, l)) acc += V[n](k, l) * scn.P[n](k, l) * theta.back()[l];
            next[k] = acc;
        }
        theta.push_back(std::move(next));
    }
    return theta;
}

namespace {

struct State {
    Vec s, i, r;
};

// ds = -Diag(s) M i, di = -ds - Dg i, dr = Dg i
State deriv(const Scenario& scn, const Mat& m, const State& st) {
    const int K = scn.K;
    State d{Vec(K), Vec(K), Vec(K)};
    for (int k = 0; k < K; ++k) {
        double force = 0.0;
        for (int l = 0; l < K; ++l) force += m(k, l) * st.i[l];
        const double ds = -st.s[k] * force;
        d.s[k] = ds;
        d.i[k] = -ds - scn.gamma[k] * st.i[k];
        d.r[k] = scn.gamma[k] * st.i[k];
    }
    return d;
}

State axpy(const State& a, double h, const State& b) {
    State o = a;
    for (size_t k = 0; k < a.s.size(); ++k) {
        o.s[k] += h * b.s[k];
        o.i[k] += h * b.i[k];
        o.r[k] += h * b.r[k];
    }
    return o;
}

void clamp_state(State& st) {
    const double slack = 1e-6;
    auto fix = [&](double& x) {
        if (x < -slack || x > 1.0 + slack)
            throw std::runtime_error("simulate: state left [0,1] beyond roundoff, dt too large?");
        x = std::min(1.0, std::max(0.0, x));
    };
    for (auto* v : {&st.s, &st.i, &st.r})
        for (double& x : *v) fix(x);
}

}  // namespace

Trajectory simulate(const Scenario& scn, const ActionProfile& act, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("simulate: dt must be positive");
    double min_gap = scn.horizon_days - scn.campaign_times[scn.N];
    for (int n = 0; n + 1 <= scn.N; ++n)
        min_gap = std::min(min_gap, scn.campaign_times[n + 1] - scn.campaign_times[n]);
    if (dt > min_gap / 10.0)
        throw std::invalid_argument("simulate: dt must be at most a tenth of the campaign gap");

    Trajectory out;
    out.theta = opinion_path(scn, act.V);

    const int K = scn.K;
    State st{scn.s0, scn.i0, scn.r0};
    out.times.push_back(0.0);
    out.s.push_back(st.s);
    out.i.push_back(st.i);
    out.r.push_back(st.r);

    // segment n spans [t_n, t_{n+1}) with theta(n); the last runs to T
    for (int n = 0; n <= scn.N; ++n) {
        const double t0 = scn.campaign_times[n];
        const double t1 = n < scn.N ? scn.campaign_times[n + 1] : scn.horizon_days;
        Mat m(K, K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l)
                m(k, l) = scn.B0(k, l) - act.U(k, l) + out.theta[n][k] * scn.Bhat(k, l);

        const int steps = std::max(1, static_cast<int>(std::llround((t1 - t0) / dt)));
        const double h = (t1 - t0) / steps;
        for (int step = 0; step < steps; ++step) {
            const State k1 = deriv(scn, m, st);
            const State k2 = deriv(scn, m, axpy(st, h / 2, k1));
            const State k3 = deriv(scn, m, axpy(st, h / 2, k2));
            const State k4 = deriv(scn, m, axpy(st, h, k3));
            for (int k = 0; k < K; ++k) {
                st.s[k] += h / 6 * (k1.s[k] + 2 * k2.s[k] + 2 * k3.s[k] + k4.s[k]);
                st.i[k] += h / 6 * (k1.i[k] + 2 * k2.i[k] + 2 * k3.i[k] + k4.i[k]);
                st.r[k] += h / 6 * (k1.r[k] + 2 * k2.r[k] + 2 * k3.r[k] + k4.r[k]);
            }
            clamp_state(st);
            out.times.push_back(t0 + (step + 1) * h);
            out.s.push_back(st.s);
            out.i.push_back(st.i);
            out.r.push_back(st.r);
        }
    }
    return out;
}

}  // namespace epigame
