#include "warpflow/flow_s1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "warpflow/errors.hpp"

namespace warpflow {

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::MinWarpingReached: return "min-warping-reached";
        case TerminationReason::DtUnderflow: return "dt-underflow";
        case TerminationReason::Blowup: return "blowup";
        case TerminationReason::TMaxReached: return "t-max-reached";
    }
    return "unknown";
}

WarpedProductSpec spec_of(const S1Config& cfg) {
    WarpedProductSpec spec;
    spec.base = BaseKind::CircleS1;
    for (const auto& f : cfg.fibers) spec.fibers.push_back(f.fiber);
    return spec;
}

S1Rhs rhs_s1(const FlowStateS1& st, const WarpedProductSpec& spec) {
    st.validate();
    const int A = spec.fiber_count();
    const std::size_t n = st.phi.size();
    const SDerivsS1 d = s_derivs(st);

    S1Rhs out;
    out.dphi.assign(n, 0.0);
    out.dv.assign(A, Field(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        double trace = 0.0;
        for (int b = 0; b < A; ++b) trace += spec.fibers[b].n * d.v_ss[b][k] / st.v[b][k];
        out.dphi[k] = st.phi[k] * trace;
        for (int a = 0; a < A; ++a) {
            double s = d.v_ss[a][k] -
                       (spec.fibers[a].mu + d.v_s[a][k] * d.v_s[a][k]) / st.v[a][k];
            for (int b = 0; b < A; ++b)
                s += spec.fibers[b].n * d.v_s[a][k] * d.v_s[b][k] / st.v[b][k];
            out.dv[a][k] = s;
        }
    }
    return out;
}

std::pair<FlowStateS1, AssumptionReport> init_state(const S1Config& cfg) {
    if (cfg.m < 16) throw InvalidConfig("grid.m must be at least 16");
    if (cfg.fibers.empty()) throw InvalidConfig("at least one fiber is required");
    for (const auto& f : cfg.fibers) f.fiber.validate();
    if (cfg.mon.pinch_fiber < 0 ||
        cfg.mon.pinch_fiber >= static_cast<int>(cfg.fibers.size()))
        throw InvalidConfig("pinch fiber index out of range");

    FlowStateS1 st;
    st.t = 0.0;
    st.grid = make_grid_1d(cfg.m);
    st.phi.assign(cfg.m, 1.0);  // theta is initial arclength up to scale
    for (const auto& f : cfg.fibers) {
        Field v(cfg.m);
        for (int j = 0; j < cfg.m; ++j) {
            const double th = st.grid.theta(j);
            switch (f.kind) {
                case ProfileKind::Constant: v[j] = f.v0; break;
                case ProfileKind::CosineNeck: v[j] = f.v0 + f.amp * std::cos(f.harmonic * th); break;
                case ProfileKind::SineNeck: v[j] = f.v0 + f.amp * std::sin(f.harmonic * th); break;
                case ProfileKind::Table:
                    if (static_cast<int>(f.table.size()) != cfg.m)
                        throw InvalidConfig("profile table length must equal grid.m");
                    v[j] = f.table[j];
                    break;
            }
        }
        for (double x : v)
            if (!(x > 0.0)) throw InvalidConfig("initial warping must be strictly positive");
        st.v.push_back(std::move(v));
    }

    const WarpedProductSpec spec = spec_of(cfg);
    const SDerivsS1 d = s_derivs(st);
    const int a0 = cfg.mon.pinch_fiber;

    AssumptionReport rep;
    double v1max = 0.0, v1grad_sq = 0.0;
    for (int j = 0; j < cfg.m; ++j) {
        v1max = std::max(v1max, st.v[a0][j]);
        v1grad_sq = std::max(v1grad_sq, d.v_s[a0][j] * d.v_s[a0][j]);
    }
    rep.c1 = v1max;
    const Field R0 = scalar_R_direct(st, spec);
    rep.r0 = *std::min_element(R0.begin(), R0.end());

    const double mu1 = spec.fibers[a0].mu;
    rep.single_fiber_pinching = mu1 > 0.0;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        if (a == a0) continue;
        const double mua = spec.fibers[a].mu;
        if (mua == 0.0) continue;  // a mu=0 fiber never crushes
        double vamin = st.v[a][0];
        for (double x : st.v[a]) vamin = std::min(vamin, x);
        if (!(vamin * vamin / (2.0 * mua) >= v1max * v1max / mu1))
            rep.single_fiber_pinching = false;
    }

    bool mu_ok = true;
    for (const auto& f : spec.fibers)
        if (f.mu < f.n - 1) mu_ok = false;
    const int n1 = spec.fibers[a0].n;
    rep.guarantee_cylinder = mu_ok && (rep.r0 * rep.c1 * rep.c1 + n1 * mu1 > 0.0);

    rep.small_gradient =
        std::abs(mu1 - (n1 - 1)) <= 1e-12 * std::max(1.0, mu1) && v1grad_sq <= 1.0;

    return {std::move(st), rep};
}

namespace {

void axpy_state(FlowStateS1& y, const FlowStateS1& x, const S1Rhs& k, double c) {
    const std::size_t n = x.phi.size();
    for (std::size_t j = 0; j < n; ++j) y.phi[j] = x.phi[j] + c * k.dphi[j];
    for (std::size_t a = 0; a < x.v.size(); ++a)
        for (std::size_t j = 0; j < n; ++j) y.v[a][j] = x.v[a][j] + c * k.dv[a][j];
}

bool finite_state(const FlowStateS1& st) {
    for (double x : st.phi)
        if (!std::isfinite(x) || !(x > 0.0)) return false;
    for (const auto& va : st.v)
        for (double x : va)
            if (!std::isfinite(x) || !(x > 0.0)) return false;
    return true;
}

FlowStateS1 rk4_step(const FlowStateS1& st, const WarpedProductSpec& spec, double dt) {
    FlowStateS1 tmp = st;
    const S1Rhs k1 = rhs_s1(st, spec);
    axpy_state(tmp, st, k1, 0.5 * dt);
    tmp.t = st.t + 0.5 * dt;
    const S1Rhs k2 = rhs_s1(tmp, spec);
    axpy_state(tmp, st, k2, 0.5 * dt);
    const S1Rhs k3 = rhs_s1(tmp, spec);
    axpy_state(tmp, st, k3, dt);
    tmp.t = st.t + dt;
    const S1Rhs k4 = rhs_s1(tmp, spec);

    FlowStateS1 out = st;
    out.t = st.t + dt;
    const std::size_t n = st.phi.size();
    for (std::size_t j = 0; j < n; ++j)
        out.phi[j] = st.phi[j] + dt / 6.0 *
                                     (k1.dphi[j] + 2.0 * k2.dphi[j] + 2.0 * k3.dphi[j] +
                                      k4.dphi[j]);
    for (std::size_t a = 0; a < st.v.size(); ++a)
        for (std::size_t j = 0; j < n; ++j)
            out.v[a][j] = st.v[a][j] + dt / 6.0 *
                                           (k1.dv[a][j] + 2.0 * k2.dv[a][j] +
                                            2.0 * k3.dv[a][j] + k4.dv[a][j]);
    return out;
}

double step_size(const FlowStateS1& st, const WarpedProductSpec& spec, const S1Config& cfg) {
    if (cfg.dt_override > 0.0) return cfg.dt_override;
    double phi_min = st.phi[0];
    for (double p : st.phi) phi_min = std::min(phi_min, p);
    const double ds_min = st.grid.h * phi_min;
    double dt = cfg.cfl * ds_min * ds_min;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        double vmin = st.v[a][0];
        for (double x : st.v[a]) vmin = std::min(vmin, x);
        dt = std::min(dt, cfg.rxn * vmin * vmin / (spec.fibers[a].mu + 1.0));
    }
    return dt * cfg.dt_scale;
}

}  // namespace

TEstimate estimate_T(std::span<const double> t, std::span<const double> vmin_sq,
                     double mu1) {
    if (t.size() != vmin_sq.size() || t.empty())
        throw InsufficientData("estimate_T needs matching nonempty series");
    if (!(mu1 > 0.0)) throw InsufficientData("estimate_T needs mu_1 > 0");
    const double y_end = vmin_sq.back();
    if (!(y_end > 0.0)) throw InsufficientData("series must stay positive");

    std::size_t begin = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (vmin_sq[i] <= 10.0 * y_end) {
            begin = i;
            break;
        }
    }
    const std::size_t count = t.size() - begin;
    if (count < 10) throw InsufficientData("fewer than 10 samples in the final decade");
    if (!(vmin_sq[begin] >= 2.0 * y_end))
        throw InsufficientData("no decay across the fit window");

    // v^2 ~ 2 mu_1 (T - t): fixed slope, T is the only parameter
    double acc = 0.0;
    for (std::size_t i = begin; i < t.size(); ++i)
        acc += t[i] + vmin_sq[i] / (2.0 * mu1);
    TEstimate est;
    est.t_hat = acc / count;
    double r2 = 0.0;
    for (std::size_t i = begin; i < t.size(); ++i) {
        const double e = vmin_sq[i] - 2.0 * mu1 * (est.t_hat - t[i]);
        r2 += e * e;
    }
    est.residual = std::sqrt(r2 / count);
    return est;
}

TrajectoryS1 run_s1(const S1Config& cfg) {
    auto [st, assumptions] = init_state(cfg);
    const WarpedProductSpec spec = spec_of(cfg);

    TrajectoryS1 traj;
    traj.spec = spec;
    traj.assumptions = assumptions;
    traj.b_const = f_weight_constant(st, cfg.mon);

    std::vector<double> stop_abs(spec.fiber_count());
    for (int a = 0; a < spec.fiber_count(); ++a) {
        double vmin = st.v[a][0];
        for (double x : st.v[a]) vmin = std::min(vmin, x);
        stop_abs[a] = cfg.eps_stop_rel * vmin;
    }

    MonitorRecordS1 rec = monitor_record_s1(st, spec, cfg.mon, traj.b_const);
    const std::vector<double> caps = c1_gradient_caps(rec, spec);
    traj.records.push_back(rec);
    traj.snapshots.push_back(st);

    std::vector<char> residual_done(cfg.residual_times.size(), 0);
    FlowStateS1 prev2, prev1 = st;
    bool have2 = false;

    const int a_pinch = cfg.mon.pinch_fiber;
    double halving_mark = 0.5 * stop_abs[a_pinch] / cfg.eps_stop_rel;  // v_min(0)/2

    traj.termination = TerminationReason::TMaxReached;
    while (true) {
        if (st.t >= cfg.t_max) break;
        double dt = step_size(st, spec, cfg);
        if (st.t + dt > cfg.t_max) dt = cfg.t_max - st.t;
        if (dt < 1e-14) {
            traj.termination = TerminationReason::DtUnderflow;
            break;
        }

        FlowStateS1 next;
        try {
            next = rk4_step(st, spec, dt);
        } catch (const NonPositiveWarping&) {
            traj.termination = TerminationReason::Blowup;
            break;
        }
        if (!finite_state(next)) {
            traj.termination = TerminationReason::Blowup;
            break;
        }

        // capture (s_{n-1}, s_n, s_{n+1}) around each requested residual time
        if (have2) {
            for (std::size_t i = 0; i < cfg.residual_times.size(); ++i) {
                if (!residual_done[i] && prev1.t >= cfg.residual_times[i]) {
                    traj.triples.push_back({prev2, prev1, next});
                    residual_done[i] = 1;
                }
            }
        }
        prev2 = prev1;
        prev1 = next;
        have2 = true;

        st = std::move(next);
        ++traj.steps;

        if (cfg.record_every <= 1 || traj.steps % cfg.record_every == 0) {
            MonitorRecordS1 cur = monitor_record_s1(st, spec, cfg.mon, traj.b_const);
            cur.dt = dt;
            maximum_principle_check(traj.records.back(), cur, caps, traj.assertions);
            traj.records.push_back(cur);
        }
        if (cfg.snapshot_every > 0 && traj.steps % cfg.snapshot_every == 0)
            traj.snapshots.push_back(st);

        {
            double vmin = st.v[a_pinch][0];
            for (double x : st.v[a_pinch]) vmin = std::min(vmin, x);
            if (vmin < halving_mark) {
                traj.profile_snapshots.push_back(st);
                while (vmin < halving_mark) halving_mark *= 0.5;
            }
        }

        bool hit = false;
        for (int a = 0; a < spec.fiber_count(); ++a) {
            double vmin = st.v[a][0];
            for (double x : st.v[a]) vmin = std::min(vmin, x);
            if (vmin < stop_abs[a]) hit = true;
        }
        if (hit) {
            traj.termination = TerminationReason::MinWarpingReached;
            break;
        }
    }

    if (traj.snapshots.empty() || traj.snapshots.back().t != st.t)
        traj.snapshots.push_back(st);

    const int a0 = cfg.mon.pinch_fiber;
    std::vector<double> ts, ys;
    ts.reserve(traj.records.size());
    for (const auto& r : traj.records) {
        ts.push_back(r.t);
        ys.push_back(r.vmin[a0] * r.vmin[a0]);
    }
    try {
        const TEstimate est = estimate_T(ts, ys, spec.fibers[a0].mu);
        traj.t_hat = est.t_hat;
        traj.t_fit_residual = est.residual;
        traj.t_hat_valid = true;
    } catch (const InsufficientData&) {
        traj.t_hat_valid = false;
    }
    return traj;
}

}  // namespace warpflow
