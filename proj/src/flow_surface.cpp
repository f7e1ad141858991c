#include "warpflow/flow_surface.hpp"

#include <algorithm>
#include <cmath>

#include "warpflow/errors.hpp"
#include "warpflow/flow_s1.hpp"

namespace warpflow {

WarpedProductSpec spec_of(const SurfaceConfig& cfg) {
    WarpedProductSpec spec;
    spec.base = BaseKind::TorusT2;
    for (const auto& f : cfg.fibers) spec.fibers.push_back(f.fiber);
    return spec;
}

SurfaceRhs rhs_surface(const FlowStateSurface& st, const WarpedProductSpec& spec) {
    const std::size_t n = st.grid.size();
    const int A = spec.fiber_count();
    const BaseGeom2D bg = base_geometry(st);
    const Field Rcheck = base_scalar_curvature_2d(st, bg);

    SurfaceRhs out;
    out.dg11.assign(n, 0.0);
    out.dg12.assign(n, 0.0);
    out.dg22.assign(n, 0.0);
    out.dw.assign(A, Field(n, 0.0));

    std::vector<Hessian2D> hw(A);
    for (int a = 0; a < A; ++a) hw[a] = hessian_2d(st, bg, st.w[a]);

    for (std::size_t k = 0; k < n; ++k) {
        double s11 = 0.0, s12 = 0.0, s22 = 0.0;
        for (int a = 0; a < A; ++a) {
            const double na = spec.fibers[a].n;
            s11 += na * hw[a].fx[k] * hw[a].fx[k];
            s12 += na * hw[a].fx[k] * hw[a].fy[k];
            s22 += na * hw[a].fy[k] * hw[a].fy[k];
        }
        out.dg11[k] = -Rcheck[k] * st.g11[k] + 2.0 * s11;
        out.dg12[k] = -Rcheck[k] * st.g12[k] + 2.0 * s12;
        out.dg22[k] = -Rcheck[k] * st.g22[k] + 2.0 * s22;
        for (int a = 0; a < A; ++a)
            out.dw[a][k] = hw[a].lap[k] - spec.fibers[a].mu * std::exp(-2.0 * st.w[a][k]);
    }
    return out;
}

std::pair<FlowStateSurface, SurfaceAssumptions> init_surface(const SurfaceConfig& cfg) {
    if (cfg.mx < 16 || cfg.my < 16) throw InvalidConfig("grid.mx/my must be at least 16");
    if (cfg.fibers.empty()) throw InvalidConfig("at least one fiber is required");
    for (const auto& f : cfg.fibers) f.fiber.validate();
    if (cfg.mon.pinch_fiber < 0 ||
        cfg.mon.pinch_fiber >= static_cast<int>(cfg.fibers.size()))
        throw InvalidConfig("pinch fiber index out of range");

    FlowStateSurface st;
    st.t = 0.0;
    st.grid = make_grid_2d(cfg.mx, cfg.my);
    const std::size_t n = st.grid.size();
    st.g11.assign(n, 1.0);
    st.g12.assign(n, 0.0);
    st.g22.assign(n, 1.0);
    for (const auto& f : cfg.fibers) {
        Field w(n);
        for (int i = 0; i < cfg.mx; ++i) {
            for (int j = 0; j < cfg.my; ++j) {
                const double x = st.grid.x(i), y = st.grid.y(j);
                double v = f.v0;
                if (f.kind == SurfaceProfileKind::LogSineX)
                    v += f.amp * std::sin(f.harmonic * x);
                else if (f.kind == SurfaceProfileKind::LogCosineX)
                    v += f.amp * std::cos(f.harmonic * x);
                else if (f.kind == SurfaceProfileKind::LogSineXY)
                    v += f.amp * std::sin(f.harmonic * x) +
                         0.5 * f.amp * std::cos(f.harmonic * y);
                if (!(v > 0.0))
                    throw InvalidConfig("initial warping must be strictly positive");
                w[st.grid.idx(i, j)] = std::log(v);
            }
        }
        st.w.push_back(std::move(w));
    }

    const WarpedProductSpec spec = spec_of(cfg);
    const SurfaceMonitorRecord r0 = monitor_record_surface(st, spec, cfg.mon);
    SurfaceAssumptions rep;
    rep.eta = cfg.eta;
    rep.f_upper_max0 = r0.f_upper_max;
    rep.eta_tame = r0.f_upper_max <= cfg.eta;
    return {std::move(st), rep};
}

namespace {

bool finite_surface(const FlowStateSurface& st) {
    for (const Field* f : {&st.g11, &st.g12, &st.g22})
        for (double x : *f)
            if (!std::isfinite(x)) return false;
    for (const auto& wa : st.w)
        for (double x : wa)
            if (!std::isfinite(x)) return false;
    for (std::size_t k = 0; k < st.g11.size(); ++k)
        if (!(st.g11[k] * st.g22[k] - st.g12[k] * st.g12[k] > 0.0)) return false;
    return true;
}

void axpy(FlowStateSurface& y, const FlowStateSurface& x, const SurfaceRhs& k, double c) {
    const std::size_t n = x.g11.size();
    for (std::size_t j = 0; j < n; ++j) {
        y.g11[j] = x.g11[j] + c * k.dg11[j];
        y.g12[j] = x.g12[j] + c * k.dg12[j];
        y.g22[j] = x.g22[j] + c * k.dg22[j];
    }
    for (std::size_t a = 0; a < x.w.size(); ++a)
        for (std::size_t j = 0; j < n; ++j) y.w[a][j] = x.w[a][j] + c * k.dw[a][j];
}

FlowStateSurface rk4_step(const FlowStateSurface& st, const WarpedProductSpec& spec,
                          double dt) {
    FlowStateSurface tmp = st;
    const SurfaceRhs k1 = rhs_surface(st, spec);
    axpy(tmp, st, k1, 0.5 * dt);
    const SurfaceRhs k2 = rhs_surface(tmp, spec);
    axpy(tmp, st, k2, 0.5 * dt);
    const SurfaceRhs k3 = rhs_surface(tmp, spec);
    axpy(tmp, st, k3, dt);
    const SurfaceRhs k4 = rhs_surface(tmp, spec);

    FlowStateSurface out = st;
    out.t = st.t + dt;
    const std::size_t n = st.g11.size();
    auto comb = [&](Field& o, const Field& x, const Field& a, const Field& b,
                    const Field& c, const Field& d) {
        for (std::size_t j = 0; j < n; ++j)
            o[j] = x[j] + dt / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
    };
    comb(out.g11, st.g11, k1.dg11, k2.dg11, k3.dg11, k4.dg11);
    comb(out.g12, st.g12, k1.dg12, k2.dg12, k3.dg12, k4.dg12);
    comb(out.g22, st.g22, k1.dg22, k2.dg22, k3.dg22, k4.dg22);
    for (std::size_t a = 0; a < st.w.size(); ++a)
        comb(out.w[a], st.w[a], k1.dw[a], k2.dw[a], k3.dw[a], k4.dw[a]);
    return out;
}

double step_size(const FlowStateSurface& st, const WarpedProductSpec& spec,
                 const SurfaceConfig& cfg) {
    if (cfg.dt_override > 0.0) return cfg.dt_override;
    // smallest metric length of a grid cell edge
    double lam_min = 1e300;
    for (std::size_t k = 0; k < st.g11.size(); ++k) {
        const double tr = st.g11[k] + st.g22[k];
        const double det = st.g11[k] * st.g22[k] - st.g12[k] * st.g12[k];
        const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
        lam_min = std::min(lam_min, tr / 2.0 - disc);
    }
    const double ds = std::sqrt(std::max(lam_min, 0.0)) * std::min(st.grid.hx, st.grid.hy);
    double dt = cfg.cfl * ds * ds;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        double wmin = st.w[a][0];
        for (double x : st.w[a]) wmin = std::min(wmin, x);
        const double vmin = std::exp(wmin);
        dt = std::min(dt, cfg.rxn * vmin * vmin / (spec.fibers[a].mu + 1.0));
    }
    return dt * cfg.dt_scale;
}

}  // namespace

TrajectorySurface run_surface(const SurfaceConfig& cfg) {
    auto [st, assumptions] = init_surface(cfg);
    const WarpedProductSpec spec = spec_of(cfg);

    TrajectorySurface traj;
    traj.spec = spec;
    traj.assumptions = assumptions;

    std::vector<double> stop_abs(spec.fiber_count());
    for (int a = 0; a < spec.fiber_count(); ++a) {
        double wmin = st.w[a][0];
        for (double x : st.w[a]) wmin = std::min(wmin, x);
        stop_abs[a] = cfg.eps_stop_rel * std::exp(wmin);
    }

    traj.records.push_back(monitor_record_surface(st, spec, cfg.mon));
    traj.snapshots.push_back(st);

    std::vector<char> residual_done(cfg.residual_times.size(), 0);
    FlowStateSurface prev2, prev1 = st;
    bool have2 = false;

    traj.termination = TerminationReason::TMaxReached;
    while (true) {
        if (st.t >= cfg.t_max) break;
        double dt = step_size(st, spec, cfg);
        if (st.t + dt > cfg.t_max) dt = cfg.t_max - st.t;
        if (dt < 1e-14) {
            traj.termination = TerminationReason::DtUnderflow;
            break;
        }

        FlowStateSurface next;
        try {
            next = rk4_step(st, spec, dt);
        } catch (const Error&) {
            traj.termination = TerminationReason::Blowup;
            break;
        }
        if (!finite_surface(next)) {
            traj.termination = TerminationReason::Blowup;
            break;
        }

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
            SurfaceMonitorRecord cur = monitor_record_surface(st, spec, cfg.mon);
            cur.dt = dt;
            const SurfaceMonitorRecord& prev = traj.records.back();
            // torus area identity dA/dt = integral of p dA (and >= -1e-8):
            // compare the discrete rate against the trapezoid of the source
            const double rate = (cur.area - prev.area) / (cur.t - prev.t);
            const double src = 0.5 * (cur.p_integral + prev.p_integral) -
                               0.5 * (cur.gauss_bonnet + prev.gauss_bonnet);
            traj.assertions.check(rate >= -1e-8,
                                  "area decreased at t=" + std::to_string(cur.t));
            traj.assertions.check(
                std::abs(rate - src) <= 1e-8 + 1e-3 * std::abs(src),
                "area rate drifted from the warping source at t=" +
                    std::to_string(cur.t));
            traj.c0_fit = std::max(traj.c0_fit, cur.c0_fit);
            traj.c1_fit = std::max(traj.c1_fit, cur.c1_fit);
            traj.records.push_back(cur);
        }

        bool hit = false;
        for (int a = 0; a < spec.fiber_count(); ++a) {
            double wmin = st.w[a][0];
            for (double x : st.w[a]) wmin = std::min(wmin, x);
            if (std::exp(wmin) < stop_abs[a]) hit = true;
        }
        if (hit) {
            traj.termination = TerminationReason::MinWarpingReached;
            break;
        }
    }

    if (traj.snapshots.size() < 2 || traj.snapshots.back().t != st.t)
        traj.snapshots.push_back(st);

    const int a0 = cfg.mon.pinch_fiber;
    std::vector<double> ts, ys;
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
