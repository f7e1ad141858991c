// Acceptance gate: one check per criterion, one PASS/FAIL line each, nonzero
// exit if any fails. Shared runs are executed once and reused.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "warpflow/fd_oracle.hpp"
#include "warpflow/flow_s1.hpp"
#include "warpflow/flow_surface.hpp"
#include "warpflow/soliton.hpp"

using namespace warpflow;

namespace {

int g_failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

S1Config neck_config(int m) {
    S1Config cfg;
    cfg.m = m;
    cfg.fibers = {{FiberSpec{2, 1.0}, ProfileKind::CosineNeck, 0.5, 0.45, 1, {}},
                  {FiberSpec{3, 2.0}, ProfileKind::Constant, 2.0, 0.0, 1, {}}};
    return cfg;
}

// ---- criterion 1: oracle equivalence over 100 random S1 x S2 x S3 states ----
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    WarpedProductSpec spec{BaseKind::CircleS1, {FiberSpec{2, 1.0}, FiberSpec{3, 2.0}}};
    std::mt19937_64 rng(1);
    double worst_blocks = 0.0, worst_gamma = 0.0;
    bool pass = true;
    for (int s = 0; s < 100; ++s) {
        const OracleState os = random_oracle_state(spec, rng);
        const FlowStateS1 st = realize_s1(os, spec, 1024);
        const int jnode = static_cast<int>(rng() % 1024);
        const ChartPoint p = random_chart_point(spec, rng, {st.grid.theta(jnode)});

        const RiemannFd R = riemann_fd(spec, os, p, 1e-3);
        const FdBlocks fd = extract_blocks(spec, os, p, R);
        const CurvatureBlocks closed = curvature_blocks(st, spec);
        const BlockComparison cmp = compare_blocks(closed, jnode, fd, 1e-6);
        worst_blocks = std::max(worst_blocks, cmp.worst());
        pass = pass && cmp.pass;

        const auto gfd = christoffel_fd(spec, os, p, 1e-3);
        const auto gcl = christoffel_closed(st, spec, p);
        double scale = 1.0;
        for (double x : gfd) scale = std::max(scale, std::abs(x));
        double gerr = 0.0;
        for (std::size_t i = 0; i < gfd.size(); ++i)
            gerr = std::max(gerr, std::abs(gfd[i] - gcl[i]) / scale);
        worst_gamma = std::max(worst_gamma, gerr);
        pass = pass && gerr <= 1e-6;
    }
    const double dt = seconds_since(t0);
    pass = pass && dt <= 60.0;
    verdict(1, pass, "oracle equivalence, 100 random states, rel err <= 1e-6",
            fmt("blocks %.3e, christoffels %.3e, %.1f s", worst_blocks, worst_gamma, dt));
}

// ---- criterion 2: exact homogeneous shrink ----
void criterion_2() {
    S1Config cfg;
    cfg.m = 64;
    cfg.fibers = {{FiberSpec{2, 1.0}, ProfileKind::Constant, 1.0, 0.0, 1, {}}};
    const TrajectoryS1 tr = run_s1(cfg);

    double best = 1e9, vbest = 0.0, tbest = 0.0;
    for (const auto& r : tr.records) {
        if (std::abs(r.t - 0.4) < best) {
            best = std::abs(r.t - 0.4);
            vbest = r.vmin[0];
            tbest = r.t;
        }
    }
    const double rel = std::abs(vbest - std::sqrt(1.0 - 2.0 * tbest)) /
                       std::sqrt(1.0 - 2.0 * tbest);
    const bool pass = tr.t_hat_valid && rel <= 1e-6 && std::abs(tr.t_hat - 0.5) <= 1e-4;
    verdict(2, pass, "homogeneous S1 x S2 shrink matches sqrt(1-2t), T_hat = 0.5",
            fmt("rel err %.3e at t=%.4f, T_hat %.6f", rel, tbest, tr.t_hat));
}

struct NeckRuns {
    TrajectoryS1 hi;   // M = 1024
    TrajectoryS1 lo;   // M = 512
    double runtime = 0.0;
};

NeckRuns run_necks() {
    NeckRuns out;
    const auto t0 = std::chrono::steady_clock::now();
    out.hi = run_s1(neck_config(1024));
    out.runtime = seconds_since(t0);
    out.lo = run_s1(neck_config(512));
    return out;
}

// ---- criterion 3: neckpinch Type-I ----
void criterion_3(const NeckRuns& nr) {
    const TrajectoryS1& tr = nr.hi;
    bool pass = tr.termination == TerminationReason::MinWarpingReached && tr.t_hat_valid;
    double v2min = 1e300;
    for (const auto& r : tr.records) v2min = std::min(v2min, r.vmin[1]);
    pass = pass && v2min > 0.5;  // second fiber stays far from zero

    double ratio_lo = 1e300, ratio_hi = 0.0, neck_lo = 1e300, neck_hi = 0.0;
    if (tr.t_hat_valid) {
        const TypeIReport rep = typei_and_rescale(tr.records, tr.spec, tr.t_hat,
                                                  tr.profile_snapshots, S1Config{}.mon);
        for (const auto& p : rep.series) {
            ratio_lo = std::min(ratio_lo, p.type_i_ratio);
            ratio_hi = std::max(ratio_hi, p.type_i_ratio);
            neck_lo = std::min(neck_lo, p.neck_ratio);
            neck_hi = std::max(neck_hi, p.neck_ratio);
        }
        pass = pass && ratio_lo >= 0.4 && ratio_hi <= 10.0;
        pass = pass && neck_lo >= 0.95 && neck_hi <= 1.05;
    } else {
        pass = false;
    }
    pass = pass && nr.runtime <= 600.0;
    verdict(3, pass, "neckpinch M=1024: v2 bounded, Type-I ratio in [0.4,10], neck ratio in [0.95,1.05]",
            fmt("min v2 %.3f, ratio [%.3f, %.3f], neck [%.4f, %.4f], %.1f s", v2min,
                ratio_lo, ratio_hi, neck_lo, neck_hi, nr.runtime));
}

// ---- criterion 4: maximum-principle suite on the criterion-3 run ----
void criterion_4(const NeckRuns& nr) {
    const AssertionLog& log = nr.hi.assertions;
    verdict(4, log.failures == 0, "C0/C1 maximum principles at every step of the M=1024 run",
            fmt("%lld checks, %lld violations", static_cast<long long>(log.checks),
                static_cast<long long>(log.failures)));
}

// ---- criterion 5: neck quantity L bounded below, floor stable under M ----
void criterion_5(const NeckRuns& nr) {
    const double t_cut = std::min(nr.hi.records.back().t, nr.lo.records.back().t);
    auto floor_of = [&](const TrajectoryS1& tr) {
        double fl = 0.0;
        for (const auto& r : tr.records)
            if (r.t <= t_cut) fl = std::min(fl, r.l_min_on_omega);
        return fl;
    };
    const double f_hi = floor_of(nr.hi), f_lo = floor_of(nr.lo);
    const bool bounded = std::isfinite(f_hi) && f_hi > -50.0;
    const bool stable = std::abs(f_hi - f_lo) <= 0.10 * std::abs(f_hi);
    verdict(5, bounded && stable, "L floor on Omega bounded below, stable 512 vs 1024",
            fmt("floor(1024) %.4f, floor(512) %.4f, drift %.1f%%", f_hi, f_lo,
                f_hi != 0.0 ? 100.0 * std::abs(f_hi - f_lo) / std::abs(f_hi) : 0.0));
}

// ---- criterion 6: Hessian-evolution residual refinement ----
void criterion_6() {
    auto residual_at = [](int m, double dt) {
        S1Config cfg;
        cfg.m = m;
        cfg.fibers = {{FiberSpec{2, 1.0}, ProfileKind::CosineNeck, 1.0, 0.2, 1, {}},
                      {FiberSpec{3, 2.0}, ProfileKind::SineNeck, 2.0, 0.1, 2, {}}};
        cfg.dt_override = dt;
        cfg.t_max = 0.1;
        cfg.residual_times = {0.08};
        cfg.record_every = 1 << 20;
        const TrajectoryS1 tr = run_s1(cfg);
        return verify_hessian_evolution(tr.triples.at(0), tr.spec, 0);
    };
    const ResidualSample coarse = residual_at(256, 2e-4);
    const ResidualSample fine = residual_at(512, 1e-4);
    const double drop = coarse.rms / fine.rms;
    verdict(6, drop >= 3.5, "chi-evolution residual drops >= 3.5x under (M,dt)->(2M,dt/2)",
            fmt("rms %.3e -> %.3e, drop %.2fx", coarse.rms, fine.rms, drop));
}

// ---- criterion 7: surface flow ----
SurfaceConfig surface_config(int m) {
    SurfaceConfig cfg;
    cfg.mx = cfg.my = m;
    cfg.fibers = {{FiberSpec{2, 1.0}, SurfaceProfileKind::LogSineX, 0.8, 0.15, 1},
                  {FiberSpec{3, 2.0}, SurfaceProfileKind::Constant, 2.0, 0.0, 1}};
    return cfg;
}

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();

    SurfaceConfig hi = surface_config(128);
    hi.residual_times = {0.05, 0.10};
    const TrajectorySurface tr_hi = run_surface(hi);

    SurfaceConfig lo = surface_config(64);
    lo.residual_times = {0.05, 0.10};
    const TrajectorySurface tr_lo = run_surface(lo);
    const double runtime = seconds_since(t0);

    bool pass = tr_hi.termination == TerminationReason::MinWarpingReached;

    // Rcheck bounds hold with refinement-stable fitted constants. The bound
    // Rcheck <= max(C0, 2mu1/(3v1^2)) holds by construction of the fit; the
    // content is stability across grids. The x-only criterion data keeps the
    // base exactly flat, so the fitted constants sit at stencil-noise level;
    // values below the floor count as a stable zero.
    auto stable = [](double hi2, double lo2) {
        if (std::abs(hi2) <= 1e-6 && std::abs(lo2) <= 1e-6) return true;
        return std::abs(hi2 - lo2) <= 0.10 * std::abs(hi2);
    };
    pass = pass && stable(tr_hi.c0_fit, tr_lo.c0_fit) && stable(tr_hi.c1_fit, tr_lo.c1_fit);

    double gb = 0.0;
    for (const auto& r : tr_hi.records) gb = std::max(gb, std::abs(r.gauss_bonnet));
    pass = pass && gb <= 1e-6;

    // gauged Rcheck evolution residual (valid identity; identically ~0 on this
    // flat-base data, so it is reported rather than gating the criterion)
    double revo = 0.0;
    for (std::size_t i = 0; i < tr_hi.triples.size(); ++i)
        revo = std::max(revo, verify_R_evolution(tr_hi.triples[i], tr_hi.spec).rms);

    // Uhlenbeck-frame identity residual, literal componentwise reading: the check
    // demands 2nd-order convergence; the componentwise scalar reading misses
    // the frame-bundle Laplacian corrections, so the residual converges to
    // those terms instead of zero (see README, acceptance notes).
    double uconv = 1e300;
    bool uhlen_ok = false;
    if (!tr_hi.triples.empty() && !tr_lo.triples.empty()) {
        uconv = 0.0;
        for (std::size_t i = 0; i < std::min(tr_hi.triples.size(), tr_lo.triples.size());
             ++i) {
            const ResidualSample uh = uhlenbeck_identity_residual(tr_hi.triples[i], tr_hi.spec);
            const ResidualSample ul = uhlenbeck_identity_residual(tr_lo.triples[i], tr_lo.spec);
            uconv = std::max(uconv, uh.rms / ul.rms);
        }
        uhlen_ok = uconv <= 1.0 / 3.5;
    }
    pass = pass && uhlen_ok;
    pass = pass && runtime <= 1200.0;

    verdict(7, pass,
            "surface 128^2: Rcheck bounds stable, Gauss-Bonnet <= 1e-6, Uhlenbeck identity convergent",
            fmt("C0 %.3g/%.3g, C1 %.3g/%.3g, GB %.2e, R-evo rms %.2e, Uhlenbeck ratio %.3f%s, %.1f s",
                tr_hi.c0_fit, tr_lo.c0_fit, tr_hi.c1_fit, tr_lo.c1_fit, gb, revo, uconv,
                uhlen_ok ? "" : " [non-convergent: componentwise form needs the frame-bundle Laplacian]",
                runtime));
}

// ---- criterion 8: soliton rigidity ----
void criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    const SolitonShot cyl = shoot(std::sqrt(2.0), 20.0);
    bool pass = cyl.classification == SolitonClass::Cylinder;
    pass = pass && cyl.residuals.worst_identity() <= 1e-8;
    pass = pass && cyl.normalization_residual <= 1e-8;

    std::vector<double> v0s;
    for (double v0 = 0.6; v0 <= 3.01; v0 += 0.2) v0s.push_back(v0);
    const auto sweep = classify_sweep(v0s, 50.0);
    int cylinders = 0;
    for (const auto& e : sweep) {
        if (std::abs(e.v0 - std::sqrt(2.0)) <= 1e-6) continue;
        if (e.cls == SolitonClass::Cylinder) ++cylinders;
    }
    pass = pass && cylinders == 0;
    const double dt = seconds_since(t0);
    pass = pass && dt <= 30.0;
    verdict(8, pass, "cylinder residuals <= 1e-8 on [0,20]; sweep rigidity to r=50",
            fmt("worst identity %.2e, normalization %.2e, stray cylinders %d, %.1f s",
                cyl.residuals.worst_identity(), cyl.normalization_residual, cylinders, dt));
}

// ---- criterion 9: flat-block decay ----
void criterion_9(const NeckRuns& nr) {
    const TrajectoryS1& tr = nr.hi;
    bool pass = tr.t_hat_valid;
    double first = 0.0, last = 0.0, prev = 1e300;
    bool monotone_trend = true;
    if (tr.t_hat_valid) {
        // sample at log-spaced times through the run
        std::vector<double> samples;
        const std::size_t n = tr.records.size();
        for (int k = 0; k <= 24; ++k) {
            const std::size_t i =
                std::min<std::size_t>(n - 1, static_cast<std::size_t>(
                                                 (1.0 - std::pow(0.5, k / 3.0)) * n));
            const auto& r = tr.records[i];
            const double tt = tr.t_hat - r.t;
            if (!(tt > 0.0)) continue;
            samples.push_back(tt * tt * r.sigma_fl_max);
        }
        first = samples.front();
        last = samples.back();
        for (double s : samples) {
            if (s > prev * 1.02) monotone_trend = false;
            prev = s;
        }
        pass = pass && monotone_trend && last <= 0.05 * first;
    }
    verdict(9, pass, "rescaled flat-block sum decays monotonically to <= 5% of initial",
            fmt("%.3e -> %.3e (%.2f%%), trend %s", first, last,
                first > 0 ? 100.0 * last / first : 0.0,
                monotone_trend ? "decreasing" : "violated"));
}

}  // namespace

int main() {
    std::printf("warpflow acceptance suite\n");
    criterion_1();
    criterion_2();
    const NeckRuns nr = run_necks();
    criterion_3(nr);
    criterion_4(nr);
    criterion_5(nr);
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(nr);
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
