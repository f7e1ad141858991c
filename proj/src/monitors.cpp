#include "warpflow/monitors.hpp"

#include <algorithm>
#include <cmath>

#include "warpflow/errors.hpp"

namespace warpflow {

namespace {

double rms(const Field& f) {
    double s = 0.0;
    for (double x : f) s += x * x;
    return std::sqrt(s / f.size());
}

// nonuniform centered first difference at t1 for spacings hm = t1-t0, hp = t2-t1
double centered_dt(double f0, double f1, double f2, double hm, double hp) {
    return (hm * hm * f2 - hp * hp * f0 + (hp * hp - hm * hm) * f1) /
           (hp * hm * (hp + hm));
}

Field chi_field(const FlowStateS1& st, const WarpedProductSpec& spec, const SDerivsS1& d,
                int a) {
    const std::size_t n = st.phi.size();
    Field chi(n);
    for (std::size_t k = 0; k < n; ++k) {
        double c = d.v_ss[a][k] * d.v_ss[a][k];
        for (int b = 0; b < spec.fiber_count(); ++b) {
            const double cb = d.v_s[b][k] * d.v_s[a][k] / st.v[b][k];
            c += spec.fibers[b].n * cb * cb;
        }
        chi[k] = c;
    }
    return chi;
}

OmegaScan omega_scan_impl(const FlowStateS1& st, const MonitorParams& mp,
                          const SDerivsS1& d) {
    const int a = mp.pinch_fiber;
    const int m = st.m();
    OmegaScan sc;
    sc.omega_mask.assign(m, 0);
    double lmin = 0.0;
    bool any = false;
    for (int k = 0; k < m; ++k) {
        const double v = st.v[a][k];
        const double vss = d.v_ss[a][k];
        const double lg = std::log(v / mp.omega_delta);
        if (vss * lg < 0.0) {
            sc.omega_mask[k] = 1;
            const double L = v * vss * std::log(v);
            if (!any || L < lmin) lmin = L;
            any = true;
            sc.measure += st.phi[k] * st.grid.h;
        }
    }
    sc.l_min = any ? lmin : 0.0;

    // maximal runs on the periodic grid
    for (int k = 0; k < m; ++k) {
        const int prev = (k + m - 1) % m;
        if (sc.omega_mask[k] && !sc.omega_mask[prev]) {
            ++sc.components;
            // walk to the end of the run
            int e = k;
            while (sc.omega_mask[(e + 1) % m] && e - k < m) ++e;
            const int last = ((e % m) + m) % m;
            for (int idx : {k, last}) {
                const int outside = idx == k ? prev : (last + 1) % m;
                const double v = st.v[a][idx];
                sc.endpoint_idx.push_back(idx);
                sc.endpoint_l.push_back(v * d.v_ss[a][idx] * std::log(v));
                const bool vss_flip =
                    d.v_ss[a][idx] * d.v_ss[a][outside] <= 0.0;
                const bool log_flip = std::log(v / mp.omega_delta) *
                                          std::log(st.v[a][outside] / mp.omega_delta) <=
                                      0.0;
                sc.endpoint_inflection.push_back(vss_flip && !log_flip);
            }
        }
    }
    if (sc.components == 0 && any) sc.components = 1;  // Omega == whole circle
    return sc;
}

}  // namespace

OmegaScan omega_scan(const FlowStateS1& st, const WarpedProductSpec&,
                     const MonitorParams& mp) {
    return omega_scan_impl(st, mp, s_derivs(st));
}

double f_weight_constant(const FlowStateS1& st0, const MonitorParams& mp) {
    const SDerivsS1 d = s_derivs(st0);
    double g = 0.0;
    for (const auto& vs : d.v_s)
        for (double x : vs) g = std::max(g, x * x);
    return mp.beta * g;
}

MonitorRecordS1 monitor_record_s1(const FlowStateS1& st, const WarpedProductSpec& spec,
                                  const MonitorParams& mp, double b_const) {
    const int A = spec.fiber_count();
    const int m = st.m();
    const SDerivsS1 d = s_derivs(st);

    MonitorRecordS1 r;
    r.t = st.t;
    r.b_const = b_const;
    r.vmax.assign(A, 0.0);
    r.vmin.assign(A, 0.0);
    r.grad_sq_max.assign(A, 0.0);
    r.chi_max.assign(A, 0.0);
    r.z_max.assign(A, 0.0);

    std::vector<Field> chi(A);
    for (int a = 0; a < A; ++a) {
        chi[a] = chi_field(st, spec, d, a);
        double vmax = st.v[a][0], vmin = st.v[a][0];
        double gmax = 0.0, cmax = 0.0, zmax = 0.0;
        for (int k = 0; k < m; ++k) {
            vmax = std::max(vmax, st.v[a][k]);
            vmin = std::min(vmin, st.v[a][k]);
            gmax = std::max(gmax, d.v_s[a][k] * d.v_s[a][k]);
            cmax = std::max(cmax, chi[a][k]);
            zmax = std::max(zmax,
                            std::abs((spec.fibers[a].mu + d.v_s[a][k] * d.v_s[a][k]) /
                                     st.v[a][k]));
        }
        r.vmax[a] = vmax;
        r.vmin[a] = vmin;
        r.grad_sq_max[a] = gmax;
        r.chi_max[a] = cmax;
        r.z_max[a] = zmax;
    }

    // Q = 2 sum n_a log v_a, P = e^{Q/2}; F = sum_b (B + |grad v_b|^2) chi_b
    double qmin = 0.0;
    double fmax = 0.0;
    for (int k = 0; k < m; ++k) {
        double q = 0.0, F = 0.0;
        for (int a = 0; a < A; ++a) {
            q += 2.0 * spec.fibers[a].n * std::log(st.v[a][k]);
            F += (b_const + d.v_s[a][k] * d.v_s[a][k]) * chi[a][k];
        }
        if (k == 0 || q < qmin) qmin = q;
        fmax = std::max(fmax, F);
    }
    r.q_min = qmin;
    r.p_min = std::exp(0.5 * qmin);
    r.f_max = fmax;

    const CurvatureBlocks bl = curvature_blocks(st, spec);
    std::vector<int> flat;
    for (int a = 0; a < A; ++a)
        if (a != mp.pinch_fiber) flat.push_back(a);
    const RiemannNorm rn = riemann_norm_sq(bl, spec, st, flat);
    double rm = 0.0, fl = 0.0;
    for (int k = 0; k < m; ++k) {
        rm = std::max(rm, rn.total[k]);
        fl = std::max(fl, rn.flat_part[k]);
    }
    r.max_rm = std::sqrt(rm);
    r.sigma_fl_max = fl;

    const OmegaScan sc = omega_scan_impl(st, mp, d);
    r.l_min_on_omega = sc.l_min;
    r.omega_measure = sc.measure;
    r.omega_components = sc.components;

    const int a0 = mp.pinch_fiber;
    int kmin = 0;
    for (int k = 1; k < m; ++k)
        if (st.v[a0][k] < st.v[a0][kmin]) kmin = k;
    r.neck_index = kmin;
    r.kappa0_neck = -d.v_ss[a0][kmin] / st.v[a0][kmin];
    r.kappa1_neck = bl.kappa_fiber_self[a0][kmin];

    r.phi_min = *std::min_element(st.phi.begin(), st.phi.end());
    r.length = st.length();
    return r;
}

void AssertionLog::check(bool ok, const std::string& label) {
    ++checks;
    if (!ok) {
        ++failures;
        if (first_failures.size() < 8) first_failures.push_back(label);
    }
}

std::vector<double> c1_gradient_caps(const MonitorRecordS1& initial,
                                     const WarpedProductSpec& spec) {
    std::vector<double> caps(spec.fiber_count());
    for (int a = 0; a < spec.fiber_count(); ++a)
        caps[a] = std::max(initial.grad_sq_max[a],
                           spec.fibers[a].mu / (spec.fibers[a].n - 1));
    return caps;
}

void maximum_principle_check(const MonitorRecordS1& prev, const MonitorRecordS1& cur,
                             const std::vector<double>& grad_sq_cap, AssertionLog& log) {
    for (std::size_t a = 0; a < cur.vmax.size(); ++a) {
        log.check(cur.vmax[a] <= prev.vmax[a] * (1.0 + 1e-10),
                  "C0: vmax[" + std::to_string(a) + "] increased at t=" +
                      std::to_string(cur.t));
        log.check(cur.grad_sq_max[a] <= grad_sq_cap[a] + 1e-6,
                  "C1: |grad v|^2[" + std::to_string(a) + "] above cap at t=" +
                      std::to_string(cur.t));
    }
}

SurfaceMonitorRecord monitor_record_surface(const FlowStateSurface& st,
                                            const WarpedProductSpec& spec,
                                            const MonitorParams& mp) {
    const int A = spec.fiber_count();
    const std::size_t n = st.grid.size();
    const BaseGeom2D bg = base_geometry(st);
    const Field Rcheck = base_scalar_curvature_2d(st, bg);

    SurfaceMonitorRecord r;
    r.t = st.t;
    r.vmin.assign(A, 0.0);
    r.vmax.assign(A, 0.0);
    r.grad_w_sq_max.assign(A, 0.0);

    std::vector<Hessian2D> hw(A);
    std::vector<Field> v(A);
    for (int a = 0; a < A; ++a) {
        hw[a] = hessian_2d(st, bg, st.w[a]);
        v[a] = st.v(a);
        double vmin = v[a][0], vmax = v[a][0], gmax = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            vmin = std::min(vmin, v[a][k]);
            vmax = std::max(vmax, v[a][k]);
            gmax = std::max(gmax, hw[a].grad_sq[k]);
        }
        r.vmin[a] = vmin;
        r.vmax[a] = vmax;
        r.grad_w_sq_max[a] = gmax;
    }

    Field sqrtdet(n);
    for (std::size_t k = 0; k < n; ++k) sqrtdet[k] = std::sqrt(bg.det[k]);
    Field rda(n), pda(n);
    for (std::size_t k = 0; k < n; ++k) {
        rda[k] = Rcheck[k] * sqrtdet[k];
        double p = 0.0;
        for (int a = 0; a < A; ++a) p += spec.fibers[a].n * hw[a].grad_sq[k];
        pda[k] = p * sqrtdet[k];
    }
    r.area = integrate_periodic_2d(st.grid, sqrtdet);
    r.gauss_bonnet = integrate_periodic_2d(st.grid, rda);
    r.p_integral = integrate_periodic_2d(st.grid, pda);

    const int a0 = mp.pinch_fiber;
    const double mu1 = spec.fibers[a0].mu;
    double rmin = Rcheck[0], rmax = Rcheck[0], pmax = 0.0, fup = 0.0, flo = 0.0;
    double qmin = 0.0, c0fit = 0.0, c1fit = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double p = 0.0, q = 0.0;
        for (int a = 0; a < A; ++a) {
            p += spec.fibers[a].n * hw[a].grad_sq[k];
            q += 2.0 * spec.fibers[a].n * st.w[a][k];
        }
        rmin = std::min(rmin, Rcheck[k]);
        rmax = std::max(rmax, Rcheck[k]);
        pmax = std::max(pmax, p);
        const double fu = Rcheck[k] + 2.0 * p, fl = Rcheck[k] - p;
        if (k == 0) {
            fup = fu;
            flo = fl;
            qmin = q;
        } else {
            fup = std::max(fup, fu);
            flo = std::min(flo, fl);
            qmin = std::min(qmin, q);
        }
        const double v1sq = v[a0][k] * v[a0][k];
        if (Rcheck[k] > 2.0 * mu1 / (3.0 * v1sq)) c0fit = std::max(c0fit, Rcheck[k]);
        c1fit = std::max(c1fit, -Rcheck[k] * v1sq);
    }
    r.rcheck_min = rmin;
    r.rcheck_max = rmax;
    r.p_max = pmax;
    r.f_upper_max = fup;
    r.f_lower_min = flo;
    r.qcal_min = qmin;
    r.pcal_min = std::exp(0.5 * qmin);
    r.c0_fit = c0fit;
    r.c1_fit = std::max(c1fit, 0.0);

    const CurvatureBlocks bl = curvature_blocks(st, spec);
    const RiemannNorm rn = riemann_norm_sq(bl, spec, st);
    double rm = 0.0;
    for (std::size_t k = 0; k < n; ++k) rm = std::max(rm, rn.total[k]);
    r.max_rm = std::sqrt(rm);
    return r;
}

ResidualSample verify_hessian_evolution(const StateTriple<FlowStateS1>& tr,
                                        const WarpedProductSpec& spec, int a,
                                        bool sign_flip_z) {
    const FlowStateS1& st = tr.s1;
    const int A = spec.fiber_count();
    const std::size_t n = st.phi.size();
    const double hm = tr.s1.t - tr.s0.t, hp = tr.s2.t - tr.s1.t;
    if (!(hm > 0.0) || !(hp > 0.0))
        throw InsufficientData("hessian residual needs three increasing-time states");

    const SDerivsS1 d0 = s_derivs(tr.s0), d1 = s_derivs(tr.s1), d2 = s_derivs(tr.s2);
    const Field chi0 = chi_field(tr.s0, spec, d0, a);
    const Field chi1 = chi_field(tr.s1, spec, d1, a);
    const Field chi2 = chi_field(tr.s2, spec, d2, a);

    const Field chi_s = ds_field(st, chi1);
    Field chi_ss = deriv1_periodic(chi_s, st.grid.h);
    for (std::size_t k = 0; k < n; ++k) chi_ss[k] /= st.phi[k];

    // third s-derivative of v_a and the s-derivatives of Z_a and of the mixed
    // coefficients c_b = <grad v_b, grad v_a>/v_b
    Field vsss = deriv1_periodic(d1.v_ss[a], st.grid.h);
    for (std::size_t k = 0; k < n; ++k) vsss[k] /= st.phi[k];

    Field Z(n);
    const double mua = spec.fibers[a].mu;
    for (std::size_t k = 0; k < n; ++k)
        Z[k] = (mua + d1.v_s[a][k] * d1.v_s[a][k]) / st.v[a][k];
    const Field Zs = ds_field(st, Z);
    Field Zss = deriv1_periodic(Zs, st.grid.h);
    for (std::size_t k = 0; k < n; ++k) Zss[k] /= st.phi[k];

    std::vector<Field> cb(A), cb_s(A);
    for (int b = 0; b < A; ++b) {
        cb[b].resize(n);
        for (std::size_t k = 0; k < n; ++k)
            cb[b][k] = d1.v_s[b][k] * d1.v_s[a][k] / st.v[b][k];
        cb_s[b] = ds_field(st, cb[b]);
    }

    const double zsign = sign_flip_z ? -1.0 : 1.0;
    Field res(n), rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double dchi = centered_dt(chi0[k], chi1[k], chi2[k], hm, hp);

        double lap = chi_ss[k];
        for (int b = 0; b < A; ++b)
            lap += spec.fibers[b].n * d1.v_s[b][k] * chi_s[k] / st.v[b][k];

        double g3 = vsss[k] * vsss[k];
        for (int b = 0; b < A; ++b) {
            const double rb = d1.v_s[b][k] / st.v[b][k];
            const double Mb = rb * d1.v_ss[a][k] - rb * rb * d1.v_s[a][k];
            g3 += spec.fibers[b].n * (cb_s[b][k] * cb_s[b][k] + 2.0 * Mb * Mb);
        }

        double hz = d1.v_ss[a][k] * Zss[k];
        for (int b = 0; b < A; ++b)
            hz += spec.fibers[b].n * cb[b][k] * (d1.v_s[b][k] * Zs[k] / st.v[b][k]);

        double t2 = 0.0, t3 = 0.0, t4 = 0.0;
        for (int b = 0; b < A; ++b) {
            const int nb = spec.fibers[b].n;
            const double vb = st.v[b][k];
            const double dot_ab = d1.v_s[b][k] * d1.v_s[a][k];
            // coefficient -8: the base-block and fiber-block curvature
            // contractions each contribute -4 of this term
            t2 += -8.0 * nb * dot_ab * (d1.v_ss[b][k] * d1.v_ss[a][k]) / (vb * vb);
            t3 += 4.0 * nb *
                  (spec.fibers[b].mu - (nb - 1) * d1.v_s[b][k] * d1.v_s[b][k]) * dot_ab *
                  dot_ab / (vb * vb * vb * vb);
            for (int c = 0; c < A; ++c) {
                if (c == b) continue;
                const double vc = st.v[c][k];
                t4 += -4.0 * nb * spec.fibers[c].n * (d1.v_s[b][k] * d1.v_s[c][k]) *
                      dot_ab * (d1.v_s[c][k] * d1.v_s[a][k]) / (vb * vb * vc * vc);
            }
        }

        rhs[k] = lap - 2.0 * g3 - 2.0 * zsign * hz + t2 + t3 + t4;
        res[k] = dchi - rhs[k];
    }

    return {st.t, rms(res), rms(rhs)};
}

ResidualSample verify_R_evolution(const StateTriple<FlowStateSurface>& tr,
                                  const WarpedProductSpec& spec) {
    const FlowStateSurface& st = tr.s1;
    const std::size_t n = st.grid.size();
    const double hm = tr.s1.t - tr.s0.t, hp = tr.s2.t - tr.s1.t;
    if (!(hm > 0.0) || !(hp > 0.0))
        throw InsufficientData("R residual needs three increasing-time states");

    const Field R0 = base_scalar_curvature_2d(tr.s0);
    const Field R2 = base_scalar_curvature_2d(tr.s2);
    const BaseGeom2D bg = base_geometry(st);
    const Field R1 = base_scalar_curvature_2d(st, bg);
    const Hessian2D hR = hessian_2d(st, bg, R1);

    std::vector<Hessian2D> hw(spec.fiber_count());
    for (int a = 0; a < spec.fiber_count(); ++a) hw[a] = hessian_2d(st, bg, st.w[a]);

    Field res(n), rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double dtR = centered_dt(R0[k], R1[k], R2[k], hm, hp);
        double p = 0.0, src = 0.0;
        for (int a = 0; a < spec.fiber_count(); ++a) {
            p += spec.fibers[a].n * hw[a].grad_sq[k];
            src += 2.0 * spec.fibers[a].n *
                   (hw[a].lap[k] * hw[a].lap[k] - hw[a].norm_sq[k]);
        }
        rhs[k] = R1[k] * R1[k] - 2.0 * R1[k] * p + src;
        res[k] = dtR - hR.lap[k] - rhs[k];
    }
    return {st.t, rms(res), rms(rhs)};
}

namespace {

// Reduce a multi-fiber surface state to the 4-D subsystem (first fiber only).
// Extra fibers must be spatially constant so the reduction is exact.
std::pair<FlowStateSurface, WarpedProductSpec> reduce_to_4d(
    const FlowStateSurface& st, const WarpedProductSpec& spec) {
    if (spec.fibers.empty() || spec.fibers[0].n != 2 || spec.base != BaseKind::TorusT2)
        throw DimensionMismatch("4-D identity needs a T^2 base with an S^2 first fiber");
    for (int a = 1; a < spec.fiber_count(); ++a) {
        double wmin = st.w[a][0], wmax = st.w[a][0];
        for (double x : st.w[a]) {
            wmin = std::min(wmin, x);
            wmax = std::max(wmax, x);
        }
        if (wmax - wmin > 1e-12)
            throw DimensionMismatch("4-D identity requires spectator fibers to be constant");
    }
    WarpedProductSpec sub;
    sub.base = BaseKind::TorusT2;
    sub.fibers = {spec.fibers[0]};
    FlowStateSurface red = st;
    red.w.resize(1);
    return {std::move(red), std::move(sub)};
}

}  // namespace

ResidualSample uhlenbeck_identity_residual(const StateTriple<FlowStateSurface>& tr,
                                           const WarpedProductSpec& spec) {
    auto [s1, sub] = reduce_to_4d(tr.s1, spec);
    auto [s0, sub0] = reduce_to_4d(tr.s0, spec);
    auto [s2, sub2] = reduce_to_4d(tr.s2, spec);
    const std::size_t n = s1.grid.size();
    const double hm = s1.t - s0.t, hp = s2.t - s1.t;
    if (!(hm > 0.0) || !(hp > 0.0))
        throw InsufficientData("identity residual needs three increasing-time states");

    const UhlenbeckQuantities u0 = uhlenbeck(s0, sub);
    const UhlenbeckQuantities u1 = uhlenbeck(s1, sub);
    const UhlenbeckQuantities u2 = uhlenbeck(s2, sub);

    const BaseGeom2D bg = base_geometry(s1);
    Field ab(n);
    for (std::size_t k = 0; k < n; ++k) ab[k] = u1.a1[k] + u1.b1[k];
    const Hessian2D hab = hessian_2d(s1, bg, ab);
    const Hessian2D hw = hessian_2d(s1, bg, s1.w[0]);

    Field res(n), rhs(n);
    const int n1 = sub.fibers[0].n;
    for (std::size_t k = 0; k < n; ++k) {
        const double f0 = u0.a1[k] + u0.b1[k];
        const double f1 = ab[k];
        const double f2 = u2.a1[k] + u2.b1[k];
        const double dtab = centered_dt(f0, f1, f2, hm, hp);
        // full Laplacian of a base scalar: Lapcheck + sum n_a <grad w_a, grad .>
        const double cross = bg.i11[k] * hw.fx[k] * hab.fx[k] +
                             bg.i12[k] * (hw.fx[k] * hab.fy[k] + hw.fy[k] * hab.fx[k]) +
                             bg.i22[k] * hw.fy[k] * hab.fy[k];
        const double lap_full = hab.lap[k] + n1 * cross;
        rhs[k] = f1 * f1 + 2.0 * (u1.a2[k] * u1.a2[k] + u1.h[k]);
        res[k] = dtab - lap_full - rhs[k];
    }
    return {s1.t, rms(res), rms(rhs)};
}

TypeIReport typei_and_rescale(const std::vector<MonitorRecordS1>& series,
                              const WarpedProductSpec& spec, double t_hat,
                              const FlowStateS1& final_state, const MonitorParams& mp,
                              double profile_delta) {
    return typei_and_rescale(series, spec, t_hat, std::vector<FlowStateS1>{final_state},
                             mp, profile_delta);
}

TypeIReport typei_and_rescale(const std::vector<MonitorRecordS1>& series,
                              const WarpedProductSpec& spec, double t_hat,
                              const std::vector<FlowStateS1>& profile_candidates,
                              const MonitorParams& mp, double profile_delta,
                              double t_hat_uncertainty) {
    const int a0 = mp.pinch_fiber;
    const double mu1 = spec.fibers[a0].mu;
    const int n1 = spec.fibers[a0].n;
    if (series.empty()) throw InsufficientData("empty monitor series");

    const double v_end_sq =
        series.back().vmin[a0] * series.back().vmin[a0];
    std::size_t begin = series.size();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double vsq = series[i].vmin[a0] * series[i].vmin[a0];
        if (vsq <= 10.0 * v_end_sq) {
            begin = i;
            break;
        }
    }
    if (series.size() - begin < 10)
        throw InsufficientData("fewer than 10 samples in the final resolved decade");

    TypeIReport rep;
    rep.p_decay_c4 = 0.0;
    bool first = true;
    for (std::size_t i = begin; i < series.size(); ++i) {
        const MonitorRecordS1& r = series[i];
        const double tt = t_hat - r.t;
        if (!(tt > 0.0)) continue;
        TypeIPoint p;
        p.t = r.t;
        p.type_i_ratio = tt * r.max_rm;
        p.kappa0_rescaled = tt * r.kappa0_neck;
        p.kappa1_rescaled = tt * r.kappa1_neck;
        p.sigma_fl_rescaled = tt * tt * r.sigma_fl_max;
        p.vmin_sq_over_tt = r.vmin[a0] * r.vmin[a0] / tt;
        p.neck_ratio = r.vmin[a0] / std::sqrt(2.0 * mu1 * tt);
        rep.series.push_back(p);

        const double pd = std::pow(r.p_min, 2.0 / n1) / tt;
        rep.p_decay_c4 = first ? pd : std::min(rep.p_decay_c4, pd);
        rep.f_bound_c = std::max(rep.f_bound_c, r.f_max * tt);
        const double v1 = r.vmin[a0];
        if (v1 < 1.0)
            rep.kappa0_env_c = std::max(
                rep.kappa0_env_c, std::abs(r.kappa0_neck) * v1 * v1 * std::abs(std::log(v1)));
        first = false;
    }
    if (rep.series.empty()) throw InsufficientData("no samples before t_hat");

    // sensitivity of the deepest ratios to the singular-time fit residual
    if (t_hat_uncertainty > 0.0) {
        const MonitorRecordS1& last = series.back();
        const double u = t_hat_uncertainty;
        auto ratios = [&](double th) {
            const double tt = th - last.t;
            if (!(tt > 0.0)) return std::pair{0.0, 0.0};
            return std::pair{last.vmin[a0] / std::sqrt(2.0 * mu1 * tt),
                             tt * last.max_rm};
        };
        const auto [n_plus, r_plus] = ratios(t_hat + u);
        const auto [n_minus, r_minus] = ratios(t_hat - u);
        rep.neck_ratio_spread = std::abs(n_plus - n_minus);
        rep.type_i_ratio_spread = std::abs(r_plus - r_minus);
    }

    // ---- neck profile bounds ----
    // pick the deepest candidate whose parabolic region |sigma| <= 2 sqrt(-tt log tt)
    // still spans at least ~8 grid cells of arclength
    const FlowStateS1* chosen = nullptr;
    for (const FlowStateS1& cand : profile_candidates) {
        const double tt = t_hat - cand.t;
        if (!(tt > 0.0) || tt >= 1.0) continue;
        int kneck = 0;
        for (int k = 1; k < cand.m(); ++k)
            if (cand.v[a0][k] < cand.v[a0][kneck]) kneck = k;
        const double ds_neck = cand.phi[kneck] * cand.grid.h;
        const double width = 2.0 * std::sqrt(tt * (-std::log(tt)));
        if (width >= 8.0 * ds_neck) chosen = &cand;
    }
    if (!chosen && !profile_candidates.empty()) chosen = &profile_candidates.front();
    if (!chosen) return rep;

    const FlowStateS1& st = *chosen;
    const int m = st.m();
    ProfileCheck& pc = rep.profile;
    pc.delta = profile_delta;
    int kmin = 0;
    for (int k = 1; k < m; ++k)
        if (st.v[a0][k] < st.v[a0][kmin]) kmin = k;
    pc.neck_index = kmin;

    const double tt = t_hat - st.t;
    if (tt > 0.0 && tt < 1.0) {
        // signed arclength from the neck, short way around
        std::vector<double> sig(m, 0.0);
        for (int off = 1; off <= m / 2; ++off) {
            const int kp = (kmin + off) % m;
            const int kp_prev = (kmin + off - 1) % m;
            sig[kp] = sig[kp_prev] + 0.5 * (st.phi[kp_prev] + st.phi[kp]) * st.grid.h;
            const int km = (kmin - off % m + m) % m;
            const int km_next = (kmin - (off - 1) % m + m) % m;
            sig[km] = sig[km_next] - 0.5 * (st.phi[km] + st.phi[km_next]) * st.grid.h;
        }
        const double main = std::sqrt(2.0 * (n1 - 1) * tt);
        const double logt = -std::log(tt);
        const double inner_lim = 2.0 * std::sqrt(tt * logt);
        const double outer_lim = std::pow(tt, 0.5 - pc.delta);
        for (int k = 0; k < m; ++k) {
            const double s = sig[k];
            const double as = std::abs(s);
            if (as < 1e-14) continue;
            pc.sigma.push_back(s);
            pc.v1.push_back(st.v[a0][k]);
            if (as <= inner_lim) {
                ++pc.inner_samples;
                pc.c_inner = std::max(pc.c_inner,
                                      (st.v[a0][k] - main) * logt * std::sqrt(tt) / (as * as));
            } else if (as <= outer_lim) {
                ++pc.outer_samples;
                const double lg = std::log(as / std::sqrt(tt * logt));
                if (lg > 0.0)
                    pc.c_outer = std::max(
                        pc.c_outer, st.v[a0][k] * std::sqrt(logt) / (as * std::sqrt(lg)));
            }
        }
        pc.c_inner = std::max(pc.c_inner, 0.0);
        // margins with the fitted constants (0 at the fit's argmax by construction)
        double im = 0.0, om = 0.0;
        bool ifirst = true, ofirst = true;
        for (std::size_t i = 0; i < pc.sigma.size(); ++i) {
            const double as = std::abs(pc.sigma[i]);
            if (as <= inner_lim) {
                const double bound = main + pc.c_inner * as * as / (logt * std::sqrt(tt));
                const double mg = bound - pc.v1[i];
                im = ifirst ? mg : std::min(im, mg);
                ifirst = false;
            } else if (as <= outer_lim) {
                const double lg = std::log(as / std::sqrt(tt * logt));
                if (lg <= 0.0) continue;
                const double bound = pc.c_outer * as * std::sqrt(lg) / std::sqrt(logt);
                const double mg = bound - pc.v1[i];
                om = ofirst ? mg : std::min(om, mg);
                ofirst = false;
            }
        }
        pc.inner_margin_min = im;
        pc.outer_margin_min = om;
    }
    return rep;
}

}  // namespace warpflow
