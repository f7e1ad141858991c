#include "warpflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "warpflow/errors.hpp"

namespace warpflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Unit-sphere hyperspherical metric: ghat_kk = prod_{m<k} sin^2(psi_m).
// The curvature-lhat sphere scales this by 1/lhat; Christoffels are unchanged.
std::vector<double> sphere_metric_diag(const std::vector<double>& psi) {
    const int n = static_cast<int>(psi.size());
    std::vector<double> d(n);
    double pref = 1.0;
    for (int k = 0; k < n; ++k) {
        d[k] = pref;
        const double s = std::sin(psi[k]);
        pref *= s * s;
    }
    return d;
}

void check_pole(const std::vector<double>& psi) {
    const int n = static_cast<int>(psi.size());
    for (int k = 0; k + 1 < n; ++k) {
        if (psi[k] < kPoleMargin || psi[k] > std::numbers::pi - kPoleMargin)
            throw ChartSingularity("fiber chart angle too close to a pole");
    }
}

struct FiberGradS1 {
    // s-derivatives of every v_a plus values; shared by the block assemblies.
    const FlowStateS1& st;
    SDerivsS1 d;
    explicit FiberGradS1(const FlowStateS1& s) : st(s), d(s_derivs(s)) {}
};

}  // namespace

CurvatureBlocks curvature_blocks(const FlowStateS1& st, const WarpedProductSpec& spec) {
    st.validate();
    const int A = spec.fiber_count();
    const std::size_t n = st.phi.size();
    const SDerivsS1 d = s_derivs(st);

    CurvatureBlocks bl;
    bl.npts = n;
    bl.base_comp = 1;
    bl.kappa_fiber_self.assign(A, Field(n));
    bl.kappa_fiber_cross.assign(A, std::vector<Field>(A, Field(n, 0.0)));
    bl.base_fiber_block.assign(A, std::vector<Field>(1, Field(n)));
    bl.ricci_base.assign(1, Field(n, 0.0));
    bl.ricci_fiber_coeff.assign(A, Field(n));
    bl.scalar_R.assign(n, 0.0);

    for (int a = 0; a < A; ++a) {
        const double lhat = spec.fibers[a].lambda_hat();
        for (std::size_t k = 0; k < n; ++k) {
            const double v = st.v[a][k], vs = d.v_s[a][k], vss = d.v_ss[a][k];
            bl.kappa_fiber_self[a][k] = (lhat - vs * vs) / (v * v);
            bl.base_fiber_block[a][0][k] = -vss / v;
            bl.ricci_base[0][k] -= spec.fibers[a].n * vss / v;
        }
        for (int b = 0; b < a; ++b) {
            for (std::size_t k = 0; k < n; ++k) {
                const double c = -d.v_s[a][k] * d.v_s[b][k] / (st.v[a][k] * st.v[b][k]);
                bl.kappa_fiber_cross[a][b][k] = c;
                bl.kappa_fiber_cross[b][a][k] = c;
            }
        }
    }
    for (int a = 0; a < A; ++a) {
        const int na = spec.fibers[a].n;
        for (std::size_t k = 0; k < n; ++k) {
            double coeff = -d.v_ss[a][k] / st.v[a][k] + (na - 1) * bl.kappa_fiber_self[a][k];
            for (int b = 0; b < A; ++b)
                if (b != a) coeff += spec.fibers[b].n * bl.kappa_fiber_cross[a][b][k];
            bl.ricci_fiber_coeff[a][k] = coeff;
        }
    }
    // multiplicity-weighted trace of the Ricci pieces
    for (std::size_t k = 0; k < n; ++k) {
        double R = bl.ricci_base[0][k];
        for (int a = 0; a < A; ++a) R += spec.fibers[a].n * bl.ricci_fiber_coeff[a][k];
        bl.scalar_R[k] = R;
    }
    return bl;
}

CurvatureBlocks curvature_blocks(const FlowStateSurface& st, const WarpedProductSpec& spec) {
    st.validate();
    const int A = spec.fiber_count();
    const std::size_t n = st.grid.size();
    const BaseGeom2D bg = base_geometry(st);
    const Field Rcheck = base_scalar_curvature_2d(st, bg);

    std::vector<Field> vfields(A);
    std::vector<Hessian2D> hv(A);
    for (int a = 0; a < A; ++a) {
        vfields[a] = st.v(a);
        hv[a] = hessian_2d(st, bg, vfields[a]);
    }

    CurvatureBlocks bl;
    bl.npts = n;
    bl.base_comp = 3;
    bl.kappa_base.resize(n);
    bl.kappa_fiber_self.assign(A, Field(n));
    bl.kappa_fiber_cross.assign(A, std::vector<Field>(A, Field(n, 0.0)));
    bl.base_fiber_block.assign(A, std::vector<Field>(3, Field(n)));
    bl.ricci_base.assign(3, Field(n));
    bl.ricci_fiber_coeff.assign(A, Field(n));
    bl.scalar_R.assign(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) bl.kappa_base[k] = 0.5 * Rcheck[k];

    for (int a = 0; a < A; ++a) {
        const double lhat = spec.fibers[a].lambda_hat();
        for (std::size_t k = 0; k < n; ++k) {
            const double v = vfields[a][k];
            bl.kappa_fiber_self[a][k] = (lhat - hv[a].grad_sq[k]) / (v * v);
            bl.base_fiber_block[a][0][k] = -hv[a].h11[k] / v;
            bl.base_fiber_block[a][1][k] = -hv[a].h12[k] / v;
            bl.base_fiber_block[a][2][k] = -hv[a].h22[k] / v;
        }
        for (int b = 0; b < a; ++b) {
            for (std::size_t k = 0; k < n; ++k) {
                const double dot = bg.i11[k] * hv[a].fx[k] * hv[b].fx[k] +
                                   bg.i12[k] * (hv[a].fx[k] * hv[b].fy[k] +
                                                hv[a].fy[k] * hv[b].fx[k]) +
                                   bg.i22[k] * hv[a].fy[k] * hv[b].fy[k];
                const double c = -dot / (vfields[a][k] * vfields[b][k]);
                bl.kappa_fiber_cross[a][b][k] = c;
                bl.kappa_fiber_cross[b][a][k] = c;
            }
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        double h11 = 0.0, h12 = 0.0, h22 = 0.0;
        for (int a = 0; a < A; ++a) {
            const int na = spec.fibers[a].n;
            h11 += na * bl.base_fiber_block[a][0][k];
            h12 += na * bl.base_fiber_block[a][1][k];
            h22 += na * bl.base_fiber_block[a][2][k];
        }
        bl.ricci_base[0][k] = 0.5 * Rcheck[k] * st.g11[k] + h11;
        bl.ricci_base[1][k] = 0.5 * Rcheck[k] * st.g12[k] + h12;
        bl.ricci_base[2][k] = 0.5 * Rcheck[k] * st.g22[k] + h22;
    }
    for (int a = 0; a < A; ++a) {
        const int na = spec.fibers[a].n;
        for (std::size_t k = 0; k < n; ++k) {
            double coeff = -hv[a].lap[k] / vfields[a][k] +
                           (na - 1) * bl.kappa_fiber_self[a][k];
            for (int b = 0; b < A; ++b)
                if (b != a) coeff += spec.fibers[b].n * bl.kappa_fiber_cross[a][b][k];
            bl.ricci_fiber_coeff[a][k] = coeff;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double base_trace = bg.i11[k] * bl.ricci_base[0][k] +
                                  2.0 * bg.i12[k] * bl.ricci_base[1][k] +
                                  bg.i22[k] * bl.ricci_base[2][k];
        double R = base_trace;
        for (int a = 0; a < A; ++a) R += spec.fibers[a].n * bl.ricci_fiber_coeff[a][k];
        bl.scalar_R[k] = R;
    }
    return bl;
}

Field scalar_R_direct(const FlowStateS1& st, const WarpedProductSpec& spec) {
    const int A = spec.fiber_count();
    const std::size_t n = st.phi.size();
    const SDerivsS1 d = s_derivs(st);
    Field R(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double r = 0.0;
        for (int a = 0; a < A; ++a) {
            const int na = spec.fibers[a].n;
            const double lhat = spec.fibers[a].lambda_hat();
            const double v = st.v[a][k], vs = d.v_s[a][k];
            r += -2.0 * na * d.v_ss[a][k] / v + na * (na - 1) * (lhat - vs * vs) / (v * v);
            for (int b = 0; b < A; ++b) {
                if (b == a) continue;
                r -= na * spec.fibers[b].n * vs * d.v_s[b][k] / (v * st.v[b][k]);
            }
        }
        R[k] = r;
    }
    return R;
}

Field scalar_R_direct(const FlowStateSurface& st, const WarpedProductSpec& spec) {
    const int A = spec.fiber_count();
    const std::size_t n = st.grid.size();
    const BaseGeom2D bg = base_geometry(st);
    Field R = base_scalar_curvature_2d(st, bg);
    std::vector<Field> v(A);
    std::vector<Hessian2D> hv(A);
    for (int a = 0; a < A; ++a) {
        v[a] = st.v(a);
        hv[a] = hessian_2d(st, bg, v[a]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        double r = R[k];
        for (int a = 0; a < A; ++a) {
            const int na = spec.fibers[a].n;
            const double lhat = spec.fibers[a].lambda_hat();
            r += -2.0 * na * hv[a].lap[k] / v[a][k] +
                 na * (na - 1) * (lhat - hv[a].grad_sq[k]) / (v[a][k] * v[a][k]);
            for (int b = 0; b < A; ++b) {
                if (b == a) continue;
                const double dot = bg.i11[k] * hv[a].fx[k] * hv[b].fx[k] +
                                   bg.i12[k] * (hv[a].fx[k] * hv[b].fy[k] +
                                                hv[a].fy[k] * hv[b].fx[k]) +
                                   bg.i22[k] * hv[a].fy[k] * hv[b].fy[k];
                r -= na * spec.fibers[b].n * dot / (v[a][k] * v[b][k]);
            }
        }
        R[k] = r;
    }
    return R;
}

namespace {

// Shared multiplicity-weighted assembly. |H_a|^2 is supplied per point since the
// component layout differs between bases. Cross multiplicity is 2 n_a n_b per
// ordered pair, validated against the frame-sum oracle.
RiemannNorm assemble_norm(const CurvatureBlocks& bl, const WarpedProductSpec& spec,
                          const std::vector<Field>& bf_norm_sq,
                          const std::vector<int>& flat_fibers) {
    const int A = spec.fiber_count();
    const std::size_t n = bl.npts;
    std::vector<char> flat(A, 0);
    for (int a : flat_fibers) flat[a] = 1;

    RiemannNorm out;
    out.total.assign(n, 0.0);
    out.flat_part.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double tot = 0.0, fl = 0.0;
        if (bl.base_comp == 3) tot += 4.0 * bl.kappa_base[k] * bl.kappa_base[k];
        for (int a = 0; a < A; ++a) {
            const int na = spec.fibers[a].n;
            const double self = 2.0 * na * (na - 1) * bl.kappa_fiber_self[a][k] *
                                bl.kappa_fiber_self[a][k];
            const double bf = 4.0 * na * bf_norm_sq[a][k];
            tot += self + bf;
            if (flat[a]) fl += self + bf;
            for (int b = 0; b < A; ++b) {
                if (b == a) continue;
                const double cr = 2.0 * na * spec.fibers[b].n *
                                  bl.kappa_fiber_cross[a][b][k] *
                                  bl.kappa_fiber_cross[a][b][k];
                tot += cr;
                if (flat[a] || flat[b]) fl += cr;
            }
        }
        out.total[k] = tot;
        out.flat_part[k] = fl;
    }
    return out;
}

}  // namespace

RiemannNorm riemann_norm_sq(const CurvatureBlocks& bl, const WarpedProductSpec& spec,
                            const FlowStateS1&, const std::vector<int>& flat_fibers) {
    const int A = spec.fiber_count();
    std::vector<Field> bf(A);
    for (int a = 0; a < A; ++a) {
        bf[a].resize(bl.npts);
        for (std::size_t k = 0; k < bl.npts; ++k) {
            const double h = bl.base_fiber_block[a][0][k];
            bf[a][k] = h * h;
        }
    }
    return assemble_norm(bl, spec, bf, flat_fibers);
}

RiemannNorm riemann_norm_sq(const CurvatureBlocks& bl, const WarpedProductSpec& spec,
                            const FlowStateSurface& st, const std::vector<int>& flat_fibers) {
    const int A = spec.fiber_count();
    const BaseGeom2D bg = base_geometry(st);
    std::vector<Field> bf(A);
    for (int a = 0; a < A; ++a) {
        bf[a].resize(bl.npts);
        for (std::size_t k = 0; k < bl.npts; ++k) {
            const double h11 = bl.base_fiber_block[a][0][k];
            const double h12 = bl.base_fiber_block[a][1][k];
            const double h22 = bl.base_fiber_block[a][2][k];
            const double i11 = bg.i11[k], i12 = bg.i12[k], i22 = bg.i22[k];
            bf[a][k] = i11 * i11 * h11 * h11 + i22 * i22 * h22 * h22 +
                       2.0 * i12 * i12 * h11 * h22 + 4.0 * i11 * i12 * h11 * h12 +
                       4.0 * i22 * i12 * h22 * h12 +
                       2.0 * (i11 * i22 + i12 * i12) * h12 * h12;
        }
    }
    return assemble_norm(bl, spec, bf, flat_fibers);
}

FullOperators operators_full(const FlowStateS1& st, const WarpedProductSpec& spec,
                             const Field& f) {
    const int A = spec.fiber_count();
    const std::size_t n = st.phi.size();
    const SDerivsS1 d = s_derivs(st);
    const Field fs = ds_field(st, f);
    Field fss = deriv1_periodic(fs, st.grid.h);
    for (std::size_t k = 0; k < n; ++k) fss[k] *= d.phi_over[k];

    FullOperators op;
    op.hess_fiber_coeff.assign(A, Field(n));
    op.laplacian.assign(n, 0.0);
    op.hessian_norm_sq.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double lap = fss[k];
        double hn = fss[k] * fss[k];
        for (int a = 0; a < A; ++a) {
            const double c = d.v_s[a][k] * fs[k] / st.v[a][k];
            op.hess_fiber_coeff[a][k] = c;
            lap += spec.fibers[a].n * c;
            hn += spec.fibers[a].n * c * c;
        }
        op.laplacian[k] = lap;
        op.hessian_norm_sq[k] = hn;
    }
    return op;
}

FullOperators operators_full(const FlowStateSurface& st, const WarpedProductSpec& spec,
                             const Field& f) {
    const int A = spec.fiber_count();
    const std::size_t n = st.grid.size();
    const BaseGeom2D bg = base_geometry(st);
    const Hessian2D hf = hessian_2d(st, bg, f);

    FullOperators op;
    op.hess_fiber_coeff.assign(A, Field(n));
    op.laplacian = hf.lap;
    op.hessian_norm_sq = hf.norm_sq;
    for (int a = 0; a < A; ++a) {
        const Field va = st.v(a);
        const Field vx = deriv_x(st.grid, va), vy = deriv_y(st.grid, va);
        for (std::size_t k = 0; k < n; ++k) {
            const double dot = bg.i11[k] * vx[k] * hf.fx[k] +
                               bg.i12[k] * (vx[k] * hf.fy[k] + vy[k] * hf.fx[k]) +
                               bg.i22[k] * vy[k] * hf.fy[k];
            const double c = dot / va[k];
            op.hess_fiber_coeff[a][k] = c;
            op.laplacian[k] += spec.fibers[a].n * c;
            op.hessian_norm_sq[k] += spec.fibers[a].n * c * c;
        }
    }
    return op;
}

Field base_scalar_curvature_2d(const FlowStateSurface& st) {
    return base_scalar_curvature_2d(st, base_geometry(st));
}

Field base_scalar_curvature_2d(const FlowStateSurface& st, const BaseGeom2D& bg) {
    const Grid2D& g = st.grid;
    const std::size_t n = g.size();
    // R_1212 = g_1l (d_1 G^l_22 - d_2 G^l_12 + G^l_1m G^m_22 - G^l_2m G^m_12)
    const Field d1G122 = deriv_x(g, bg.G122), d2G112 = deriv_y(g, bg.G112);
    const Field d1G222 = deriv_x(g, bg.G222), d2G212 = deriv_y(g, bg.G212);
    Field R(n);
    for (std::size_t k = 0; k < n; ++k) {
        // G^l_{1m}G^m_{22} - G^l_{2m}G^m_{12}
        const double s1 = bg.G111[k] * bg.G122[k] + bg.G112[k] * bg.G222[k] -
                          bg.G112[k] * bg.G112[k] - bg.G122[k] * bg.G212[k];
        const double s2 = bg.G211[k] * bg.G122[k] + bg.G212[k] * bg.G222[k] -
                          bg.G212[k] * bg.G112[k] - bg.G222[k] * bg.G212[k];
        const double r1 = d1G122[k] - d2G112[k] + s1;
        const double r2 = d1G222[k] - d2G212[k] + s2;
        const double R1212 = st.g11[k] * r1 + st.g12[k] * r2;
        R[k] = 2.0 * R1212 / bg.det[k];
    }
    return R;
}

namespace {

int nearest_node(double coord, double h, int m, const char* what) {
    const double period = h * m;
    double x = std::fmod(coord, period);
    if (x < 0) x += period;
    const int j = static_cast<int>(std::lround(x / h)) % m;
    if (std::abs(x - j * h) > 1e-10 && std::abs(x - j * h - period) > 1e-10)
        throw InvalidConfig(std::string(what) + " coordinate must lie on a grid node");
    return j;
}

// Fill the fiber blocks of Gamma^L_{MN} shared by both bases. grad_up[k] is the
// gcheck-raised base gradient of v_a, grad_dn[i] the coordinate gradient.
void fill_fiber_christoffels(std::vector<double>& G, int N, int nbase,
                             const WarpedProductSpec& spec,
                             const std::vector<std::vector<double>>& psi,
                             const std::vector<double>& vvals,
                             const std::vector<std::vector<double>>& grad_up,
                             const std::vector<std::vector<double>>& grad_dn) {
    auto at = [&](int L, int M, int Nn) -> double& { return G[(L * N + M) * N + Nn]; };
    int off = nbase;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        const int na = spec.fibers[a].n;
        const double lhat = spec.fibers[a].lambda_hat();
        const auto diag = sphere_metric_diag(psi[a]);
        const double v = vvals[a];
        // g_a components in chart coordinates: v^2 ghat/lhat, diagonal
        for (int al = 0; al < na; ++al) {
            const double ga = v * v * diag[al] / lhat;
            for (int k = 0; k < nbase; ++k)
                at(k, off + al, off + al) = -grad_up[a][k] / v * ga;
            for (int i = 0; i < nbase; ++i) {
                at(off + al, i, off + al) = grad_dn[a][i] / v;
                at(off + al, off + al, i) = grad_dn[a][i] / v;
            }
        }
        // hat-sphere Christoffels: for k < j, Ghat^k_{jj} = -ghat_jj cot(psi_k)/ghat_kk,
        // Ghat^j_{jk} = Ghat^j_{kj} = cot(psi_k).
        for (int kk = 0; kk < na; ++kk) {
            for (int j = kk + 1; j < na; ++j) {
                const double cot = std::cos(psi[a][kk]) / std::sin(psi[a][kk]);
                at(off + kk, off + j, off + j) = -diag[j] * cot / diag[kk];
                at(off + j, off + j, off + kk) = cot;
                at(off + j, off + kk, off + j) = cot;
            }
        }
        off += na;
    }
}

std::vector<std::vector<double>> split_fiber_angles(const WarpedProductSpec& spec,
                                                    const ChartPoint& p, int nbase) {
    if (static_cast<int>(p.coords.size()) != spec.total_dim())
        throw DimensionMismatch("chart point has wrong dimension");
    std::vector<std::vector<double>> psi(spec.fiber_count());
    int off = nbase;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        psi[a].assign(p.coords.begin() + off, p.coords.begin() + off + spec.fibers[a].n);
        check_pole(psi[a]);
        off += spec.fibers[a].n;
    }
    return psi;
}

}  // namespace

std::vector<double> christoffel_closed(const FlowStateS1& st, const WarpedProductSpec& spec,
                                       const ChartPoint& p) {
    if (spec.base != BaseKind::CircleS1) throw DimensionMismatch("state/spec base mismatch");
    const int N = spec.total_dim();
    const auto psi = split_fiber_angles(spec, p, 1);
    const int j = nearest_node(p.coords[0], st.grid.h, st.m(), "base");

    const SDerivsS1 d = s_derivs(st);
    const Field phi_th = deriv1_periodic(st.phi, st.grid.h);

    std::vector<double> G(static_cast<std::size_t>(N) * N * N, 0.0);
    // base block: metric phi^2 dtheta^2, Gamma^th_thth = phi'/phi
    G[0] = phi_th[j] / st.phi[j];

    const int A = spec.fiber_count();
    std::vector<double> vvals(A);
    std::vector<std::vector<double>> gup(A), gdn(A);
    for (int a = 0; a < A; ++a) {
        vvals[a] = st.v[a][j];
        const double vth = d.v_s[a][j] * st.phi[j];  // coordinate derivative
        gdn[a] = {vth};
        gup[a] = {vth / (st.phi[j] * st.phi[j])};
    }
    fill_fiber_christoffels(G, N, 1, spec, psi, vvals, gup, gdn);
    return G;
}

std::vector<double> christoffel_closed(const FlowStateSurface& st,
                                       const WarpedProductSpec& spec, const ChartPoint& p) {
    if (spec.base != BaseKind::TorusT2) throw DimensionMismatch("state/spec base mismatch");
    const int N = spec.total_dim();
    const auto psi = split_fiber_angles(spec, p, 2);
    const int i = nearest_node(p.coords[0], st.grid.hx, st.grid.mx, "base x");
    const int j = nearest_node(p.coords[1], st.grid.hy, st.grid.my, "base y");
    const std::size_t k = st.grid.idx(i, j);

    const BaseGeom2D bg = base_geometry(st);
    std::vector<double> G(static_cast<std::size_t>(N) * N * N, 0.0);
    auto at = [&](int L, int M, int Nn) -> double& { return G[(L * N + M) * N + Nn]; };
    at(0, 0, 0) = bg.G111[k];
    at(0, 0, 1) = at(0, 1, 0) = bg.G112[k];
    at(0, 1, 1) = bg.G122[k];
    at(1, 0, 0) = bg.G211[k];
    at(1, 0, 1) = at(1, 1, 0) = bg.G212[k];
    at(1, 1, 1) = bg.G222[k];

    const int A = spec.fiber_count();
    std::vector<double> vvals(A);
    std::vector<std::vector<double>> gup(A), gdn(A);
    for (int a = 0; a < A; ++a) {
        const Field va = st.v(a);
        const Field vx = deriv_x(st.grid, va), vy = deriv_y(st.grid, va);
        vvals[a] = va[k];
        gdn[a] = {vx[k], vy[k]};
        gup[a] = {bg.i11[k] * vx[k] + bg.i12[k] * vy[k],
                  bg.i12[k] * vx[k] + bg.i22[k] * vy[k]};
    }
    fill_fiber_christoffels(G, N, 2, spec, psi, vvals, gup, gdn);
    return G;
}

const std::array<double, 36>& UhlenbeckQuantities::basis_change() {
    static const std::array<double, 36> A = [] {
        const double s = 1.0 / std::sqrt(2.0);
        std::array<double, 36> m{};
        const int rows[6][6] = {
            {1, 0, 0, 1, 0, 0},  {0, 1, 0, 0, 1, 0},  {0, 0, 1, 0, 0, 1},
            {0, 0, 1, 0, 0, -1}, {0, -1, 0, 0, 1, 0}, {1, 0, 0, -1, 0, 0}};
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) m[r * 6 + c] = s * rows[r][c];
        return m;
    }();
    return A;
}

std::array<double, 36> UhlenbeckQuantities::m_beta(std::size_t k) const {
    const double l1 = lambda1[k], l2 = lambda2[k], l3 = lambda3[k], l4 = lambda4[k],
                 l5 = lambda5[k];
    std::array<double, 36> M{};
    auto at = [&](int r, int c) -> double& { return M[r * 6 + c]; };
    at(0, 0) = 2 * l1;
    at(1, 1) = 2 * l3;
    at(2, 2) = 2 * l3;
    at(3, 3) = 2 * l4;
    at(4, 4) = 2 * l4;
    at(5, 5) = 2 * l2;
    at(1, 3) = at(3, 1) = l5;
    at(2, 4) = at(4, 2) = l5;
    return M;
}

std::array<double, 36> UhlenbeckQuantities::m_alpha_blocks(std::size_t k) const {
    const double A1 = a1[k], A2 = a2[k], B1 = b1[k], B2 = b2[k], l5 = lambda5[k];
    std::array<double, 36> M{};
    auto at = [&](int r, int c) -> double& { return M[r * 6 + c]; };
    at(0, 0) = at(3, 3) = A1;
    at(1, 1) = at(2, 2) = at(4, 4) = at(5, 5) = A2;
    at(0, 3) = at(3, 0) = B1;
    at(1, 4) = at(4, 1) = B2;
    at(2, 5) = at(5, 2) = B2;
    at(1, 5) = -l5;
    at(5, 1) = -l5;
    at(2, 4) = l5;
    at(4, 2) = l5;
    return M;
}

UhlenbeckQuantities uhlenbeck(const FlowStateSurface& st, const WarpedProductSpec& spec,
                              FrameMode mode) {
    if (spec.base != BaseKind::TorusT2 || spec.fiber_count() != 1 || spec.fibers[0].n != 2)
        throw DimensionMismatch("Uhlenbeck frame requires the 4-D case: T^2 base, one S^2 fiber");
    const std::size_t n = st.grid.size();
    const double lhat = spec.fibers[0].lambda_hat();
    const BaseGeom2D bg = base_geometry(st);
    const Field Rcheck = base_scalar_curvature_2d(st, bg);
    const Field v = st.v(0);
    const Hessian2D hv = hessian_2d(st, bg, v);

    UhlenbeckQuantities u;
    u.npts = n;
    for (Field* f : {&u.lambda1, &u.lambda2, &u.lambda3, &u.lambda4, &u.lambda5, &u.a1,
                     &u.a2, &u.b1, &u.b2, &u.h, &u.G, &u.p_sign})
        f->assign(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        u.lambda1[k] = Rcheck[k];
        u.lambda2[k] = (lhat - hv.grad_sq[k]) / (v[k] * v[k]);

        // Hessian components in the gcheck-orthonormal frame obtained by
        // Gram-Schmidt from the chart axes: e1 = d_x/l11, e2 = (d_y - (l21/l11) d_x)/l22,
        // with (l11, l21, l22) the Cholesky factor of gcheck.
        const double l11 = std::sqrt(st.g11[k]);
        const double l21 = st.g12[k] / l11;
        const double l22 = std::sqrt(st.g22[k] - l21 * l21);
        const double e1x = 1.0 / l11;
        const double e2x = -l21 / (l11 * l22), e2y = 1.0 / l22;
        const double b11 = hv.h11[k] * e1x * e1x;
        const double b12 = e1x * (hv.h11[k] * e2x + hv.h12[k] * e2y);
        const double b22 = hv.h11[k] * e2x * e2x + 2.0 * hv.h12[k] * e2x * e2y +
                           hv.h22[k] * e2y * e2y;

        double h1, h2, h12f;
        if (mode == FrameMode::HessianEigen) {
            const double tr = b11 + b22;
            const double dd = b11 - b22;
            const double disc = std::sqrt(dd * dd + 4.0 * b12 * b12);
            h1 = 0.5 * (tr - disc);
            h2 = 0.5 * (tr + disc);
            h12f = 0.0;
        } else {
            h1 = b11;
            h2 = b22;
            h12f = b12;
        }
        u.lambda3[k] = -h1 / v[k];
        u.lambda4[k] = -h2 / v[k];
        u.lambda5[k] = -2.0 * h12f / v[k];

        u.a1[k] = u.lambda1[k] + u.lambda2[k];
        u.a2[k] = u.lambda3[k] + u.lambda4[k];
        u.b1[k] = u.lambda1[k] - u.lambda2[k];
        u.b2[k] = u.lambda3[k] - u.lambda4[k];
        u.h[k] = u.b2[k] * u.b2[k] + u.lambda5[k] * u.lambda5[k];
        if (Rcheck[k] > 0.0) {
            u.G[k] = std::sqrt(u.h[k]) / Rcheck[k];
            u.p_sign[k] = 2.0 * u.b1[k] + 2.0 * u.a2[k] - 2.0 * Rcheck[k] -
                          u.a2[k] * u.a2[k] / Rcheck[k];
        } else {
            u.G[k] = kNaN;
            u.p_sign[k] = kNaN;
        }
    }
    return u;
}

}  // namespace warpflow
