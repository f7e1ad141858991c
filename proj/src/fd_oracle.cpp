#include "warpflow/fd_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "warpflow/errors.hpp"

namespace warpflow {

double AnalyticField1D::operator()(double th) const {
    double s = c0;
    for (const auto& m : modes)
        s += m.cos_amp * std::cos(m.k * th) + m.sin_amp * std::sin(m.k * th);
    return s;
}

double AnalyticField2D::operator()(double x, double y) const {
    double s = c0;
    for (const auto& m : modes) {
        const double ph = m.kx * x + m.ky * y;
        s += m.cos_amp * std::cos(ph) + m.sin_amp * std::sin(ph);
    }
    return s;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    // fixed-width mapping keeps byte determinism across standard libraries
    const double u = std::ldexp(static_cast<double>(rng()), -64);
    return lo + (hi - lo) * u;
}

AnalyticField1D random_field_1d(std::mt19937_64& rng, double base, double amp) {
    AnalyticField1D f;
    f.c0 = base;
    // 1/k^2 falloff keeps the grid-stencil truncation of the closed-form side
    // well below the 1e-6 comparison tolerance
    for (int k = 1; k <= 3; ++k)
        f.modes.push_back(
            {k, uniform(rng, -amp, amp) / (k * k), uniform(rng, -amp, amp) / (k * k)});
    return f;
}

AnalyticField2D random_field_2d(std::mt19937_64& rng, double base, double amp) {
    AnalyticField2D f;
    f.c0 = base;
    const int pairs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 1}};
    for (const auto& kk : pairs) {
        const int deg = std::abs(kk[0]) + std::abs(kk[1]);
        const double scale = 1.0 / (deg * deg);
        f.modes.push_back(
            {kk[0], kk[1], uniform(rng, -amp, amp) * scale, uniform(rng, -amp, amp) * scale});
    }
    return f;
}

}  // namespace

OracleState random_oracle_state(const WarpedProductSpec& spec, std::mt19937_64& rng) {
    OracleState os;
    os.base = spec.base;
    if (spec.base == BaseKind::CircleS1) {
        os.phi = random_field_1d(rng, 1.0, 0.05);
        for (int a = 0; a < spec.fiber_count(); ++a)
            os.v1d.push_back(random_field_1d(rng, uniform(rng, 0.9, 1.4), 0.08));
    } else {
        os.g11 = random_field_2d(rng, 1.0, 0.05);
        os.g22 = random_field_2d(rng, 1.0, 0.05);
        os.g12 = random_field_2d(rng, 0.0, 0.03);
        for (int a = 0; a < spec.fiber_count(); ++a)
            os.v2d.push_back(random_field_2d(rng, uniform(rng, 0.9, 1.4), 0.06));
    }
    return os;
}

FlowStateS1 realize_s1(const OracleState& os, const WarpedProductSpec& spec, int m) {
    FlowStateS1 st;
    st.grid = make_grid_1d(m);
    st.phi.resize(m);
    st.v.assign(spec.fiber_count(), Field(m));
    for (int j = 0; j < m; ++j) {
        const double th = st.grid.theta(j);
        st.phi[j] = os.phi(th);
        for (int a = 0; a < spec.fiber_count(); ++a) st.v[a][j] = os.v1d[a](th);
    }
    st.validate();
    return st;
}

FlowStateSurface realize_surface(const OracleState& os, const WarpedProductSpec& spec,
                                 int mx, int my) {
    FlowStateSurface st;
    st.grid = make_grid_2d(mx, my);
    const std::size_t n = st.grid.size();
    st.g11.resize(n);
    st.g12.resize(n);
    st.g22.resize(n);
    st.w.assign(spec.fiber_count(), Field(n));
    for (int i = 0; i < mx; ++i) {
        for (int j = 0; j < my; ++j) {
            const std::size_t k = st.grid.idx(i, j);
            const double x = st.grid.x(i), y = st.grid.y(j);
            st.g11[k] = os.g11(x, y);
            st.g12[k] = os.g12(x, y);
            st.g22[k] = os.g22(x, y);
            for (int a = 0; a < spec.fiber_count(); ++a)
                st.w[a][k] = std::log(os.v2d[a](x, y));
        }
    }
    st.validate();
    return st;
}

std::vector<double> metric_at(const WarpedProductSpec& spec, const OracleState& os,
                              const ChartPoint& p) {
    const int N = spec.total_dim();
    const int nb = base_dim(spec.base);
    std::vector<double> g(static_cast<std::size_t>(N) * N, 0.0);
    auto at = [&](int i, int j) -> double& { return g[i * N + j]; };

    if (spec.base == BaseKind::CircleS1) {
        const double ph = os.phi(p.coords[0]);
        at(0, 0) = ph * ph;
    } else {
        const double x = p.coords[0], y = p.coords[1];
        at(0, 0) = os.g11(x, y);
        at(0, 1) = at(1, 0) = os.g12(x, y);
        at(1, 1) = os.g22(x, y);
    }

    int off = nb;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        const int na = spec.fibers[a].n;
        const double lhat = spec.fibers[a].lambda_hat();
        if (!(lhat > 0.0))
            throw InvalidConfig("oracle sphere chart needs lambda_hat > 0");
        const double v = spec.base == BaseKind::CircleS1
                             ? os.v1d[a](p.coords[0])
                             : os.v2d[a](p.coords[0], p.coords[1]);
        double pref = v * v / lhat;
        for (int k = 0; k < na; ++k) {
            at(off + k, off + k) = pref;
            const double s = std::sin(p.coords[off + k]);
            pref *= s * s;
        }
        off += na;
    }
    return g;
}

namespace {

constexpr double kStencil4[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr int kOffsets4[4] = {-2, -1, 1, 2};

std::vector<double> metric_partials(const WarpedProductSpec& spec, const OracleState& os,
                                    const ChartPoint& p, double h) {
    const int N = spec.total_dim();
    std::vector<double> dg(static_cast<std::size_t>(N) * N * N, 0.0);  // [k][i][j]
    for (int k = 0; k < N; ++k) {
        for (int s = 0; s < 4; ++s) {
            ChartPoint q = p;
            q.coords[k] += kOffsets4[s] * h;
            const auto g = metric_at(spec, os, q);
            const double w = kStencil4[s] / h;
            for (int ij = 0; ij < N * N; ++ij) dg[k * N * N + ij] += w * g[ij];
        }
    }
    return dg;
}

std::vector<double> invert(const std::vector<double>& g, int N) {
    // Gauss-Jordan on a copy; the oracle metrics are small and well conditioned.
    std::vector<double> a = g;
    std::vector<double> inv(static_cast<std::size_t>(N) * N, 0.0);
    for (int i = 0; i < N; ++i) inv[i * N + i] = 1.0;
    for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(a[r * N + col]) > std::abs(a[piv * N + col])) piv = r;
        if (std::abs(a[piv * N + col]) < 1e-14)
            throw DegenerateMetric("oracle metric is singular");
        if (piv != col) {
            for (int c = 0; c < N; ++c) {
                std::swap(a[piv * N + c], a[col * N + c]);
                std::swap(inv[piv * N + c], inv[col * N + c]);
            }
        }
        const double d = a[col * N + col];
        for (int c = 0; c < N; ++c) {
            a[col * N + c] /= d;
            inv[col * N + c] /= d;
        }
        for (int r = 0; r < N; ++r) {
            if (r == col) continue;
            const double f = a[r * N + col];
            if (f == 0.0) continue;
            for (int c = 0; c < N; ++c) {
                a[r * N + c] -= f * a[col * N + c];
                inv[r * N + c] -= f * inv[col * N + c];
            }
        }
    }
    return inv;
}

std::vector<double> christoffel_from(const WarpedProductSpec& spec, const OracleState& os,
                                     const ChartPoint& p, double h) {
    const int N = spec.total_dim();
    const auto g = metric_at(spec, os, p);
    const auto ginv = invert(g, N);
    const auto dg = metric_partials(spec, os, p, h);
    auto dgat = [&](int k, int i, int j) { return dg[(k * N + i) * N + j]; };
    std::vector<double> G(static_cast<std::size_t>(N) * N * N, 0.0);
    for (int l = 0; l < N; ++l) {
        for (int i = 0; i < N; ++i) {
            for (int j = i; j < N; ++j) {
                double s = 0.0;
                for (int m = 0; m < N; ++m)
                    s += ginv[l * N + m] * (dgat(i, m, j) + dgat(j, m, i) - dgat(m, i, j));
                s *= 0.5;
                G[(l * N + i) * N + j] = s;
                G[(l * N + j) * N + i] = s;
            }
        }
    }
    return G;
}

}  // namespace

namespace {

void check_chart_validity(const WarpedProductSpec& spec, const ChartPoint& p) {
    int off = base_dim(spec.base);
    for (const auto& f : spec.fibers) {
        for (int k = 0; k + 1 < f.n; ++k) {
            const double psi = p.coords[off + k];
            if (psi < kPoleMargin || psi > std::numbers::pi - kPoleMargin)
                throw ChartSingularity("oracle chart point too close to a fiber pole");
        }
        off += f.n;
    }
}

}  // namespace

std::vector<double> christoffel_fd(const WarpedProductSpec& spec, const OracleState& os,
                                   const ChartPoint& p, double h) {
    if (h < 1e-4 || h > 1e-2) throw InvalidConfig("oracle step h must lie in [1e-4, 1e-2]");
    check_chart_validity(spec, p);
    return christoffel_from(spec, os, p, h);
}

RiemannFd riemann_fd(const WarpedProductSpec& spec, const OracleState& os,
                     const ChartPoint& p, double h) {
    if (h < 1e-4 || h > 1e-2) throw InvalidConfig("oracle step h must lie in [1e-4, 1e-2]");
    check_chart_validity(spec, p);
    const int N = spec.total_dim();
    const auto g = metric_at(spec, os, p);
    const auto Gam = christoffel_from(spec, os, p, h);
    auto Gat = [&](const std::vector<double>& G, int l, int i, int j) {
        return G[(l * N + i) * N + j];
    };

    // dGamma[k][l][i][j]
    std::vector<double> dG(static_cast<std::size_t>(N) * N * N * N, 0.0);
    for (int k = 0; k < N; ++k) {
        for (int s = 0; s < 4; ++s) {
            ChartPoint q = p;
            q.coords[k] += kOffsets4[s] * h;
            const auto Gq = christoffel_from(spec, os, q, h);
            const double w = kStencil4[s] / h;
            for (int t = 0; t < N * N * N; ++t) dG[k * N * N * N + t] += w * Gq[t];
        }
    }
    auto dGat = [&](int k, int l, int i, int j) {
        return dG[((k * N + l) * N + i) * N + j];
    };

    // R^m_{ijk} = d_i G^m_{jk} - d_j G^m_{ik} + G^m_{ip} G^p_{jk} - G^m_{jp} G^p_{ik}
    RiemannFd R;
    R.N = N;
    R.r.assign(static_cast<std::size_t>(N) * N * N * N, 0.0);
    std::vector<double> up(static_cast<std::size_t>(N) * N * N * N, 0.0);
    for (int m = 0; m < N; ++m) {
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                for (int k = 0; k < N; ++k) {
                    double s = dGat(i, m, j, k) - dGat(j, m, i, k);
                    for (int q = 0; q < N; ++q)
                        s += Gat(Gam, m, i, q) * Gat(Gam, q, j, k) -
                             Gat(Gam, m, j, q) * Gat(Gam, q, i, k);
                    up[((m * N + i) * N + j) * N + k] = s;
                }
            }
        }
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    double s = 0.0;
                    for (int m = 0; m < N; ++m)
                        s += g[l * N + m] * up[((m * N + i) * N + j) * N + k];
                    R.r[((i * N + j) * N + k) * N + l] = s;
                }

    // Enforce the index symmetries, report the defect.
    std::vector<double> sym(R.r.size());
    double scale = 0.0;
    for (double x : R.r) scale = std::max(scale, std::abs(x));
    double defect = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    auto at = [&](int a, int b, int c, int d) {
                        return R.r[((a * N + b) * N + c) * N + d];
                    };
                    const double v = 0.25 * (at(i, j, k, l) - at(j, i, k, l) -
                                             at(i, j, l, k) + at(k, l, i, j));
                    sym[((i * N + j) * N + k) * N + l] = v;
                    defect = std::max(defect, std::abs(v - at(i, j, k, l)));
                }
    R.asymmetry = defect;
    R.r = std::move(sym);
    if (defect > 1e-8 * std::max(1.0, scale))
        throw StepTooSmall("FD cancellation exceeds 1e-8 of the curvature scale");
    return R;
}

FdBlocks extract_blocks(const WarpedProductSpec& spec, const OracleState& os,
                        const ChartPoint& p, const RiemannFd& R) {
    const int N = R.N;
    const int nb = base_dim(spec.base);
    const auto g = metric_at(spec, os, p);
    auto gat = [&](int i, int j) { return g[i * N + j]; };
    const auto ginv = invert(g, N);

    FdBlocks out;
    const int A = spec.fiber_count();
    out.kappa_fiber_self.assign(A, 0.0);
    out.kappa_fiber_cross.assign(A, std::vector<double>(A, 0.0));
    out.base_fiber_block.assign(A, {});

    std::vector<int> off(A);
    {
        int o = nb;
        for (int a = 0; a < A; ++a) {
            off[a] = o;
            o += spec.fibers[a].n;
        }
    }

    if (nb == 2) out.kappa_base = R.at(0, 1, 1, 0) / (gat(0, 0) * gat(1, 1) - gat(0, 1) * gat(0, 1));

    for (int a = 0; a < A; ++a) {
        // first two fiber coordinates span a representative 2-plane
        const int al = off[a], be = off[a] + 1;
        out.kappa_fiber_self[a] = R.at(al, be, be, al) / (gat(al, al) * gat(be, be));
        for (int b = 0; b < A; ++b) {
            if (b == a) continue;
            const int ga = off[b];
            out.kappa_fiber_cross[a][b] = R.at(al, ga, ga, al) / (gat(al, al) * gat(ga, ga));
        }
        // base-fiber block: H_il = R_{i beta beta l} / g_{beta beta}; over the S^1
        // base report the s-orthonormal scalar, over T^2 the coordinate matrix.
        if (nb == 1) {
            out.base_fiber_block[a] = {R.at(0, al, al, 0) / (gat(0, 0) * gat(al, al))};
        } else {
            out.base_fiber_block[a] = {R.at(0, al, al, 0) / gat(al, al),
                                       R.at(0, al, al, 1) / gat(al, al),
                                       R.at(1, al, al, 1) / gat(al, al)};
        }
    }

    // full orthonormal frame sum
    double total = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) {
                    double low = R.at(i, j, k, l);
                    // raise all four indices with the (near-)diagonal inverse
                    double v = 0.0;
                    for (int i2 = 0; i2 < N; ++i2)
                        for (int j2 = 0; j2 < N; ++j2)
                            for (int k2 = 0; k2 < N; ++k2)
                                for (int l2 = 0; l2 < N; ++l2) {
                                    const double w = ginv[i * N + i2] * ginv[j * N + j2] *
                                                     ginv[k * N + k2] * ginv[l * N + l2];
                                    if (w != 0.0) v += w * R.at(i2, j2, k2, l2);
                                }
                    total += low * v;
                }
    out.frame_norm_sq = total;
    return out;
}

double BlockComparison::worst() const {
    double w = 0.0;
    for (const auto& [_, v] : max_rel_error) w = std::max(w, v);
    return w;
}

BlockComparison compare_blocks(const CurvatureBlocks& closed, std::size_t kgrid,
                               const FdBlocks& fd, double tol) {
    BlockComparison cmp;
    cmp.tolerance = tol;

    // magnitude floor: relative errors on near-zero components are measured
    // against the largest block of the state, not against themselves
    double scale = std::abs(fd.kappa_base);
    for (std::size_t a = 0; a < fd.kappa_fiber_self.size(); ++a) {
        scale = std::max(scale, std::abs(fd.kappa_fiber_self[a]));
        for (double h : fd.base_fiber_block[a]) scale = std::max(scale, std::abs(h));
        for (double c : fd.kappa_fiber_cross[a]) scale = std::max(scale, std::abs(c));
    }
    const double floor = std::max(1e-3 * scale, 1e-12);
    auto rel = [&](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
    };

    if (closed.base_comp == 3)
        cmp.max_rel_error["base-base"] = rel(closed.kappa_base[kgrid], fd.kappa_base);

    double self_err = 0.0, cross_err = 0.0, bf_err = 0.0;
    const int A = static_cast<int>(closed.kappa_fiber_self.size());
    for (int a = 0; a < A; ++a) {
        self_err = std::max(self_err,
                            rel(closed.kappa_fiber_self[a][kgrid], fd.kappa_fiber_self[a]));
        for (int b = 0; b < A; ++b) {
            if (b == a) continue;
            cross_err = std::max(cross_err, rel(closed.kappa_fiber_cross[a][b][kgrid],
                                                fd.kappa_fiber_cross[a][b]));
        }
        for (int c = 0; c < closed.base_comp; ++c)
            bf_err = std::max(bf_err,
                              rel(closed.base_fiber_block[a][c][kgrid], fd.base_fiber_block[a][c]));
    }
    cmp.max_rel_error["fiber-self"] = self_err;
    if (A > 1) cmp.max_rel_error["fiber-cross"] = cross_err;
    cmp.max_rel_error["base-fiber"] = bf_err;

    cmp.pass = cmp.worst() <= tol;
    return cmp;
}

ChartPoint random_chart_point(const WarpedProductSpec& spec, std::mt19937_64& rng,
                              const std::vector<double>& base_coords) {
    ChartPoint p;
    p.coords = base_coords;
    for (int a = 0; a < spec.fiber_count(); ++a) {
        const int na = spec.fibers[a].n;
        for (int k = 0; k < na; ++k) {
            if (k + 1 < na) {
                p.coords.push_back(uniform(rng, kPoleMargin + 0.05,
                                           std::numbers::pi - kPoleMargin - 0.05));
            } else {
                p.coords.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
            }
        }
    }
    return p;
}

}  // namespace warpflow
