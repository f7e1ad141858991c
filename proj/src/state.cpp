#include "warpflow/state.hpp"

#include <cmath>

#include "warpflow/errors.hpp"

namespace warpflow {

void FlowStateS1::validate() const {
    for (double p : phi)
        if (!(p > 0.0)) throw NonPositiveWarping("density phi must be positive");
    for (const auto& va : v)
        for (double x : va)
            if (!(x > 0.0)) throw NonPositiveWarping("warping v_a must be positive");
}

Field ds_field(const FlowStateS1& st, const Field& f) {
    Field out = deriv1_periodic(f, st.grid.h);
    for (int j = 0; j < st.m(); ++j) out[j] /= st.phi[j];
    return out;
}

SDerivsS1 s_derivs(const FlowStateS1& st) {
    SDerivsS1 d;
    d.phi_over.resize(st.m());
    for (int j = 0; j < st.m(); ++j) d.phi_over[j] = 1.0 / st.phi[j];
    d.v_s.reserve(st.v.size());
    d.v_ss.reserve(st.v.size());
    for (const auto& va : st.v) {
        Field vs = deriv1_periodic(va, st.grid.h);
        for (int j = 0; j < st.m(); ++j) vs[j] *= d.phi_over[j];
        Field vss = deriv1_periodic(vs, st.grid.h);
        for (int j = 0; j < st.m(); ++j) vss[j] *= d.phi_over[j];
        d.v_s.push_back(std::move(vs));
        d.v_ss.push_back(std::move(vss));
    }
    return d;
}

void FlowStateSurface::validate() const {
    for (std::size_t k = 0; k < g11.size(); ++k) {
        const double det = g11[k] * g22[k] - g12[k] * g12[k];
        if (!(det > 0.0) || !(g11[k] > 0.0))
            throw DegenerateMetric("gcheck must stay positive-definite");
    }
    for (const auto& wa : w)
        for (double x : wa)
            if (!std::isfinite(x)) throw BlowupDetected("w_a is not finite");
}

Field FlowStateSurface::v(int a) const {
    Field out(w[a].size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(w[a][k]);
    return out;
}

BaseGeom2D base_geometry(const FlowStateSurface& st) {
    const Grid2D& g = st.grid;
    const std::size_t n = g.size();
    BaseGeom2D bg;
    bg.det.resize(n);
    bg.i11.resize(n);
    bg.i12.resize(n);
    bg.i22.resize(n);

    for (std::size_t k = 0; k < n; ++k) {
        const double det = st.g11[k] * st.g22[k] - st.g12[k] * st.g12[k];
        if (!(det > 0.0)) throw DegenerateMetric("gcheck determinant not positive");
        bg.det[k] = det;
        bg.i11[k] = st.g22[k] / det;
        bg.i12[k] = -st.g12[k] / det;
        bg.i22[k] = st.g11[k] / det;
    }

    const Field dx11 = deriv_x(g, st.g11), dy11 = deriv_y(g, st.g11);
    const Field dx12 = deriv_x(g, st.g12), dy12 = deriv_y(g, st.g12);
    const Field dx22 = deriv_x(g, st.g22), dy22 = deriv_y(g, st.g22);

    auto alloc = [&](Field& f) { f.resize(n); };
    alloc(bg.G111); alloc(bg.G112); alloc(bg.G122);
    alloc(bg.G211); alloc(bg.G212); alloc(bg.G222);

    for (std::size_t k = 0; k < n; ++k) {
        // Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij)/2
        const double c111 = 0.5 * dx11[k];
        const double c112 = 0.5 * dy11[k];
        const double c122 = dy12[k] - 0.5 * dx22[k];
        const double c211 = dx12[k] - 0.5 * dy11[k];
        const double c212 = 0.5 * dx22[k];
        const double c222 = 0.5 * dy22[k];
        bg.G111[k] = bg.i11[k] * c111 + bg.i12[k] * c211;
        bg.G112[k] = bg.i11[k] * c112 + bg.i12[k] * c212;
        bg.G122[k] = bg.i11[k] * c122 + bg.i12[k] * c222;
        bg.G211[k] = bg.i12[k] * c111 + bg.i22[k] * c211;
        bg.G212[k] = bg.i12[k] * c112 + bg.i22[k] * c212;
        bg.G222[k] = bg.i12[k] * c122 + bg.i22[k] * c222;
    }
    return bg;
}

Hessian2D hessian_2d(const FlowStateSurface& st, const BaseGeom2D& bg, const Field& f) {
    const Grid2D& g = st.grid;
    const std::size_t n = g.size();
    Hessian2D h;
    h.fx = deriv_x(g, f);
    h.fy = deriv_y(g, f);
    const Field fxx = deriv_xx(g, f);
    const Field fyy = deriv_yy(g, f);
    const Field fxy = deriv_y(g, h.fx);
    h.h11.resize(n); h.h12.resize(n); h.h22.resize(n);
    h.lap.resize(n); h.norm_sq.resize(n); h.grad_sq.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        h.h11[k] = fxx[k] - bg.G111[k] * h.fx[k] - bg.G211[k] * h.fy[k];
        h.h12[k] = fxy[k] - bg.G112[k] * h.fx[k] - bg.G212[k] * h.fy[k];
        h.h22[k] = fyy[k] - bg.G122[k] * h.fx[k] - bg.G222[k] * h.fy[k];
        const double i11 = bg.i11[k], i12 = bg.i12[k], i22 = bg.i22[k];
        h.lap[k] = i11 * h.h11[k] + 2.0 * i12 * h.h12[k] + i22 * h.h22[k];
        h.norm_sq[k] = i11 * i11 * h.h11[k] * h.h11[k] + i22 * i22 * h.h22[k] * h.h22[k] +
                       2.0 * i12 * i12 * h.h11[k] * h.h22[k] +
                       4.0 * i11 * i12 * h.h11[k] * h.h12[k] +
                       4.0 * i22 * i12 * h.h22[k] * h.h12[k] +
                       2.0 * (i11 * i22 + i12 * i12) * h.h12[k] * h.h12[k];
        h.grad_sq[k] = i11 * h.fx[k] * h.fx[k] + 2.0 * i12 * h.fx[k] * h.fy[k] +
                       i22 * h.fy[k] * h.fy[k];
    }
    return h;
}

}  // namespace warpflow
