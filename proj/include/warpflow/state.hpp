#pragma once

#include <vector>

#include "warpflow/fiber.hpp"
#include "warpflow/grid.hpp"

namespace warpflow {

// Discrete flow state over S^1 in the arclength gauge: fixed theta grid,
// evolving density phi with ds = phi dtheta, and warping fields v_a > 0.
struct FlowStateS1 {
    double t = 0.0;
    Grid1D grid;
    Field phi;
    std::vector<Field> v;  // [fiber][node]

    int m() const { return grid.m; }
    double length() const { return integrate_periodic(phi, grid.h); }
    void validate() const;
};

// Arclength derivatives d_s = phi^{-1} d_theta, built from the shared stencils.
struct SDerivsS1 {
    std::vector<Field> v_s, v_ss;
    Field phi_over;  // 1/phi, kept for reuse
};

SDerivsS1 s_derivs(const FlowStateS1& st);
Field ds_field(const FlowStateS1& st, const Field& f);

// Gauged flow state over a flat-torus-topology base: full symmetric 2-tensor
// gcheck = (g11, g12, g22) and w_a = log v_a.
struct FlowStateSurface {
    double t = 0.0;
    Grid2D grid;
    Field g11, g12, g22;
    std::vector<Field> w;

    void validate() const;
    Field v(int a) const;  // e^{w_a}
};

// Base metric inverse and Christoffels of gcheck on the grid.
struct BaseGeom2D {
    Field det;
    Field i11, i12, i22;                  // gcheck^{-1}
    Field G111, G112, G122, G211, G212, G222;  // Gamma^k_ij, k first
};

BaseGeom2D base_geometry(const FlowStateSurface& st);

// Covariant Hessian of a base scalar w.r.t. gcheck plus derived scalars.
struct Hessian2D {
    Field h11, h12, h22;   // coordinate components
    Field fx, fy;          // coordinate gradient
    Field lap;             // gcheck-trace
    Field norm_sq;         // |Hess|^2_gcheck
    Field grad_sq;         // |grad|^2_gcheck
};

Hessian2D hessian_2d(const FlowStateSurface& st, const BaseGeom2D& bg, const Field& f);

}  // namespace warpflow
