#pragma once

#include <array>
#include <vector>

#include "warpflow/fiber.hpp"
#include "warpflow/state.hpp"

namespace warpflow {

// The four sectional flavors of the warped-product curvature plus Ricci pieces,
// per grid point. Conventions:
//  - kappa_* are honest sectional curvatures of the corresponding 2-planes.
//  - base_fiber_block[a] holds -Hess(v_a)/v_a: one s-orthonormal component over
//    S^1, three coordinate components (11,12,22) over T^2.
//  - ricci_base uses the same component layout as base_fiber_block.
struct CurvatureBlocks {
    std::size_t npts = 0;
    int base_comp = 1;  // 1 for S^1, 3 for T^2

    Field kappa_base;                                   // T^2 only: Rcheck/2
    std::vector<Field> kappa_fiber_self;                // [a]
    std::vector<std::vector<Field>> kappa_fiber_cross;  // [a][b], symmetric
    std::vector<std::vector<Field>> base_fiber_block;   // [a][comp]
    std::vector<Field> ricci_base;                      // [comp]
    std::vector<Field> ricci_fiber_coeff;               // [a]
    Field scalar_R;
};

CurvatureBlocks curvature_blocks(const FlowStateS1& st, const WarpedProductSpec& spec);
CurvatureBlocks curvature_blocks(const FlowStateSurface& st, const WarpedProductSpec& spec);

// Independent single-expression evaluation of the scalar curvature
// (the 1-D display over S^1, the general trace display over T^2).
Field scalar_R_direct(const FlowStateS1& st, const WarpedProductSpec& spec);
Field scalar_R_direct(const FlowStateSurface& st, const WarpedProductSpec& spec);

// |Rm|^2 as the multiplicity-weighted sum of squared blocks, plus the partial
// sum over every term touching one of the designated (flat) fibers.
struct RiemannNorm {
    Field total;
    Field flat_part;
};
RiemannNorm riemann_norm_sq(const CurvatureBlocks& blocks, const WarpedProductSpec& spec,
                            const FlowStateS1& st, const std::vector<int>& flat_fibers = {});
RiemannNorm riemann_norm_sq(const CurvatureBlocks& blocks, const WarpedProductSpec& spec,
                            const FlowStateSurface& st, const std::vector<int>& flat_fibers = {});

// Full-metric operators on a base scalar field:
//   Lap f   = Lapcheck f + sum_a n_a <grad v_a, grad f>/v_a
//   Hess f  = Hesscheck f + sum_a c_a g_a with c_a = <grad v_a, grad f>/v_a
//   |Hess f|^2 = |Hesscheck f|^2 + sum_a n_a c_a^2
struct FullOperators {
    std::vector<Field> hess_fiber_coeff;  // c_a per fiber
    Field laplacian;
    Field hessian_norm_sq;
};
FullOperators operators_full(const FlowStateS1& st, const WarpedProductSpec& spec,
                             const Field& f);
FullOperators operators_full(const FlowStateSurface& st, const WarpedProductSpec& spec,
                             const Field& f);

// Scalar curvature of the 2-D base metric alone.
Field base_scalar_curvature_2d(const FlowStateSurface& st);
Field base_scalar_curvature_2d(const FlowStateSurface& st, const BaseGeom2D& bg);

// Product-chart point: base coordinates followed by hyperspherical fiber angles.
// The final angle of each fiber is free on [0,2pi); the others must stay in
// [delta_pole, pi - delta_pole].
struct ChartPoint {
    std::vector<double> coords;
};

inline constexpr double kPoleMargin = 0.2;

// Closed-form Levi-Civita connection at a chart point whose base coordinates
// coincide with grid nodes. Returns Gamma^L_{MN} as a flattened N^3 array,
// index (L*N + M)*N + N_.
std::vector<double> christoffel_closed(const FlowStateS1& st, const WarpedProductSpec& spec,
                                       const ChartPoint& p);
std::vector<double> christoffel_closed(const FlowStateSurface& st,
                                       const WarpedProductSpec& spec, const ChartPoint& p);

// Uhlenbeck-frame quantities for the 4-D case (T^2 base, single S^2 fiber).
enum class FrameMode { HessianEigen, ChartAligned };

struct UhlenbeckQuantities {
    std::size_t npts = 0;
    Field lambda1, lambda2, lambda3, lambda4, lambda5;
    Field a1, a2, b1, b2;
    Field h;       // b2^2 + lambda5^2
    Field G;       // sqrt(h)/Rcheck, NaN where Rcheck <= 0
    Field p_sign;  // 2 b1 + 2 a2 - 2 Rcheck - a2^2/Rcheck, NaN where Rcheck <= 0

    std::array<double, 36> m_beta(std::size_t k) const;
    // Block form assembled from (a1, a2, b1, b2, lambda5).
    std::array<double, 36> m_alpha_blocks(std::size_t k) const;
    // The fixed orthogonal change of basis A with alpha = beta A.
    static const std::array<double, 36>& basis_change();
};

UhlenbeckQuantities uhlenbeck(const FlowStateSurface& st, const WarpedProductSpec& spec,
                              FrameMode mode = FrameMode::HessianEigen);

}  // namespace warpflow
