#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "warpflow/geometry.hpp"

namespace warpflow {

// Brute-force differential geometry on the explicit product chart: evaluate the
// metric analytically, difference it to 4th order, and assemble Christoffels and
// the full Riemann tensor. Deliberately slow and simple; runs at single points.

// Low-order Fourier data so the metric is exactly evaluable off-grid.
struct AnalyticField1D {
    double c0 = 1.0;
    struct Mode {
        int k;
        double cos_amp, sin_amp;
    };
    std::vector<Mode> modes;

    double operator()(double th) const;
};

struct AnalyticField2D {
    double c0 = 1.0;
    struct Mode {
        int kx, ky;
        double cos_amp, sin_amp;  // cos(kx x + ky y), sin(kx x + ky y)
    };
    std::vector<Mode> modes;

    double operator()(double x, double y) const;
};

// Analytic counterpart of a flow state; the oracle never touches grids.
struct OracleState {
    BaseKind base = BaseKind::CircleS1;
    // S^1 base: metric phi^2 dtheta^2
    AnalyticField1D phi;
    std::vector<AnalyticField1D> v1d;
    // T^2 base: full gcheck
    AnalyticField2D g11, g12, g22;
    std::vector<AnalyticField2D> v2d;
};

// Sample a random smooth state (positive warpings, modes <= 3) for a spec.
OracleState random_oracle_state(const WarpedProductSpec& spec, std::mt19937_64& rng);

// Grid realization of an analytic state for feeding the closed-form side.
FlowStateS1 realize_s1(const OracleState& os, const WarpedProductSpec& spec, int m);
FlowStateSurface realize_surface(const OracleState& os, const WarpedProductSpec& spec,
                                 int mx, int my);

// Full metric at a chart point (row-major N x N).
std::vector<double> metric_at(const WarpedProductSpec& spec, const OracleState& os,
                              const ChartPoint& p);

// FD Christoffels Gamma^L_{MN}, flattened like christoffel_closed.
std::vector<double> christoffel_fd(const WarpedProductSpec& spec, const OracleState& os,
                                   const ChartPoint& p, double h);

// FD Riemann R_{IJKL} = g_{LM} R^M_{IJK} with all index symmetries enforced
// post hoc; reports the pre-symmetrization defect.
struct RiemannFd {
    int N = 0;
    std::vector<double> r;  // flattened [i][j][k][l]
    double asymmetry = 0.0;

    double at(int i, int j, int k, int l) const { return r[((i * N + j) * N + k) * N + l]; }
};

RiemannFd riemann_fd(const WarpedProductSpec& spec, const OracleState& os,
                     const ChartPoint& p, double h);

// Representative block extraction from the FD tensor at p (metric diagonal in
// the fiber chart). Sectional conventions match CurvatureBlocks.
struct FdBlocks {
    double kappa_base = 0.0;  // 2-D base only
    std::vector<double> kappa_fiber_self;
    std::vector<std::vector<double>> kappa_fiber_cross;
    std::vector<std::vector<double>> base_fiber_block;  // [a][base comps, same layout]
    double frame_norm_sq = 0.0;                         // full orthonormal frame sum
};

FdBlocks extract_blocks(const WarpedProductSpec& spec, const OracleState& os,
                        const ChartPoint& p, const RiemannFd& R);

struct BlockComparison {
    std::map<std::string, double> max_rel_error;  // per block flavor
    double tolerance = 0.0;
    bool pass = false;

    double worst() const;
};

// Compare closed-form blocks (at grid node kgrid) against FD blocks at the
// matching chart point. Relative errors use a per-state magnitude floor.
BlockComparison compare_blocks(const CurvatureBlocks& closed, std::size_t kgrid,
                               const FdBlocks& fd, double tol);

// Draw a pole-safe random chart point over grid node jbase (S^1) or (i,j) (T^2).
ChartPoint random_chart_point(const WarpedProductSpec& spec, std::mt19937_64& rng,
                              const std::vector<double>& base_coords);

}  // namespace warpflow
