#pragma once

#include <utility>
#include <vector>

#include "warpflow/flow_s1.hpp"
#include "warpflow/monitors.hpp"

namespace warpflow {

// Integrator for the gauged Ricci flow system over a flat-torus-topology base:
//   dt gcheck = -Rcheck gcheck + 2 sum_a n_a dw_a (x) dw_a
//   dt w_a    = Lapcheck w_a - mu_a e^{-2 w_a}

enum class SurfaceProfileKind { Constant, LogSineX, LogCosineX, LogSineXY };

struct SurfaceFiberInit {
    FiberSpec fiber;
    SurfaceProfileKind kind = SurfaceProfileKind::Constant;
    double v0 = 1.0;  // v = v0 + amp sin/cos(harmonic x) [+ amp/2 cos(harmonic y)]
    double amp = 0.0;
    int harmonic = 1;
};

struct SurfaceConfig {
    int mx = 64, my = 64;
    std::vector<SurfaceFiberInit> fibers;
    double cfl = 0.2;
    double rxn = 0.05;
    double eps_stop_rel = 1e-3;
    double dt_override = 0.0;
    double dt_scale = 1.0;
    double t_max = 1e30;
    double eta = 1.0;  // Assumption eta-tame threshold (user-chosen)
    int record_every = 1;
    std::vector<double> residual_times;
    MonitorParams mon;
};

struct SurfaceAssumptions {
    bool eta_tame = false;
    double f_upper_max0 = 0.0;
    double eta = 0.0;
};

struct SurfaceRhs {
    Field dg11, dg12, dg22;
    std::vector<Field> dw;
};

SurfaceRhs rhs_surface(const FlowStateSurface& st, const WarpedProductSpec& spec);

WarpedProductSpec spec_of(const SurfaceConfig& cfg);
std::pair<FlowStateSurface, SurfaceAssumptions> init_surface(const SurfaceConfig& cfg);

struct TrajectorySurface {
    WarpedProductSpec spec;
    SurfaceAssumptions assumptions;
    std::vector<FlowStateSurface> snapshots;  // first and last
    std::vector<SurfaceMonitorRecord> records;
    AssertionLog assertions;
    TerminationReason termination = TerminationReason::TMaxReached;
    double t_hat = 0.0;
    double t_fit_residual = 0.0;
    bool t_hat_valid = false;
    std::vector<StateTriple<FlowStateSurface>> triples;
    std::int64_t steps = 0;
    // run-fitted constants of the Rcheck upper/lower bounds
    double c0_fit = 0.0;
    double c1_fit = 0.0;
};

TrajectorySurface run_surface(const SurfaceConfig& cfg);

}  // namespace warpflow
