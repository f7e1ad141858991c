#pragma once

#include <span>
#include <utility>
#include <vector>

#include "warpflow/monitors.hpp"

namespace warpflow {

// Method-of-lines integrator for the multiply warped Ricci flow over S^1 in the
// arclength gauge: fixed theta grid, evolving density phi, RK4 in time with a
// dual CFL/reaction step limiter.

enum class ProfileKind { Constant, CosineNeck, SineNeck, Table };

struct FiberInit {
    FiberSpec fiber;
    ProfileKind kind = ProfileKind::Constant;
    double v0 = 1.0;     // constant part
    double amp = 0.0;    // cosine/sine amplitude
    int harmonic = 1;
    Field table;         // ProfileKind::Table: one value per node
};

struct S1Config {
    int m = 256;
    std::vector<FiberInit> fibers;
    double cfl = 0.2;
    double rxn = 0.05;
    double eps_stop_rel = 1e-3;
    double dt_override = 0.0;  // fixed step when positive
    double dt_scale = 1.0;     // scales the adaptive cap (refinement studies)
    double t_max = 1e30;
    int snapshot_every = 0;    // in accepted steps; 0 keeps first + last only
    int record_every = 1;
    std::vector<double> residual_times;  // capture step triples near these t
    MonitorParams mon;
};

// Assumption flags recomputable from the initial state alone. r0 and c1 are the
// measured min R(.,0) and max v_1(.,0).
struct AssumptionReport {
    bool single_fiber_pinching = false;
    bool guarantee_cylinder = false;
    bool small_gradient = false;
    double r0 = 0.0;
    double c1 = 0.0;
};

enum class TerminationReason { MinWarpingReached, DtUnderflow, Blowup, TMaxReached };

const char* to_string(TerminationReason r);

struct S1Rhs {
    Field dphi;
    std::vector<Field> dv;
};

S1Rhs rhs_s1(const FlowStateS1& st, const WarpedProductSpec& spec);

std::pair<FlowStateS1, AssumptionReport> init_state(const S1Config& cfg);

WarpedProductSpec spec_of(const S1Config& cfg);

struct TEstimate {
    double t_hat = 0.0;
    double residual = 0.0;
};

// Fixed-slope least-squares fit of v_min^2 ~ 2 mu_1 (T - t) over the final
// resolved decade of the series.
TEstimate estimate_T(std::span<const double> t, std::span<const double> vmin_sq, double mu1);

struct TrajectoryS1 {
    WarpedProductSpec spec;
    AssumptionReport assumptions;
    std::vector<FlowStateS1> snapshots;
    // states captured each time min v_pinch halves; the profile check picks the
    // deepest one whose parabolic region is still grid-resolved
    std::vector<FlowStateS1> profile_snapshots;
    std::vector<MonitorRecordS1> records;
    AssertionLog assertions;
    TerminationReason termination = TerminationReason::TMaxReached;
    double t_hat = 0.0;
    double t_fit_residual = 0.0;
    bool t_hat_valid = false;
    double b_const = 0.0;
    std::vector<StateTriple<FlowStateS1>> triples;
    std::int64_t steps = 0;
};

TrajectoryS1 run_s1(const S1Config& cfg);

}  // namespace warpflow
