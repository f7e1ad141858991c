#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warpflow/geometry.hpp"
#include "warpflow/state.hpp"

namespace warpflow {

// Every controlled quantity along the flow, recorded per accepted step.
// Raw quantities only; rescalings by (T_hat - t) are appended post-run once
// T_hat is known.

struct MonitorParams {
    double omega_delta = 0.1;   // delta in Omega = { (v1)_ss log(v1/delta) < 0 }
    double beta = 32.0;         // F-weight B = beta * max_a sup |grad v_a|^2 (at t=0)
    int pinch_fiber = 0;        // the fiber expected to crush first
    double profile_delta = 0.25;  // intermediate-region exponent of the profile bounds
};

struct MonitorRecordS1 {
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> vmax, vmin, grad_sq_max, chi_max, z_max;
    double q_min = 0.0, p_min = 0.0;
    double f_max = 0.0;
    double b_const = 0.0;
    double max_rm = 0.0;        // sup |Rm|
    double sigma_fl_max = 0.0;  // sup of the flat-block partial sum of |Rm|^2
    double l_min_on_omega = 0.0;
    double omega_measure = 0.0;  // arclength measure of Omega
    int omega_components = 0;
    double kappa0_neck = 0.0, kappa1_neck = 0.0;  // at argmin v_pinch
    int neck_index = 0;
    double phi_min = 0.0, length = 0.0;
};

MonitorRecordS1 monitor_record_s1(const FlowStateS1& st, const WarpedProductSpec& spec,
                                  const MonitorParams& mp, double b_const);

// B = beta * max_a sup_x |grad v_a|^2 evaluated on the initial state.
double f_weight_constant(const FlowStateS1& st0, const MonitorParams& mp);

// Recorded-never-thrown assertion log.
struct AssertionLog {
    std::int64_t checks = 0;
    std::int64_t failures = 0;
    std::vector<std::string> first_failures;  // at most a handful, labelled

    void check(bool ok, const std::string& label);
    bool passed() const { return failures == 0; }
};

// C^0/C^1 maximum-principle assertions between consecutive records.
void maximum_principle_check(const MonitorRecordS1& prev, const MonitorRecordS1& cur,
                             const std::vector<double>& grad_sq_cap, AssertionLog& log);

// max(|grad v_a|^2(0), mu_a/(n_a-1)) per fiber; the C1 ceiling.
std::vector<double> c1_gradient_caps(const MonitorRecordS1& initial,
                                     const WarpedProductSpec& spec);

// ---- surface monitors ----

struct SurfaceMonitorRecord {
    double t = 0.0;
    double dt = 0.0;
    std::vector<double> vmin, vmax, grad_w_sq_max;
    double area = 0.0;
    double gauss_bonnet = 0.0;  // integral of Rcheck dA
    double rcheck_min = 0.0, rcheck_max = 0.0;
    double p_max = 0.0;
    double p_integral = 0.0;   // integral of p dA; equals dA/dt on the torus
    double f_upper_max = 0.0;  // sup (Rcheck + 2p)
    double f_lower_min = 0.0;  // inf (Rcheck - p)
    double qcal_min = 0.0, pcal_min = 0.0;
    double max_rm = 0.0;
    // per-step contributions to the run-fitted constants of the Rcheck bounds
    double c0_fit = 0.0;  // sup { Rcheck : Rcheck > 2 mu_1/(3 v_1^2) }
    double c1_fit = 0.0;  // sup ( -Rcheck v_1^2 )_+
};

SurfaceMonitorRecord monitor_record_surface(const FlowStateSurface& st,
                                            const WarpedProductSpec& spec,
                                            const MonitorParams& mp);

// ---- evolution-identity residuals ----

// Three consecutive integrator states (possibly unequal spacing).
template <class State>
struct StateTriple {
    State s0, s1, s2;
};

struct ResidualSample {
    double t = 0.0;
    double rms = 0.0;    // RMS of the residual over the grid
    double scale = 0.0;  // RMS of the identity's RHS, for context
};

// Appendix-B evolution of chi_a = |Hess v_a|^2 along the S^1 flow; the
// mixed-Hessian term carries the coefficient the derivation produces (-8).
// sign_flip_z flips the sign of the Hess Z_a reaction term (fault injection).
ResidualSample verify_hessian_evolution(const StateTriple<FlowStateS1>& tr,
                                        const WarpedProductSpec& spec, int fiber,
                                        bool sign_flip_z = false);

// Gauged-surface evolution of Rcheck:
// (dt - Lapcheck) Rcheck = Rcheck^2 - 2 Rcheck p + 2 sum n_a {(Lap w_a)^2 - |Hess w_a|^2}.
ResidualSample verify_R_evolution(const StateTriple<FlowStateSurface>& tr,
                                  const WarpedProductSpec& spec);

// Literal componentwise form of the 4-D curvature-operator identity
// (dt - Lap)(a1+b1) = (a1+b1)^2 + 2(a2^2 + b2^2 + lambda5^2) with the full
// scalar Laplacian. Valid only with the frame-bundle Laplacian, so this
// residual measures the frame-correction terms; reported, not asserted.
ResidualSample uhlenbeck_identity_residual(const StateTriple<FlowStateSurface>& tr,
                                           const WarpedProductSpec& spec);

// ---- Type-I ratios, rescalings and the neck profile bounds ----

struct TypeIPoint {
    double t = 0.0;
    double type_i_ratio = 0.0;      // (T_hat - t) sup |Rm|
    double kappa0_rescaled = 0.0;   // (T_hat - t) kappa0 at the neck
    double kappa1_rescaled = 0.0;   // (T_hat - t) kappa1 at the neck
    double sigma_fl_rescaled = 0.0; // (T_hat - t)^2 sup Sigma_fl
    double vmin_sq_over_tt = 0.0;   // v_min^2 / (T_hat - t), pinch fiber
    double neck_ratio = 0.0;        // v_neck / sqrt(2 mu_1 (T_hat - t))
};

struct ProfileCheck {
    int neck_index = 0;
    std::vector<double> sigma;      // signed arclength from the neck
    std::vector<double> v1;
    double c_inner = 0.0, c_outer = 0.0;
    // intermediate-region exponent: sigma <= (T-t)^{1/2-delta}. The window
    // [2 sqrt(-tt log tt), tt^{1/2-delta}] is empty for delta <= ~0.15 at any
    // reachable tt, so the fitted desk-scale default is 0.25.
    double delta = 0.25;
    double inner_margin_min = 0.0;  // min over samples of (bound - value)
    double outer_margin_min = 0.0;
    int inner_samples = 0, outer_samples = 0;
};

struct TypeIReport {
    std::vector<TypeIPoint> series;  // over the final resolved decade
    ProfileCheck profile;
    double p_decay_c4 = 0.0;   // min P_min^{2/n1} / (T_hat - t) over the decade
    double f_bound_c = 0.0;    // max F_max (T_hat - t) over the decade
    double kappa0_env_c = 0.0; // max |k0~| vt1^2 |log v1| over the decade
    // spread of the deepest sample's ratios when T_hat shifts by +- the fit
    // residual of the singular-time estimate
    double neck_ratio_spread = 0.0;
    double type_i_ratio_spread = 0.0;
};

// profile_candidates: states along the run; the profile bounds are evaluated on
// the deepest candidate whose parabolic region still spans several grid cells.
TypeIReport typei_and_rescale(const std::vector<MonitorRecordS1>& series,
                              const WarpedProductSpec& spec, double t_hat,
                              const std::vector<FlowStateS1>& profile_candidates,
                              const MonitorParams& mp, double profile_delta = 0.25,
                              double t_hat_uncertainty = 0.0);
TypeIReport typei_and_rescale(const std::vector<MonitorRecordS1>& series,
                              const WarpedProductSpec& spec, double t_hat,
                              const FlowStateS1& final_state, const MonitorParams& mp,
                              double profile_delta = 0.25);

// L = v1 (v1)_ss log v1 restricted to Omega, the Omega interval scan, and the
// endpoint classification used by the boundary test.
struct OmegaScan {
    std::vector<int> omega_mask;  // 1 where the point lies in Omega
    double l_min = 0.0;
    double measure = 0.0;
    int components = 0;
    // endpoints: grid index, L value, true where the endpoint is an
    // inflection ((v1)_ss ~ 0) rather than a v1 = delta crossing
    std::vector<int> endpoint_idx;
    std::vector<double> endpoint_l;
    std::vector<bool> endpoint_inflection;
};

OmegaScan omega_scan(const FlowStateS1& st, const WarpedProductSpec& spec,
                     const MonitorParams& mp);

}  // namespace warpflow
