#pragma once

#include <vector>

#include "warpflow/grid.hpp"

namespace warpflow {

// Rotationally symmetric gradient shrinking solitons on R^2 x S^2, as a warped
// product over the base with the Tashiro form gcheck = dr^2 + rho(r)^2 dtheta^2.
// Closed first-order system (normalization lambda = -1/2, unit S^2 fiber):
//   Rcheck = 1 + 2 (rho'/rho)(2 v'/v - f')     [theta-theta soliton component]
//   rho''  = -Rcheck rho / 2
//   v''    = (f' - rho'/rho) v' + (1 - v'^2)/v - v/2
//   f''    = 2 v''/v - (Rcheck - 1)/2          [rr soliton component]
// The integrator works in deviations from the exact cylinder background
// (rho = r, v = sqrt 2, f = r^2/4); the axis series closes with Rcheck(0) = 0.

enum class SolitonClass { Cylinder, Incomplete, IdentityViolated };

const char* to_string(SolitonClass c);

struct SolitonResiduals {
    double a2_lambda2 = 0.0;  // max |a2 + lambda2 - 1/2|
    double a2_b1 = 0.0;       // max |a2 b1|
    double fp_vp = 0.0;       // max |f' v'|
    double tf_hessian = 0.0; // trace-free Hessian proportionality residual
    double soliton_eq = 0.0;  // soliton-equation residual, FD-of-profile route
    double contract_v = 0.0;  // contraction of the base equation with Hess v
    double contract_f = 0.0;  // contraction with Hess f

    double worst_identity() const;
};

struct SolitonShot {
    double v0 = 0.0;
    std::vector<double> r;
    std::vector<double> rho, rho_p, v, v_p, f_p;
    std::vector<double> f;  // with f(0) = 0; the normalization constant is fitted
    SolitonClass classification = SolitonClass::Incomplete;
    SolitonResiduals residuals;
    double normalization_residual = 0.0;  // max |R + |grad f|^2 - f - c| at fitted c
    double c_fit = 0.0;
    double r_end = 0.0;
};

struct ShootOptions {
    double r0 = 1e-3;         // axis series handoff
    double tol = 1e-11;       // step-doubling error target
    double out_dr = 1e-2;     // output sample spacing
    double identity_tol = 1e-8;  // Cylinder classification threshold
};

SolitonShot shoot(double v0, double r_max, const ShootOptions& opt = {});

SolitonResiduals identity_residuals(const SolitonShot& shot);

struct SweepEntry {
    double v0 = 0.0;
    SolitonClass cls = SolitonClass::Incomplete;
    double r_end = 0.0;
    double worst_identity = 0.0;
};

std::vector<SweepEntry> classify_sweep(const std::vector<double>& v0s, double r_max,
                                       const ShootOptions& opt = {});

}  // namespace warpflow
