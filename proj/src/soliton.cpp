#include "warpflow/soliton.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "warpflow/errors.hpp"

namespace warpflow {

const char* to_string(SolitonClass c) {
    switch (c) {
        case SolitonClass::Cylinder: return "Cylinder";
        case SolitonClass::Incomplete: return "Incomplete";
        case SolitonClass::IdentityViolated: return "IdentityViolated";
    }
    return "unknown";
}

double SolitonResiduals::worst_identity() const {
    return std::max({a2_lambda2, a2_b1, fp_vp, tf_hessian});
}

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Deviation state y = (u, du, z, dz, q, fd):
// rho = r + u, v = sqrt2 + z, f' = r/2 + q, f = r^2/4 + fd.
// Every cylinder-background cancellation is done symbolically, so y == 0 is an
// exact fixed point of the discrete step.
using Y = std::array<double, 6>;

struct Derived {
    double Rcheck, vpp, fpp;
};

Derived derived_at(double r, const Y& y) {
    const auto [u, du, z, dz, q, fd] = y;
    const double rho = r + u;
    const double v = kSqrt2 + z;
    Derived d;
    d.Rcheck = (u - du * r - 2.0 * q - 2.0 * q * du + 4.0 * dz * (1.0 + du) / v) / rho;
    d.vpp = (r / 2.0 + q - (1.0 + du) / rho) * dz -
            (2.0 * kSqrt2 * z + z * z + 2.0 * dz * dz) / (2.0 * v);
    d.fpp = 2.0 * d.vpp / v - 0.5 * d.Rcheck;  // deviation from the background 1/2
    return d;
}

Y rhs(double r, const Y& y) {
    const Derived d = derived_at(r, y);
    return {y[1], -0.5 * d.Rcheck * (r + y[0]), y[3], d.vpp, d.fpp, y[4]};
}

Y axpy(const Y& a, const Y& b, double c) {
    Y o;
    for (int i = 0; i < 6; ++i) o[i] = a[i] + c * b[i];
    return o;
}

Y rk4(double r, const Y& y, double h) {
    const Y k1 = rhs(r, y);
    const Y k2 = rhs(r + 0.5 * h, axpy(y, k1, 0.5 * h));
    const Y k3 = rhs(r + 0.5 * h, axpy(y, k2, 0.5 * h));
    const Y k4 = rhs(r + h, axpy(y, k3, h));
    Y o;
    for (int i = 0; i < 6; ++i)
        o[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return o;
}

bool usable(double r, const Y& y) {
    for (double x : y)
        if (!std::isfinite(x)) return false;
    if (!(r + y[0] > 0.0)) return false;          // rho > 0
    if (!(kSqrt2 + y[2] > 1e-8)) return false;    // v > 0
    for (double x : y)
        if (std::abs(x) > 1e6) return false;
    return true;
}

// Axis series with the Rcheck(0) = 0 closure, in deviation form: every
// coefficient vanishes identically at z0 = 0.
Y series_ic(double z0, double r) {
    const double v0 = kSqrt2 + z0;
    const double v2 = -z0 * (2.0 * kSqrt2 + z0) / (4.0 * v0);  // = (2 - v0^2)/(4 v0)
    const double f2d = 2.0 * v2 / v0;                           // f''(0) - 1/2
    const double v4 =
        1.5 * ((f2d + 0.5) * v2 - v2 * v2 / v0 - v2 / (2.0 * v0 * v0) - v2 / 4.0);
    const double f4 = 2.0 * v4 / v0;
    const double q3 = v4 / (3.0 * v0) - v2 * v2 / (v0 * v0) - f4 / 6.0;
    const double p5 = -6.0 * q3;
    Y y;
    y[0] = p5 * std::pow(r, 5) / 120.0;
    y[1] = p5 * std::pow(r, 4) / 24.0;
    y[2] = z0 + v2 * r * r / 2.0 + v4 * std::pow(r, 4) / 24.0;
    y[3] = v2 * r + v4 * r * r * r / 6.0;
    y[4] = f2d * r + f4 * r * r * r / 6.0;
    y[5] = f2d * r * r / 2.0 + f4 * std::pow(r, 4) / 24.0;
    for (double x : y)
        if (!std::isfinite(x)) throw AxisExpansionFailure("axis series is not finite");
    return y;
}

void record(SolitonShot& s, double r, const Y& y) {
    s.r.push_back(r);
    s.rho.push_back(r + y[0]);
    s.rho_p.push_back(1.0 + y[1]);
    s.v.push_back(kSqrt2 + y[2]);
    s.v_p.push_back(y[3]);
    s.f_p.push_back(r / 2.0 + y[4]);
    s.f.push_back(r * r / 4.0 + y[5]);
}

// centered first derivative on the uniform output grid, one-sided at the ends
std::vector<double> fd_profile(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    if (n >= 3) {
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    }
    return d;
}

}  // namespace

SolitonShot shoot(double v0, double r_max, const ShootOptions& opt) {
    if (!(v0 > 0.0)) throw InvalidConfig("soliton shot requires v0 > 0");
    if (!(r_max > opt.r0) || r_max > 100.0)
        throw InvalidConfig("soliton shot requires r0 < r_max <= 100");

    SolitonShot shot;
    shot.v0 = v0;
    const double z0 = v0 - kSqrt2;

    double r = opt.r0;
    Y y = series_ic(z0, r);

    // the recorded profile is uniform in r (residuals difference it), so the
    // series handoff point itself is not recorded
    double h = opt.out_dr / 8.0;
    double next_out = opt.out_dr;
    bool underflow = false;
    while (r < r_max - 1e-12) {
        if (!usable(r, y)) break;
        const double hcap = std::min(next_out - r, r_max - r);
        const double hstep = std::min(h, std::max(hcap, 1e-13));
        const Y y1 = rk4(r, y, hstep);
        const Y ya = rk4(r, y, 0.5 * hstep);
        const Y y2 = rk4(r + 0.5 * hstep, ya, 0.5 * hstep);
        double err = 0.0;
        for (int i = 0; i < 6; ++i)
            err = std::max(err, std::abs(y1[i] - y2[i]) / (1.0 + std::abs(y2[i])));
        if (err < opt.tol || hstep <= 1e-12) {
            r += hstep;
            y = y2;
            if (r >= next_out - 1e-12) {
                record(shot, r, y);
                next_out += opt.out_dr;
            }
            if (err < opt.tol / 64.0) h = std::min(2.0 * hstep, opt.out_dr);
        } else {
            h = 0.5 * hstep;
        }
        if (h < 1e-13) {
            underflow = true;  // StepUnderflow maps to Incomplete
            break;
        }
    }
    shot.r_end = r;
    (void)underflow;

    const bool complete = usable(r, y) && r >= r_max - 1e-9;
    shot.residuals = identity_residuals(shot);

    if (!complete) {
        shot.classification = SolitonClass::Incomplete;
    } else if (shot.residuals.worst_identity() <= opt.identity_tol) {
        shot.classification = SolitonClass::Cylinder;
    } else {
        shot.classification = SolitonClass::IdentityViolated;
    }

    // normalization R + |grad f|^2 - f = c with a single fitted constant,
    // scalar curvature from the differentiated profile
    if (shot.r.size() >= 5) {
        const double hout = shot.r[1] - shot.r[0];
        const std::vector<double> vpp_fd = fd_profile(shot.v_p, hout);
        const std::vector<double> rhopp_fd = fd_profile(shot.rho_p, hout);
        double wmin = 0.0, wmax = 0.0;
        bool first = true;
        for (std::size_t i = 2; i + 2 < shot.r.size(); ++i) {
            const double rho = shot.rho[i], rhop = shot.rho_p[i];
            const double v = shot.v[i], vp = shot.v_p[i], fp = shot.f_p[i];
            const double Rfd = -2.0 * rhopp_fd[i] / rho;
            const double lapv = vpp_fd[i] + rhop / rho * vp;
            const double R = Rfd - 4.0 * lapv / v + 2.0 * (1.0 - vp * vp) / (v * v);
            const double w = R + fp * fp - shot.f[i];
            if (first || w < wmin) wmin = w;
            if (first || w > wmax) wmax = w;
            first = false;
        }
        shot.c_fit = 0.5 * (wmin + wmax);
        shot.normalization_residual = 0.5 * (wmax - wmin);
    }
    return shot;
}

SolitonResiduals identity_residuals(const SolitonShot& shot) {
    // All second derivatives come from differencing the stored profile, so the
    // residuals are an independent check on the integrated shot and evaluate
    // honestly on synthetic profiles too.
    SolitonResiduals res;
    const std::size_t n = shot.r.size();
    if (n < 5) return res;

    const double hout = shot.r[1] - shot.r[0];
    const std::vector<double> vpp_fd = fd_profile(shot.v_p, hout);
    const std::vector<double> fpp_fd = fd_profile(shot.f_p, hout);
    const std::vector<double> rhopp_fd = fd_profile(shot.rho_p, hout);

    for (std::size_t i = 0; i < n; ++i) {
        const double rho = shot.rho[i], rhop = shot.rho_p[i];
        const double v = shot.v[i], vp = shot.v_p[i], fp = shot.f_p[i];
        const double Rfd = -2.0 * rhopp_fd[i] / rho;

        const double lam2 = (1.0 - vp * vp) / (v * v);
        const double a2 = -(vpp_fd[i] + rhop / rho * vp) / v;
        const double b1 = Rfd - lam2;
        res.a2_lambda2 = std::max(res.a2_lambda2, std::abs(a2 + lam2 - 0.5));
        res.a2_b1 = std::max(res.a2_b1, std::abs(a2 * b1));
        res.fp_vp = std::max(res.fp_vp, std::abs(fp * vp));

        const double atf = 0.5 * (vpp_fd[i] - rhop / rho * vp) *
                           (vpp_fd[i] - rhop / rho * vp);
        const double btf = fpp_fd[i] - rhop / rho * fp;
        res.tf_hessian = std::max(
            res.tf_hessian, std::abs(atf - (v / 2.0) * (v / 2.0) * 0.5 * btf * btf));

        // the soliton equation and its contractions, interior rows only
        if (i >= 2 && i + 2 < n) {
            const double bt_rr = 0.5 * (Rfd - 1.0) - (2.0 * vpp_fd[i] / v - fpp_fd[i]);
            const double bt_tt =
                0.5 * (Rfd - 1.0) - rhop / rho * (2.0 * vp / v - fp);
            res.soliton_eq = std::max(res.soliton_eq, std::max(std::abs(bt_rr), std::abs(bt_tt)));

            const double hv_rr = vpp_fd[i], hv_tt = rhop * vp / rho;
            const double hf_rr = fpp_fd[i], hf_tt = rhop * fp / rho;
            const double lapv = hv_rr + hv_tt, lapf = hf_rr + hf_tt;
            const double id1 = 0.5 * (Rfd - 1.0) * lapv -
                               (2.0 / v) * (hv_rr * hv_rr + hv_tt * hv_tt) +
                               (hv_rr * hf_rr + hv_tt * hf_tt);
            const double id2 = 0.5 * (Rfd - 1.0) * lapf -
                               (2.0 / v) * (hv_rr * hf_rr + hv_tt * hf_tt) +
                               (hf_rr * hf_rr + hf_tt * hf_tt);
            res.contract_v = std::max(res.contract_v, std::abs(id1));
            res.contract_f = std::max(res.contract_f, std::abs(id2));
        }
    }
    return res;
}

std::vector<SweepEntry> classify_sweep(const std::vector<double>& v0s, double r_max,
                                       const ShootOptions& opt) {
    if (v0s.empty()) throw InvalidConfig("sweep requires a nonempty v0 list");
    std::vector<SweepEntry> out;
    out.reserve(v0s.size());
    for (double v0 : v0s) {
        const SolitonShot s = shoot(v0, r_max, opt);
        out.push_back({v0, s.classification, s.r_end, s.residuals.worst_identity()});
    }
    return out;
}

}  // namespace warpflow
