#include "warpflow/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "warpflow/errors.hpp"
#include "warpflow/fd_oracle.hpp"

namespace warpflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << content;
}

std::string csv_header_s1(int nf) {
    std::string h = "t,dt";
    for (int a = 0; a < nf; ++a) {
        const std::string s = std::to_string(a + 1);
        h += ",vmin" + s + ",vmax" + s + ",gradsq" + s + ",chimax" + s + ",zmax" + s;
    }
    h += ",q_min,p_min,f_max,max_rm,sigma_fl_max,l_min_on_omega,omega_measure,"
         "omega_components,kappa0_neck,kappa1_neck,phi_min,length\n";
    return h;
}

std::string series_csv(const TrajectoryS1& tr) {
    const int nf = tr.spec.fiber_count();
    std::string out = csv_header_s1(nf);
    for (const auto& r : tr.records) {
        out += num(r.t) + "," + num(r.dt);
        for (int a = 0; a < nf; ++a)
            out += "," + num(r.vmin[a]) + "," + num(r.vmax[a]) + "," +
                   num(r.grad_sq_max[a]) + "," + num(r.chi_max[a]) + "," + num(r.z_max[a]);
        out += "," + num(r.q_min) + "," + num(r.p_min) + "," + num(r.f_max) + "," +
               num(r.max_rm) + "," + num(r.sigma_fl_max) + "," + num(r.l_min_on_omega) +
               "," + num(r.omega_measure) + "," + std::to_string(r.omega_components) +
               "," + num(r.kappa0_neck) + "," + num(r.kappa1_neck) + "," +
               num(r.phi_min) + "," + num(r.length) + "\n";
    }
    return out;
}

std::string series_csv(const TrajectorySurface& tr) {
    const int nf = tr.spec.fiber_count();
    std::string out = "t,dt";
    for (int a = 0; a < nf; ++a) {
        const std::string s = std::to_string(a + 1);
        out += ",vmin" + s + ",vmax" + s + ",gradwsq" + s;
    }
    out += ",area,gauss_bonnet,rcheck_min,rcheck_max,p_max,p_integral,f_upper_max,"
           "f_lower_min,qcal_min,pcal_min,max_rm,c0_fit,c1_fit\n";
    for (const auto& r : tr.records) {
        out += num(r.t) + "," + num(r.dt);
        for (int a = 0; a < nf; ++a)
            out += "," + num(r.vmin[a]) + "," + num(r.vmax[a]) + "," +
                   num(r.grad_w_sq_max[a]);
        out += "," + num(r.area) + "," + num(r.gauss_bonnet) + "," + num(r.rcheck_min) +
               "," + num(r.rcheck_max) + "," + num(r.p_max) + "," + num(r.p_integral) +
               "," + num(r.f_upper_max) +
               "," + num(r.f_lower_min) + "," + num(r.qcal_min) + "," + num(r.pcal_min) +
               "," + num(r.max_rm) + "," + num(r.c0_fit) + "," + num(r.c1_fit) + "\n";
    }
    return out;
}

std::string snapshot_text(const FlowStateS1& st) {
    std::string out = "# warpflow s1 snapshot\nt = " + num(st.t) +
                      "\nm = " + std::to_string(st.m()) + "\n# theta phi v...\n";
    for (int j = 0; j < st.m(); ++j) {
        out += num(st.grid.theta(j)) + " " + num(st.phi[j]);
        for (const auto& va : st.v) out += " " + num(va[j]);
        out += "\n";
    }
    return out;
}

std::string snapshot_text(const FlowStateSurface& st) {
    std::string out = "# warpflow surface snapshot\nt = " + num(st.t) +
                      "\nmx = " + std::to_string(st.grid.mx) +
                      "\nmy = " + std::to_string(st.grid.my) + "\n# x y g11 g12 g22 w...\n";
    for (int i = 0; i < st.grid.mx; ++i) {
        for (int j = 0; j < st.grid.my; ++j) {
            const std::size_t k = st.grid.idx(i, j);
            out += num(st.grid.x(i)) + " " + num(st.grid.y(j)) + " " + num(st.g11[k]) +
                   " " + num(st.g12[k]) + " " + num(st.g22[k]);
            for (const auto& wa : st.w) out += " " + num(wa[k]);
            out += "\n";
        }
    }
    return out;
}

json assertions_json(const AssertionLog& log) {
    json j;
    j["checks"] = log.checks;
    j["failures"] = log.failures;
    j["first_failures"] = log.first_failures;
    return j;
}

int run_s1_cmd(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "snapshots");
    const TrajectoryS1 tr = run_s1(cfg.s1);

    write_file(dir / "series.csv", series_csv(tr));
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snap_%06zu.txt", i);
        write_file(dir / "snapshots" / name, snapshot_text(tr.snapshots[i]));
    }

    json j;
    j["mode"] = "run-s1";
    j["grid_m"] = cfg.s1.m;
    j["steps"] = tr.steps;
    j["termination"] = to_string(tr.termination);
    j["t_end"] = tr.snapshots.back().t;
    j["assumptions"] = {{"single_fiber_pinching", tr.assumptions.single_fiber_pinching},
                        {"guarantee_cylinder", tr.assumptions.guarantee_cylinder},
                        {"small_gradient", tr.assumptions.small_gradient},
                        {"r0", tr.assumptions.r0},
                        {"c1", tr.assumptions.c1}};
    j["t_hat_valid"] = tr.t_hat_valid;
    if (tr.t_hat_valid) {
        j["t_hat"] = tr.t_hat;
        j["t_fit_residual"] = tr.t_fit_residual;
    }
    j["b_const"] = tr.b_const;

    json verdicts;
    verdicts["max_principle_and_c1"] = tr.assertions.passed();
    verdicts["completed_without_blowup"] = tr.termination != TerminationReason::Blowup;
    j["verdicts"] = verdicts;
    j["assertions"] = assertions_json(tr.assertions);

    if (tr.t_hat_valid) {
        try {
            const TypeIReport rep = typei_and_rescale(
                tr.records, tr.spec, tr.t_hat,
                tr.profile_snapshots.empty()
                    ? std::vector<FlowStateS1>{tr.snapshots.back()}
                    : tr.profile_snapshots,
                cfg.s1.mon, cfg.s1.mon.profile_delta, tr.t_fit_residual);
            json ty;
            ty["samples"] = rep.series.size();
            ty["type_i_ratio_first"] = rep.series.front().type_i_ratio;
            ty["type_i_ratio_last"] = rep.series.back().type_i_ratio;
            ty["kappa1_rescaled_last"] = rep.series.back().kappa1_rescaled;
            ty["kappa0_rescaled_last"] = rep.series.back().kappa0_rescaled;
            ty["sigma_fl_rescaled_first"] = rep.series.front().sigma_fl_rescaled;
            ty["sigma_fl_rescaled_last"] = rep.series.back().sigma_fl_rescaled;
            ty["neck_ratio_last"] = rep.series.back().neck_ratio;
            ty["p_decay_c4"] = rep.p_decay_c4;
            ty["f_bound_c"] = rep.f_bound_c;
            ty["kappa0_env_c"] = rep.kappa0_env_c;
            ty["profile_c_inner"] = rep.profile.c_inner;
            ty["profile_c_outer"] = rep.profile.c_outer;
            ty["neck_ratio_spread"] = rep.neck_ratio_spread;
            ty["type_i_ratio_spread"] = rep.type_i_ratio_spread;
            j["type_i"] = ty;

            std::string prof = "sigma,v1\n";
            for (std::size_t i = 0; i < rep.profile.sigma.size(); ++i)
                prof += num(rep.profile.sigma[i]) + "," + num(rep.profile.v1[i]) + "\n";
            write_file(dir / "profile.csv", prof);
        } catch (const InsufficientData&) {
            j["type_i"] = nullptr;
        }
    }

    write_file(dir / "summary.json", j.dump(2) + "\n");
    return tr.assertions.passed() ? kExitOk : kExitAssertion;
}

int run_surface_cmd(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "snapshots");
    const TrajectorySurface tr = run_surface(cfg.surface);

    write_file(dir / "series.csv", series_csv(tr));
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snap_%06zu.txt", i);
        write_file(dir / "snapshots" / name, snapshot_text(tr.snapshots[i]));
    }

    json j;
    j["mode"] = "run-surface";
    j["grid_mx"] = cfg.surface.mx;
    j["grid_my"] = cfg.surface.my;
    j["steps"] = tr.steps;
    j["termination"] = to_string(tr.termination);
    j["t_end"] = tr.snapshots.back().t;
    j["assumptions"] = {{"eta_tame", tr.assumptions.eta_tame},
                        {"eta", tr.assumptions.eta},
                        {"f_upper_max0", tr.assumptions.f_upper_max0}};
    j["t_hat_valid"] = tr.t_hat_valid;
    if (tr.t_hat_valid) {
        j["t_hat"] = tr.t_hat;
        j["t_fit_residual"] = tr.t_fit_residual;
    }
    j["c0_fit"] = tr.c0_fit;
    j["c1_fit"] = tr.c1_fit;

    double gb_max = 0.0;
    for (const auto& r : tr.records) gb_max = std::max(gb_max, std::abs(r.gauss_bonnet));
    j["gauss_bonnet_max_abs"] = gb_max;

    json verdicts;
    verdicts["area_monotone"] = tr.assertions.passed();
    verdicts["gauss_bonnet"] = gb_max <= 1e-6;
    verdicts["completed_without_blowup"] = tr.termination != TerminationReason::Blowup;
    j["verdicts"] = verdicts;
    j["assertions"] = assertions_json(tr.assertions);

    write_file(dir / "summary.json", j.dump(2) + "\n");
    const bool pass = tr.assertions.passed() && gb_max <= 1e-6;
    return pass ? kExitOk : kExitAssertion;
}

int soliton_cmd(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    json j;
    j["mode"] = "soliton-shoot";

    auto shot_json = [](const SolitonShot& s) {
        json o;
        o["v0"] = s.v0;
        o["classification"] = to_string(s.classification);
        o["r_end"] = s.r_end;
        o["residuals"] = {{"a2_lambda2", s.residuals.a2_lambda2},
                          {"a2_b1", s.residuals.a2_b1},
                          {"fp_vp", s.residuals.fp_vp},
                          {"tf_hessian", s.residuals.tf_hessian},
                          {"soliton_eq", s.residuals.soliton_eq},
                          {"contract_v", s.residuals.contract_v},
                          {"contract_f", s.residuals.contract_f}};
        o["normalization_residual"] = s.normalization_residual;
        o["c_fit"] = s.c_fit;
        return o;
    };

    if (cfg.soliton_sweep.empty()) {
        const SolitonShot s = shoot(cfg.soliton_v0, cfg.soliton_rmax, cfg.soliton_opts);
        j["shot"] = shot_json(s);
        std::string csv = "r,rho,rho_p,v,v_p,f_p,f\n";
        for (std::size_t i = 0; i < s.r.size(); ++i)
            csv += num(s.r[i]) + "," + num(s.rho[i]) + "," + num(s.rho_p[i]) + "," +
                   num(s.v[i]) + "," + num(s.v_p[i]) + "," + num(s.f_p[i]) + "," +
                   num(s.f[i]) + "\n";
        write_file(dir / "profiles.csv", csv);
    } else {
        const auto sweep = classify_sweep(cfg.soliton_sweep, cfg.soliton_rmax,
                                          cfg.soliton_opts);
        json tab = json::array();
        for (const auto& e : sweep)
            tab.push_back({{"v0", e.v0},
                           {"classification", to_string(e.cls)},
                           {"r_end", e.r_end},
                           {"worst_identity", e.worst_identity}});
        j["sweep"] = tab;
    }
    write_file(dir / "report.json", j.dump(2) + "\n");
    return kExitOk;
}

int oracle_cmd(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    WarpedProductSpec spec;
    spec.base = BaseKind::CircleS1;
    spec.fibers = cfg.oracle.fibers.empty()
                      ? std::vector<FiberSpec>{FiberSpec{2, 1.0}, FiberSpec{3, 2.0}}
                      : cfg.oracle.fibers;
    spec.validate();

    std::mt19937_64 rng(cfg.seed);
    json samples = json::array();
    double worst = 0.0;
    bool pass = true;
    for (int s = 0; s < cfg.oracle.samples; ++s) {
        const OracleState os = random_oracle_state(spec, rng);
        const FlowStateS1 st = realize_s1(os, spec, cfg.oracle.m);
        // a grid node away from the wrap seam, fiber angles pole-safe
        const int jnode = static_cast<int>((rng() % static_cast<std::uint64_t>(st.m())));
        const ChartPoint p = random_chart_point(spec, rng, {st.grid.theta(jnode)});

        const RiemannFd R = riemann_fd(spec, os, p, cfg.oracle.h);
        const FdBlocks fd = extract_blocks(spec, os, p, R);
        const CurvatureBlocks closed = curvature_blocks(st, spec);
        const BlockComparison cmp = compare_blocks(closed, jnode, fd, cfg.oracle.tol);

        worst = std::max(worst, cmp.worst());
        pass = pass && cmp.pass;
        json e;
        e["sample"] = s;
        e["node"] = jnode;
        e["worst_rel_error"] = cmp.worst();
        e["pass"] = cmp.pass;
        samples.push_back(e);
    }

    json j;
    j["mode"] = "oracle-check";
    j["seed"] = cfg.seed;
    j["samples"] = cfg.oracle.samples;
    j["h"] = cfg.oracle.h;
    j["tolerance"] = cfg.oracle.tol;
    j["grid_m"] = cfg.oracle.m;
    j["worst_rel_error"] = worst;
    j["pass"] = pass;
    j["per_sample"] = samples;
    write_file(dir / "report.json", j.dump(2) + "\n");
    return pass ? kExitOk : kExitAssertion;
}

}  // namespace

int run_command(const RunConfig& cfg) {
    if (!cfg.mode) throw InvalidConfig("no mode given (config 'mode' or --mode)");
    switch (*cfg.mode) {
        case RunMode::RunS1: return run_s1_cmd(cfg);
        case RunMode::RunSurface: return run_surface_cmd(cfg);
        case RunMode::SolitonShoot: return soliton_cmd(cfg);
        case RunMode::OracleCheck: return oracle_cmd(cfg);
        case RunMode::Report: return report(cfg.out_dir);
    }
    throw InvalidConfig("unhandled mode");
}

int report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    json verdicts = json::object();
    bool found = false;
    bool all_pass = true;

    for (const char* name : {"summary.json", "report.json"}) {
        const fs::path p = dir / name;
        if (!fs::exists(p)) continue;
        found = true;
        std::ifstream in(p);
        json j;
        in >> j;
        if (j.contains("verdicts")) {
            for (auto& [k, v] : j["verdicts"].items()) {
                verdicts[k] = v;
                if (v.is_boolean() && !v.get<bool>()) all_pass = false;
            }
        }
        if (j.contains("pass")) {
            verdicts["oracle"] = j["pass"];
            if (!j["pass"].get<bool>()) all_pass = false;
        }
        if (j.contains("sweep")) {
            bool rigid = true;
            for (const auto& e : j["sweep"]) {
                const double v0 = e["v0"].get<double>();
                const bool cyl = e["classification"].get<std::string>() == "Cylinder";
                if (cyl && std::abs(v0 - std::sqrt(2.0)) > 1e-6) rigid = false;
            }
            verdicts["soliton_rigidity"] = rigid;
            if (!rigid) all_pass = false;
        }
    }
    if (!found)
        throw MissingArtifacts("no summary.json or report.json under '" + run_dir + "'");

    json out;
    out["verdict"] = all_pass ? "PASS" : "FAIL";
    out["criteria"] = verdicts;
    write_file(dir / "verdict.json", out.dump(2) + "\n");
    std::cout << (all_pass ? "PASS" : "FAIL") << "\n";
    return all_pass ? kExitOk : kExitAssertion;
}

}  // namespace warpflow
