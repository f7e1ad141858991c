// warpflow: multiply warped product Ricci flow laboratory.
//
// Batch front end: parse a key=value config, run one of the five modes, and
// emit CSV series, snapshot dumps, and a JSON summary under --out.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "warpflow/cli.hpp"
#include "warpflow/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multiply warped product Ricci flow laboratory"};

    std::string config_path, out_dir, mode_str;
    std::uint64_t seed = 0;
    bool have_seed = false;

    app.add_option("--config", config_path, "run configuration file (key = value)");
    app.add_option("--out", out_dir, "output directory (overrides config 'out')");
    app.add_option("--mode", mode_str,
                   "run-s1 | run-surface | soliton-shoot | oracle-check | report");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides config 'seed')");

    // soliton conveniences
    double v0 = 0.0;
    bool have_v0 = false;
    double rmax = 0.0;
    bool have_rmax = false;
    std::vector<double> sweep;
    auto* v0_opt = app.add_option("--v0", v0, "soliton-shoot: shooting parameter v(0)");
    auto* rmax_opt = app.add_option("--rmax", rmax, "soliton-shoot: integration range");
    app.add_option("--sweep", sweep, "soliton-shoot: v0 sweep list")->delimiter(',');

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;
    have_v0 = v0_opt->count() > 0;
    have_rmax = rmax_opt->count() > 0;

    try {
        std::optional<warpflow::RunMode> cli_mode;
        if (!mode_str.empty()) {
            cli_mode = warpflow::mode_from_string(mode_str);
            if (!cli_mode) throw warpflow::InvalidConfig("unknown --mode '" + mode_str + "'");
        }

        warpflow::RunConfig cfg;
        if (!config_path.empty())
            cfg = warpflow::parse_config(config_path, cli_mode);
        else
            cfg.mode = cli_mode;

        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (have_seed) cfg.seed = seed;
        if (have_v0) cfg.soliton_v0 = v0;
        if (have_rmax) cfg.soliton_rmax = rmax;
        if (!sweep.empty()) cfg.soliton_sweep = sweep;

        // WARPFLOW_THREADS caps internal parallelism; the numerics are defined
        // to be bitwise independent of it (current build evaluates serially).
        if (const char* th = std::getenv("WARPFLOW_THREADS")) {
            (void)th;
        }

        return warpflow::run_command(cfg);
    } catch (const warpflow::InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return warpflow::kExitConfig;
    } catch (const warpflow::MissingArtifacts& e) {
        std::cerr << "missing artifacts: " << e.what() << "\n";
        return warpflow::kExitConfig;
    } catch (const warpflow::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return warpflow::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return warpflow::kExitNumerical;
    }
}
