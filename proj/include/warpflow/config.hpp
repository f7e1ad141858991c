#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "warpflow/flow_s1.hpp"
#include "warpflow/flow_surface.hpp"
#include "warpflow/soliton.hpp"

namespace warpflow {

enum class RunMode { RunS1, RunSurface, SolitonShoot, OracleCheck, Report };

const char* to_string(RunMode m);
std::optional<RunMode> mode_from_string(const std::string& s);

struct OracleConfig {
    int samples = 100;
    double h = 1e-3;
    double tol = 1e-6;
    int m = 1024;  // grid for the closed-form side
    std::vector<FiberSpec> fibers;  // defaults to S^2(mu=1) x S^3(mu=2)
};

// Parsed, schema-validated run configuration. Parsing collects every violation
// (with line numbers) before failing, not just the first.
struct RunConfig {
    std::optional<RunMode> mode;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    S1Config s1;
    SurfaceConfig surface;
    OracleConfig oracle;

    double soliton_v0 = std::sqrt(2.0);
    double soliton_rmax = 20.0;
    std::vector<double> soliton_sweep;
    ShootOptions soliton_opts;
};

// cli_mode (when given) overrides the file's mode and selects which fiber
// profile families are admissible during validation.
RunConfig parse_config(const std::string& path,
                       std::optional<RunMode> cli_mode = std::nullopt);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<text>",
                            std::optional<RunMode> cli_mode = std::nullopt);

}  // namespace warpflow
