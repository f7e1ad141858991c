#include "warpflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "warpflow/errors.hpp"

namespace warpflow {

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::RunS1: return "run-s1";
        case RunMode::RunSurface: return "run-surface";
        case RunMode::SolitonShoot: return "soliton-shoot";
        case RunMode::OracleCheck: return "oracle-check";
        case RunMode::Report: return "report";
    }
    return "unknown";
}

std::optional<RunMode> mode_from_string(const std::string& s) {
    if (s == "run-s1") return RunMode::RunS1;
    if (s == "run-surface") return RunMode::RunSurface;
    if (s == "soliton-shoot") return RunMode::SolitonShoot;
    if (s == "oracle-check") return RunMode::OracleCheck;
    if (s == "report") return RunMode::Report;
    return std::nullopt;
}

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Violations {
    std::vector<std::string> items;

    void add(int line, const std::string& msg) {
        items.push_back("line " + std::to_string(line) + ": " + msg);
    }
    void add(const std::string& msg) { items.push_back(msg); }
    void raise_if_any(const std::string& origin) const {
        if (items.empty()) return;
        std::string all = "invalid config (" + origin + "):";
        for (const auto& s : items) all += "\n  - " + s;
        throw InvalidConfig(all);
    }
};

class KeyMap {
  public:
    KeyMap(std::map<std::string, Entry> entries, Violations& v)
        : entries_(std::move(entries)), v_(v) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::optional<std::string> raw(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    template <class T>
    T number(const std::string& key, T fallback, T lo, T hi) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        std::istringstream ss(it->second.value);
        T x{};
        ss >> x;
        if (ss.fail() || !(ss >> std::ws).eof()) {
            v_.add(it->second.line, key + ": cannot parse '" + it->second.value + "'");
            return fallback;
        }
        if (x < lo || x > hi) {
            std::ostringstream msg;
            msg << key << ": value " << x << " outside [" << lo << ", " << hi << "]";
            v_.add(it->second.line, msg.str());
            return fallback;
        }
        return x;
    }

    std::vector<double> number_list(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return {};
        it->second.used = true;
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second.value);
        while (std::getline(ss, item, ',')) {
            std::istringstream is(item);
            double x;
            is >> x;
            if (is.fail() || !(is >> std::ws).eof()) {
                v_.add(it->second.line, key + ": cannot parse list item '" + item + "'");
                return {};
            }
            out.push_back(x);
        }
        return out;
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void reject_unused() {
        for (const auto& [k, e] : entries_)
            if (!e.used) v_.add(e.line, "unknown key '" + k + "'");
    }

  private:
    std::map<std::string, Entry> entries_;
    Violations& v_;
};

Field load_table(const std::string& path, Violations& v, int line) {
    std::ifstream in(path);
    if (!in) {
        v.add(line, "cannot open profile table '" + path + "'");
        return {};
    }
    Field f;
    double x;
    while (in >> x) f.push_back(x);
    return f;
}

void parse_fibers_s1(KeyMap& km, Violations& v, S1Config& s1, const int count) {
    for (int k = 1; k <= count; ++k) {
        const std::string pre = "fiber" + std::to_string(k) + ".";
        FiberInit fi;
        fi.fiber.n = km.number<int>(pre + "n", 2, 1, 64);
        if (fi.fiber.n < 2)
            v.add(km.line_of(pre + "n"), pre + "n: fibers must satisfy n_a >= 2");
        fi.fiber.mu = km.number<double>(pre + "mu", fi.fiber.n - 1.0, 0.0, 1e6);
        const auto prof = km.raw(pre + "profile").value_or("constant");
        if (prof == "constant") fi.kind = ProfileKind::Constant;
        else if (prof == "cosine") fi.kind = ProfileKind::CosineNeck;
        else if (prof == "sine") fi.kind = ProfileKind::SineNeck;
        else if (prof == "table") fi.kind = ProfileKind::Table;
        else
            v.add(km.line_of(pre + "profile"),
                  pre + "profile: unknown family '" + prof +
                      "' (constant|cosine|sine|table)");
        fi.v0 = km.number<double>(pre + "v0", 1.0, -1e6, 1e6);
        fi.amp = km.number<double>(pre + "amp", 0.0, -1e6, 1e6);
        fi.harmonic = km.number<int>(pre + "harmonic", 1, 1, 1024);
        if (auto t = km.raw(pre + "table"))
            fi.table = load_table(*t, v, km.line_of(pre + "table"));
        s1.fibers.push_back(std::move(fi));
    }
}

void parse_fibers_surface(KeyMap& km, Violations& v, SurfaceConfig& sc, const int count) {
    for (int k = 1; k <= count; ++k) {
        const std::string pre = "fiber" + std::to_string(k) + ".";
        SurfaceFiberInit fi;
        fi.fiber.n = km.number<int>(pre + "n", 2, 1, 64);
        if (fi.fiber.n < 2)
            v.add(km.line_of(pre + "n"), pre + "n: fibers must satisfy n_a >= 2");
        fi.fiber.mu = km.number<double>(pre + "mu", fi.fiber.n - 1.0, 0.0, 1e6);
        const auto prof = km.raw(pre + "profile").value_or("constant");
        if (prof == "constant") fi.kind = SurfaceProfileKind::Constant;
        else if (prof == "log_sine_x") fi.kind = SurfaceProfileKind::LogSineX;
        else if (prof == "log_cosine_x") fi.kind = SurfaceProfileKind::LogCosineX;
        else if (prof == "log_sine_xy") fi.kind = SurfaceProfileKind::LogSineXY;
        else
            v.add(km.line_of(pre + "profile"),
                  pre + "profile: unknown family '" + prof +
                      "' (constant|log_sine_x|log_cosine_x|log_sine_xy)");
        fi.v0 = km.number<double>(pre + "v0", 1.0, -1e6, 1e6);
        fi.amp = km.number<double>(pre + "amp", 0.0, -1e6, 1e6);
        fi.harmonic = km.number<int>(pre + "harmonic", 1, 1, 1024);
        sc.fibers.push_back(std::move(fi));
    }
}

RunConfig parse_entries(std::map<std::string, Entry> entries, const std::string& origin,
                        std::optional<RunMode> cli_mode) {
    Violations v;
    KeyMap km(std::move(entries), v);
    RunConfig rc;

    if (auto m = km.raw("mode")) {
        rc.mode = mode_from_string(*m);
        if (!rc.mode) v.add(km.line_of("mode"), "mode: unknown mode '" + *m + "'");
    }
    if (cli_mode) rc.mode = cli_mode;
    if (auto o = km.raw("out")) rc.out_dir = *o;
    rc.seed = km.number<std::uint64_t>("seed", 1, 0, ~0ull);

    const int nf = km.number<int>("fibers", 0, 0, 16);

    // S^1 flow
    rc.s1.m = km.number<int>("grid.m", 256, 1, 1 << 20);
    if (rc.s1.m < 16) v.add(km.line_of("grid.m"), "grid.m: must be at least 16");
    rc.s1.cfl = km.number<double>("run.cfl", 0.2, 1e-6, 10.0);
    rc.s1.rxn = km.number<double>("run.rxn", 0.05, 1e-6, 10.0);
    rc.s1.eps_stop_rel = km.number<double>("run.eps_stop_rel", 1e-3, 1e-12, 1.0);
    rc.s1.dt_override = km.number<double>("run.dt_override", 0.0, 0.0, 1.0);
    rc.s1.dt_scale = km.number<double>("run.dt_scale", 1.0, 1e-6, 1.0);
    rc.s1.t_max = km.number<double>("run.t_max", 1e30, 0.0, 1e30);
    rc.s1.record_every = km.number<int>("run.record_every", 1, 1, 1 << 20);
    rc.s1.snapshot_every = km.number<int>("run.snapshot_every", 0, 0, 1 << 28);
    rc.s1.residual_times = km.number_list("run.residual_times");
    rc.s1.mon.omega_delta = km.number<double>("monitor.delta", 0.1, 1e-6, 1.0);
    rc.s1.mon.beta = km.number<double>("monitor.beta", 32.0, 0.0, 1e6);
    rc.s1.mon.pinch_fiber = km.number<int>("monitor.pinch_fiber", 0, 0, 15);
    rc.s1.mon.profile_delta = km.number<double>("monitor.profile_delta", 0.25, 0.01, 0.45);

    // surface flow shares run.* and monitor.*
    rc.surface.mx = km.number<int>("grid.mx", 64, 1, 1 << 14);
    rc.surface.my = km.number<int>("grid.my", 64, 1, 1 << 14);
    if (km.has("grid.mx") && rc.surface.mx < 16)
        v.add(km.line_of("grid.mx"), "grid.mx: must be at least 16");
    if (km.has("grid.my") && rc.surface.my < 16)
        v.add(km.line_of("grid.my"), "grid.my: must be at least 16");
    rc.surface.cfl = rc.s1.cfl;
    rc.surface.rxn = rc.s1.rxn;
    rc.surface.eps_stop_rel = rc.s1.eps_stop_rel;
    rc.surface.dt_override = rc.s1.dt_override;
    rc.surface.dt_scale = rc.s1.dt_scale;
    rc.surface.t_max = rc.s1.t_max;
    rc.surface.record_every = rc.s1.record_every;
    rc.surface.residual_times = rc.s1.residual_times;
    rc.surface.mon = rc.s1.mon;
    rc.surface.eta = km.number<double>("surface.eta", 1.0, 0.0, 1e6);

    const bool surface_mode = rc.mode && *rc.mode == RunMode::RunSurface;
    if (surface_mode)
        parse_fibers_surface(km, v, rc.surface, nf);
    else
        parse_fibers_s1(km, v, rc.s1, nf);
    if (rc.mode && (*rc.mode == RunMode::RunS1 || *rc.mode == RunMode::RunSurface) &&
        nf == 0)
        v.add("fibers: a flow run needs at least one fiber");

    // soliton
    rc.soliton_v0 = km.number<double>("soliton.v0", std::sqrt(2.0), 1e-12, 1e6);
    rc.soliton_rmax = km.number<double>("soliton.rmax", 20.0, 1e-2, 100.0);
    rc.soliton_sweep = km.number_list("soliton.sweep");
    rc.soliton_opts.r0 = km.number<double>("soliton.r0", 1e-3, 1e-6, 1e-1);
    rc.soliton_opts.out_dr = km.number<double>("soliton.out_dr", 1e-2, 1e-5, 1.0);
    rc.soliton_opts.tol = km.number<double>("soliton.tol", 1e-11, 1e-15, 1e-6);

    // oracle
    rc.oracle.samples = km.number<int>("oracle.samples", 100, 1, 100000);
    rc.oracle.h = km.number<double>("oracle.h", 1e-3, 1e-4, 1e-2);
    rc.oracle.tol = km.number<double>("oracle.tol", 1e-6, 1e-15, 1.0);
    rc.oracle.m = km.number<int>("oracle.m", 1024, 16, 1 << 16);
    if (rc.mode && *rc.mode == RunMode::OracleCheck) {
        for (const auto& f : rc.s1.fibers) rc.oracle.fibers.push_back(f.fiber);
    }

    km.reject_unused();
    v.raise_if_any(origin);
    return rc;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            std::optional<RunMode> cli_mode) {
    std::map<std::string, Entry> entries;
    Violations v;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto notsp = line.find_first_not_of(" \t\r");
        if (notsp == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            v.add(lineno, "expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            v.add(lineno, "empty key");
            continue;
        }
        if (entries.count(key)) {
            v.add(lineno, "duplicate key '" + key + "'");
            continue;
        }
        entries[key] = Entry{val, lineno, false};
    }
    v.raise_if_any(origin);
    return parse_entries(std::move(entries), origin, cli_mode);
}

RunConfig parse_config(const std::string& path, std::optional<RunMode> cli_mode) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path, cli_mode);
}

}  // namespace warpflow
