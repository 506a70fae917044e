// Copyright 2026 The tlfgrape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cli.hpp: command-line front end
//
//   tlfgrape_cli [global options] <optimize|rabi|sweep-tg|sweep-gamma|sweep-temp|check>
//
// Exit status: 0 success, 1 invalid configuration or arguments, 2 numerical
// failure (non-finite results, failed invariant checks).

#pragma once

#include "tlfgrape/experiments.hpp"
#include "tlfgrape/invariants.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#ifndef TLFGRAPE_VERSION
#define TLFGRAPE_VERSION "0.1.0"
#endif
#ifndef TLFGRAPE_GIT_REVISION
#define TLFGRAPE_GIT_REVISION "unknown"
#endif

namespace tlfgrape {

/// Raised for results that are not finite or fail a numerical check.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace cli {

struct GlobalOptions {
    std::string config;
    std::optional<long long> seed;
    std::string out = "out";
    std::optional<int> threads;
    std::optional<std::string> gradient_mode;
    bool lamb_shift = false;
    std::optional<bool> penalty;
    std::optional<double> tg;
    std::string init_pulse;
};

inline nlohmann::json build_info() {
    return {{"version", TLFGRAPE_VERSION}, {"git_revision", TLFGRAPE_GIT_REVISION}, {"compiler", __VERSION__}};
}

inline RunSettings load_settings(const GlobalOptions& g) {
    RunSettings s;
    if (!g.config.empty()) apply_config(Config::load(g.config), s);
    if (g.seed) {
        if (*g.seed < 0) throw std::invalid_argument("--seed must be non-negative");
        s.optimizer.rng_seed = static_cast<std::uint64_t>(*g.seed);
    }
    if (g.threads) s.optimizer.threads = *g.threads;
    if (g.gradient_mode) s.optimizer.gradient_mode = gradient_mode_from_string(*g.gradient_mode);
    if (g.lamb_shift) s.params.lamb_shift = true;
    if (g.penalty) s.penalty.enabled = *g.penalty;
    if (g.tg) s.t_g = *g.tg;
    s.params.validate();
    s.optimizer.validate();
    if (!(s.t_g > 0)) throw std::invalid_argument("t_g must be positive");
    return s;
}

inline std::filesystem::path prepare_out(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << std::setw(2) << j << '\n';
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    fn(os);
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw NumericalFailure(what + " is not finite");
}

inline SweepSpec make_spec(const RunSettings& s, SweepVariable v) {
    SweepSpec spec;
    spec.variable = v;
    spec.base_params = s.params;
    spec.gate = s.gate;
    spec.optimizer = s.optimizer;
    spec.penalty = s.penalty;
    spec.warm_start = s.warm_start;
    spec.t_g = s.t_g;
    switch (v) {
        case SweepVariable::t_g: spec.grid = s.tg_grid; break;
        case SweepVariable::gamma: spec.grid = s.gamma_grid; break;
        case SweepVariable::temperature:
            spec.grid = s.temperature_grid;
            spec.gamma_grid = s.gamma_grid;
            break;
    }
    return spec;
}

inline int cmd_optimize(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    std::vector<ControlPulse> extra;
    if (!g.init_pulse.empty()) {
        std::ifstream in(g.init_pulse);
        if (!in) throw std::invalid_argument("cannot open pulse file: " + g.init_pulse);
        extra.push_back(resample(read_pulse_csv(in), s.t_g, s.optimizer.slice_duration));
    }
    const auto r = optimize(s.params, s.t_g, s.gate, s.optimizer, s.penalty, extra);
    require_finite(r.fidelity, "fidelity");

    const auto dir = prepare_out(g.out);
    nlohmann::json j = to_json(r, s.params, s.optimizer.rng_seed, s.optimizer.gradient_mode);
    j["gate"] = s.gate;
    j["penalty"] = {{"enabled", s.penalty.enabled}, {"alpha0", s.penalty.alpha0}, {"t0", s.penalty.t0}};
    j["build"] = build_info();
    write_json(dir / "optimize.json", j);
    write_file(dir / "pulse.csv", [&](std::ostream& os) { write_pulse_csv(os, r.pulse); });

    // trajectory of |+><+| next to the thermal TLF
    const Operator plus = 0.5 * (identity(2) + pauli2(Axis::x));
    const auto traj = evolve_state(s.params, r.pulse, kron(plus, thermal_tlf_state(s.params)), s.samples_per_slice);
    write_file(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj); });

    out << std::setprecision(6) << "gate_error " << r.gate_error << "  fidelity " << r.fidelity << "  iterations "
        << r.iterations << "  stop " << r.stop_reason << "\nwrote " << (dir / "optimize.json").string() << '\n';
    return 0;
}

inline int cmd_rabi(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    const auto rp = rabi_parameters(s.params, s.t_g, s.optimizer.calibrate_rabi, s.optimizer.slice_duration, s.gate,
                                    s.optimizer.amplitude_cap);
    const ControlPulse pulse = rabi_baseline(s.params, s.t_g, s.optimizer.calibrate_rabi, s.optimizer.slice_duration,
                                             s.gate, s.optimizer.amplitude_cap);
    const double f = evaluate_fidelity(s.params, pulse, target_superop(s.gate));
    require_finite(f, "fidelity");
    const auto dir = prepare_out(g.out);
    write_json(dir / "rabi.json", {{"params", to_json(s.params)},
                                   {"t_g", pulse.gate_time()},
                                   {"dt", pulse.dt},
                                   {"amplitude", rp.amplitude},
                                   {"phase", rp.phase},
                                   {"calibrated", s.optimizer.calibrate_rabi},
                                   {"fidelity", f},
                                   {"gate_error", 1.0 - f},
                                   {"build", build_info()}});
    write_file(dir / "rabi_pulse.csv", [&](std::ostream& os) { write_pulse_csv(os, pulse); });
    out << std::setprecision(6) << "rabi gate_error " << 1.0 - f << "  amplitude " << rp.amplitude << "  phase "
        << rp.phase << '\n';
    return 0;
}

inline int cmd_sweep_tg(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    const SweepSpec spec = make_spec(s, SweepVariable::t_g);
    const auto points = sweep_tg(spec);
    for (const auto& pt : points) require_finite(pt.grape.gate_error, "gate error");
    const auto dir = prepare_out(g.out);
    write_file(dir / "sweep_tg.csv", [&](std::ostream& os) { write_tg_csv(os, points); });
    write_json(dir / "sweep_tg.json", {{"spec", to_json(spec)}, {"build", build_info()}, {"points", to_json(points)}});
    out << "wrote " << (dir / "sweep_tg.csv").string() << " (" << points.size() << " points)\n";
    return 0;
}

inline nlohmann::json gamma_summary(const std::vector<SweepPoint>& points) {
    const GammaAnalysis a = analyze_gamma_sweep(points);
    nlohmann::json fits = nlohmann::json::object();
    if (a.linear) fits["linear"] = to_json(*a.linear);
    if (a.hyperbolic) fits["hyperbolic"] = to_json(*a.hyperbolic);
    return {{"points", to_json(points)}, {"fits", fits}, {"gamma_max", a.peak.x}, {"error_at_gamma_max", a.peak.y}};
}

inline int cmd_sweep_gamma(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    const SweepSpec spec = make_spec(s, SweepVariable::gamma);
    const auto points = sweep_gamma(spec);
    for (const auto& pt : points) require_finite(pt.grape.gate_error, "gate error");
    const auto dir = prepare_out(g.out);
    write_file(dir / "sweep_gamma.csv", [&](std::ostream& os) { write_gamma_csv(os, points); });
    nlohmann::json j = gamma_summary(points);
    j["spec"] = to_json(spec);
    j["build"] = build_info();
    write_json(dir / "sweep_gamma.json", j);
    out << std::setprecision(6) << "gamma_max " << j["gamma_max"].get<double>() << "  peak error "
        << j["error_at_gamma_max"].get<double>() << "\nwrote " << (dir / "sweep_gamma.csv").string() << '\n';
    return 0;
}

inline int cmd_sweep_temp(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    const SweepSpec spec = make_spec(s, SweepVariable::temperature);
    const auto temps = sweep_temperature(spec);
    const auto dir = prepare_out(g.out);
    write_file(dir / "sweep_temp.csv", [&](std::ostream& os) { write_temperature_csv(os, temps); });
    nlohmann::json per_t = nlohmann::json::array();
    for (const auto& tp : temps) {
        for (const auto& pt : tp.gamma_sweep) require_finite(pt.grape.gate_error, "gate error");
        nlohmann::json j = gamma_summary(tp.gamma_sweep);
        j["temperature"] = tp.temperature;
        per_t.push_back(std::move(j));
        std::ostringstream name;
        name << "sweep_gamma_T" << tp.temperature << ".csv";
        write_file(dir / name.str(), [&](std::ostream& os) { write_gamma_csv(os, tp.gamma_sweep); });
        out << std::setprecision(6) << "T " << tp.temperature << "  gamma_max " << tp.gamma_max << "  peak error "
            << tp.error_at_gamma_max << '\n';
    }
    write_json(dir / "sweep_temp.json", {{"spec", to_json(spec)}, {"build", build_info()}, {"temperatures", per_t}});
    out << "wrote " << (dir / "sweep_temp.csv").string() << '\n';
    return 0;
}

inline int cmd_check(const GlobalOptions& g, std::ostream& out) {
    const RunSettings s = load_settings(g);
    bool all = true;
    for (const auto& c : run_invariant_suite(s.optimizer.rng_seed)) {
        out << (c.passed() ? "PASS " : "FAIL ") << c.name << "  value " << std::setprecision(6) << c.value
            << "  bounds [" << c.lower << ", " << c.upper << "]\n";
        all = all && c.passed();
    }
    return all ? 0 : 2;
}

}  // namespace cli

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Open-system GRAPE for a qubit coupled to a two-level fluctuator", "tlfgrape_cli"};
    app.fallthrough();
    app.require_subcommand(1);
    cli::GlobalOptions g;
    app.add_option("--config", g.config, "configuration file (key = value)");
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--gradient-mode", g.gradient_mode, "exact_directional or first_order")
        ->check(CLI::IsMember({"exact_directional", "exact", "first_order"}));
    app.add_flag("--lamb-shift", g.lamb_shift, "keep principal-value bath terms");
    app.add_flag("--penalty,!--no-penalty", g.penalty, "amplitude penalty on or off");

    auto* optimize_cmd = app.add_subcommand("optimize", "optimize one pulse: JSON, pulse CSV, trajectory CSV");
    optimize_cmd->add_option("--tg", g.tg, "gate time in 1/Delta");
    optimize_cmd->add_option("--init-pulse", g.init_pulse, "pulse CSV added as a starting guess");
    auto* rabi_cmd = app.add_subcommand("rabi", "evaluate the Rabi baseline pulse");
    rabi_cmd->add_option("--tg", g.tg, "gate time in 1/Delta");
    auto* sweep_tg_cmd = app.add_subcommand("sweep-tg", "gate error against gate time");
    auto* sweep_gamma_cmd = app.add_subcommand("sweep-gamma", "gate error against TLF rate gamma");
    sweep_gamma_cmd->add_option("--tg", g.tg, "gate time in 1/Delta");
    auto* sweep_temp_cmd = app.add_subcommand("sweep-temp", "gamma_max against temperature");
    sweep_temp_cmd->add_option("--tg", g.tg, "gate time in 1/Delta");
    auto* check_cmd = app.add_subcommand("check", "run the numerical invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*optimize_cmd) return cli::cmd_optimize(g, out);
        if (*rabi_cmd) return cli::cmd_rabi(g, out);
        if (*sweep_tg_cmd) return cli::cmd_sweep_tg(g, out);
        if (*sweep_gamma_cmd) return cli::cmd_sweep_gamma(g, out);
        if (*sweep_temp_cmd) return cli::cmd_sweep_temp(g, out);
        if (*check_cmd) return cli::cmd_check(g, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace tlfgrape
