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

// experiments.hpp: parameter sweeps, curve fits, configuration and output
//
// Sweeps over gate time, TLF rate and temperature; each grid point is an
// independent multi-start optimization seeded from the master seed and its
// grid index. With warm starts the previous point's pulse joins the starts
// of the next one, which makes the sweep sequential over the grid.

#pragma once

#include "tlfgrape/grape.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlfgrape {

// ---------------------------------------------------------------------------
// Grids

enum class Spacing { linear, log };

inline std::vector<double> make_grid(double start, double stop, int count, Spacing spacing) {
    if (count < 1) throw std::invalid_argument("grid: count must be >= 1");
    if (spacing == Spacing::log && !(start > 0 && stop > 0))
        throw std::invalid_argument("grid: log spacing needs positive bounds");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        g[static_cast<std::size_t>(i)] = spacing == Spacing::linear
                                             ? start + f * (stop - start)
                                             : std::exp(std::log(start) + f * (std::log(stop) - std::log(start)));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Sweep specification

enum class SweepVariable { t_g, gamma, temperature };

inline std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::t_g: return "t_g";
        case SweepVariable::gamma: return "gamma";
        case SweepVariable::temperature: return "temperature";
    }
    return "";
}

struct SweepSpec {
    SweepVariable variable = SweepVariable::t_g;
    std::vector<double> grid;           // values of the swept variable
    std::vector<double> gamma_grid;     // inner grid of a temperature sweep
    ModelParams base_params;
    std::string gate = "Z";
    OptimizerConfig optimizer;
    PenaltyParams penalty;
    bool warm_start = true;
    double t_g = 5.0;                   // fixed gate time of gamma / temperature sweeps
    bool with_rabi = true;              // t_g sweeps: also evaluate the Rabi baseline

    void validate() const {
        if (grid.empty()) throw std::invalid_argument("SweepSpec: empty grid");
        for (double v : grid)
            if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument("SweepSpec: grid values must be positive");
        if (variable == SweepVariable::temperature && gamma_grid.empty())
            throw std::invalid_argument("SweepSpec: temperature sweep needs a gamma grid");
        for (double g : gamma_grid)
            if (!(g > 0)) throw std::invalid_argument("SweepSpec: gamma grid values must be positive");
        if (!(t_g > 0)) throw std::invalid_argument("SweepSpec: t_g must be positive");
        base_params.validate();
        optimizer.validate();
        penalty.validate();
    }
};

/// Defaults: t_g linear 41 points on [1, 8]; gamma log 25 points on [1e-3, 10];
/// temperatures {0.1, 0.2, 0.4}.
inline std::vector<double> default_tg_grid() { return make_grid(1.0, 8.0, 41, Spacing::linear); }
inline std::vector<double> default_gamma_grid() { return make_grid(1e-3, 10.0, 25, Spacing::log); }
inline std::vector<double> default_temperature_grid() { return {0.1, 0.2, 0.4}; }

struct SweepPoint {
    double value = 0.0;  // swept variable
    ModelParams params;
    std::uint64_t seed = 0;
    OptimizationResult grape;
    std::optional<double> rabi_error;
};

/// Pulse resampled onto n slices by linear interpolation in normalized time.
inline ControlPulse resample(const ControlPulse& pulse, double t_g, double dt_target) {
    ControlPulse out = ControlPulse::zeros(t_g, dt_target);
    const auto m = pulse.slices();
    for (std::size_t j = 0; j < out.slices(); ++j) {
        const double u = out.slice_midpoint(j) / t_g * static_cast<double>(m) - 0.5;
        const double c = std::clamp(u, 0.0, static_cast<double>(m - 1));
        const auto lo = static_cast<std::size_t>(std::floor(c));
        const auto hi = std::min(lo + 1, m - 1);
        const double w = c - static_cast<double>(lo);
        out.amplitudes[j] = (1 - w) * pulse.amplitudes[lo] + w * pulse.amplitudes[hi];
    }
    return out;
}

namespace detail {

struct PointJob {
    double value;
    ModelParams params;
    double t_g;
};

/// Runs jobs in grid order. Without warm starts the points are spread over a
/// pool of cfg.threads workers; with warm starts they run in sequence and the
/// threads go to the restarts of each point.
inline std::vector<SweepPoint> run_points(const SweepSpec& spec, const std::vector<PointJob>& jobs) {
    std::vector<SweepPoint> out(jobs.size());
    auto solve = [&](std::size_t i, const std::vector<ControlPulse>& warm, int threads) {
        SweepPoint pt;
        pt.value = jobs[i].value;
        pt.params = jobs[i].params;
        OptimizerConfig cfg = spec.optimizer;
        cfg.rng_seed = derive_seed(spec.optimizer.rng_seed, i);
        cfg.threads = threads;
        pt.seed = cfg.rng_seed;
        pt.grape = optimize(pt.params, jobs[i].t_g, spec.gate, cfg, spec.penalty, warm);
        if (spec.variable == SweepVariable::t_g && spec.with_rabi) {
            const ControlPulse rabi = rabi_baseline(pt.params, jobs[i].t_g, cfg.calibrate_rabi, cfg.slice_duration,
                                                    spec.gate, cfg.amplitude_cap);
            pt.rabi_error = 1.0 - evaluate_fidelity(pt.params, rabi, target_superop(spec.gate));
        }
        return pt;
    };

    if (spec.warm_start) {
        std::vector<ControlPulse> warm;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            out[i] = solve(i, warm, spec.optimizer.threads);
            warm = {resample(out[i].grape.pulse, jobs[i + 1 < jobs.size() ? i + 1 : i].t_g,
                             spec.optimizer.slice_duration)};
        }
        return out;
    }

    const auto workers = static_cast<std::size_t>(std::max(1, spec.optimizer.threads));
    std::size_t next = 0;
    while (next < jobs.size()) {
        const std::size_t end = std::min(jobs.size(), next + workers);
        std::vector<std::future<SweepPoint>> batch;
        for (std::size_t i = next; i < end; ++i)
            batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, solve, i,
                                       std::vector<ControlPulse>{}, 1));
        for (std::size_t i = next; i < end; ++i) out[i] = batch[i - next].get();
        next = end;
    }
    return out;
}

}  // namespace detail

/// Gate error against t_g at fixed model parameters.
inline std::vector<SweepPoint> sweep_tg(const SweepSpec& spec) {
    spec.validate();
    std::vector<detail::PointJob> jobs;
    for (double t : spec.grid) jobs.push_back({t, spec.base_params, t});
    return detail::run_points(spec, jobs);
}

/// Gate error against the TLF rate gamma at fixed t_g; kappa follows from
/// gamma at the sweep temperature.
inline std::vector<SweepPoint> sweep_gamma(const SweepSpec& spec) {
    spec.validate();
    std::vector<detail::PointJob> jobs;
    for (double g : spec.grid) {
        ModelParams p = spec.base_params;
        p.kappa = kappa_for_gamma(g, p);
        jobs.push_back({g, p, spec.t_g});
    }
    return detail::run_points(spec, jobs);
}

/// Location of the maximum of y over a positive grid x, refined by a parabola
/// through the grid maximum and its neighbours in log x.
struct Peak {
    double x;
    double y;
    std::size_t index;
};

inline Peak locate_peak(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("locate_peak: size mismatch");
    const auto k = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
    if (k == 0 || k + 1 == x.size()) return {x[k], y[k], k};
    const double x0 = std::log(x[k - 1]), x1 = std::log(x[k]), x2 = std::log(x[k + 1]);
    const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
    // Newton form y0 + d01 (x - x0) + curv (x - x0)(x - x1)
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (!(curv < 0)) return {x[k], y[k], k};
    const double xv = std::clamp(0.5 * (x0 + x1) - d01 / (2 * curv), x0, x2);
    return {std::exp(xv), y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1), k};
}

struct TemperaturePoint {
    double temperature;
    double gamma_max;
    double error_at_gamma_max;
    std::vector<SweepPoint> gamma_sweep;
};

/// For each temperature: a gamma sweep and the location of its maximum.
inline std::vector<TemperaturePoint> sweep_temperature(const SweepSpec& spec) {
    spec.validate();
    std::vector<TemperaturePoint> out;
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        SweepSpec inner = spec;
        inner.variable = SweepVariable::gamma;
        inner.grid = spec.gamma_grid;
        inner.base_params.temperature = spec.grid[i];
        inner.optimizer.rng_seed = derive_seed(spec.optimizer.rng_seed, 1000 + i);
        TemperaturePoint tp;
        tp.temperature = spec.grid[i];
        tp.gamma_sweep = sweep_gamma(inner);
        std::vector<double> x, y;
        for (const auto& pt : tp.gamma_sweep) {
            x.push_back(pt.value);
            y.push_back(pt.grape.gate_error);
        }
        const Peak peak = locate_peak(x, y);
        tp.gamma_max = peak.x;
        tp.error_at_gamma_max = peak.y;
        out.push_back(std::move(tp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fits

enum class FitModel { linear, hyperbolic };

inline std::string to_string(FitModel m) { return m == FitModel::linear ? "linear" : "hyperbolic"; }

struct FitResult {
    FitModel model;
    double c0;  // a (linear) or c (hyperbolic)
    double c1;  // b (linear) or d (hyperbolic)
    double residual_rms;
    double window_lo;
    double window_hi;
    std::size_t points;

    double operator()(double g) const { return model == FitModel::linear ? c0 + c1 * g : c0 + c1 / g; }
};

/// Ordinary least squares of y = c0 + c1 g (linear) or y = c0 + c1 / g
/// (hyperbolic) over the points with g inside [lo, hi].
inline FitResult fit_curve(const std::vector<double>& g, const std::vector<double>& y, FitModel model,
                           double lo = 0.0, double hi = std::numeric_limits<double>::infinity()) {
    if (g.size() != y.size()) throw std::invalid_argument("fit_curve: size mismatch");
    std::vector<double> u, v;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < lo * (1 - 1e-12) || g[i] > hi * (1 + 1e-12)) continue;
        if (model == FitModel::hyperbolic && !(g[i] > 0)) throw std::invalid_argument("fit_curve: hyperbolic fit needs g > 0");
        u.push_back(model == FitModel::linear ? g[i] : 1.0 / g[i]);
        v.push_back(y[i]);
    }
    if (u.size() < 3) throw std::invalid_argument("fit_curve: at least 3 points required in the window");
    const double n = static_cast<double>(u.size());
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
    const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double suu = 0.0, suv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suu += (u[i] - mu) * (u[i] - mu);
        suv += (u[i] - mu) * (v[i] - mv);
    }
    if (!(suu > 0)) throw std::invalid_argument("fit_curve: degenerate abscissae");
    FitResult r{model, 0.0, suv / suu, 0.0, lo, hi, u.size()};
    r.c0 = mv - r.c1 * mu;
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = v[i] - (r.c0 + r.c1 * u[i]);
        ss += e * e;
    }
    r.residual_rms = std::sqrt(ss / n);
    return r;
}

// ---------------------------------------------------------------------------
// Reference curves

/// 1 - exp(-t_g / T1) with T1 from the E1 = 0 RTN formula; scale 2 gives the
/// 2 T1 curve.
inline double t1_limit(const ModelParams& p, double t_g, double scale = 1.0) {
    const double rate = t1_t2_rates(p, 0.0).t1_rate;
    return -std::expm1(-t_g * rate / scale);
}

// ---------------------------------------------------------------------------
// Configuration

/// Flat key/value configuration, TOML-compatible subset: `key = value` lines,
/// `#` comments, optional `[section]` headers that prefix keys as
/// "section.key". Values are numbers, booleans, quoted strings or arrays of
/// numbers.
class Config {
public:
    static Config parse(std::istream& is, const std::string& source = "<config>") {
        Config c;
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::string s = trim(strip_comment(line));
            if (s.empty()) continue;
            auto fail = [&](const std::string& what) {
                throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + what);
            };
            if (s.front() == '[') {
                if (s.back() != ']') fail("unterminated section header");
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty()) fail("empty section name");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) fail("expected key = value");
            std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (key.empty() || value.empty()) fail("empty key or value");
            for (char ch : key)
                if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) fail("bad key '" + key + "'");
            if (!section.empty()) key = section + "." + key;
            if (c.values_.count(key)) fail("duplicate key '" + key + "'");
            c.values_[key] = unquote(value, fail);
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file: " + path);
        return parse(in, path);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::vector<std::string> keys() const {
        std::vector<std::string> k;
        for (const auto& [key, _] : values_) k.push_back(key);
        return k;
    }

    std::string string(const std::string& key) const { return values_.at(key); }

    double number(const std::string& key) const {
        const std::string& v = values_.at(key);
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v.size() || !std::isfinite(d))
            throw std::invalid_argument("config key '" + key + "': not a number: " + v);
        return d;
    }

    long long integer(const std::string& key) const {
        const double d = number(key);
        if (d != std::floor(d)) throw std::invalid_argument("config key '" + key + "': not an integer");
        return static_cast<long long>(d);
    }

    bool boolean(const std::string& key) const {
        const std::string& v = values_.at(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw std::invalid_argument("config key '" + key + "': not a boolean: " + v);
    }

    std::vector<double> numbers(const std::string& key) const {
        std::string v = values_.at(key);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw std::invalid_argument("config key '" + key + "': expected an array");
        std::vector<double> out;
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            Config tmp;
            tmp.values_["x"] = item;
            out.push_back(tmp.number("x"));
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }

    template <typename Fail>
    static std::string unquote(const std::string& v, Fail& fail) {
        if (v.front() != '"') return v;
        if (v.size() < 2 || v.back() != '"') fail("unterminated string");
        return v.substr(1, v.size() - 2);
    }

    std::map<std::string, std::string> values_;
};

/// Everything a CLI run needs, filled from defaults and then a config file.
struct RunSettings {
    ModelParams params;
    OptimizerConfig optimizer;
    PenaltyParams penalty;
    std::string gate = "Z";
    double t_g = 5.0;
    bool warm_start = true;
    int samples_per_slice = 1;
    std::vector<double> tg_grid = default_tg_grid();
    std::vector<double> gamma_grid = default_gamma_grid();
    std::vector<double> temperature_grid = default_temperature_grid();
};

/// Recognized keys. Unknown keys are rejected so typos do not pass silently.
inline void apply_config(const Config& c, RunSettings& s) {
    static const std::vector<std::string> known = {
        "delta", "e2", "lambda", "kappa", "temperature", "omega_c", "lamb_shift",
        "gamma",  // sets kappa through the gamma formula at the configured temperature
        "tg", "dt", "gate", "seed", "restarts", "max_iterations", "gradient_tolerance",
        "fidelity_stall_tolerance", "stall_window", "amplitude_cap", "gradient_mode", "search_direction",
        "lbfgs_memory", "random_amplitude", "calibrate_rabi", "threads", "penalty", "alpha0", "t0", "warm_start",
        "samples_per_slice", "tg_grid", "gamma_grid", "temperature_grid",
        "tg_start", "tg_stop", "tg_count", "gamma_start", "gamma_stop", "gamma_count"};
    for (const auto& k : c.keys())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw std::invalid_argument("unknown config key: " + k);

    auto num = [&](const char* k, double& dst) {
        if (c.has(k)) dst = c.number(k);
    };
    auto integer = [&](const char* k, int& dst) {
        if (c.has(k)) dst = static_cast<int>(c.integer(k));
    };
    auto flag = [&](const char* k, bool& dst) {
        if (c.has(k)) dst = c.boolean(k);
    };
    num("delta", s.params.delta);
    num("e2", s.params.e2);
    num("lambda", s.params.lambda);
    num("kappa", s.params.kappa);
    num("temperature", s.params.temperature);
    num("omega_c", s.params.omega_c);
    flag("lamb_shift", s.params.lamb_shift);
    if (c.has("gamma")) {
        if (c.has("kappa")) throw std::invalid_argument("config: give either kappa or gamma, not both");
        s.params.kappa = kappa_for_gamma(c.number("gamma"), s.params);
    }
    num("tg", s.t_g);
    num("dt", s.optimizer.slice_duration);
    if (c.has("gate")) {
        s.gate = c.string("gate");
        (void)target_unitary(s.gate);
    }
    if (c.has("seed")) {
        const long long seed = c.integer("seed");
        if (seed < 0) throw std::invalid_argument("config: seed must be non-negative");
        s.optimizer.rng_seed = static_cast<std::uint64_t>(seed);
    }
    integer("restarts", s.optimizer.restarts);
    integer("max_iterations", s.optimizer.max_iterations);
    num("gradient_tolerance", s.optimizer.gradient_tolerance);
    num("fidelity_stall_tolerance", s.optimizer.fidelity_stall_tolerance);
    integer("stall_window", s.optimizer.stall_window);
    num("amplitude_cap", s.optimizer.amplitude_cap);
    if (c.has("gradient_mode")) s.optimizer.gradient_mode = gradient_mode_from_string(c.string("gradient_mode"));
    if (c.has("search_direction"))
        s.optimizer.search_direction = search_direction_from_string(c.string("search_direction"));
    integer("lbfgs_memory", s.optimizer.lbfgs_memory);
    num("random_amplitude", s.optimizer.random_amplitude);
    flag("calibrate_rabi", s.optimizer.calibrate_rabi);
    integer("threads", s.optimizer.threads);
    flag("penalty", s.penalty.enabled);
    num("alpha0", s.penalty.alpha0);
    num("t0", s.penalty.t0);
    flag("warm_start", s.warm_start);
    integer("samples_per_slice", s.samples_per_slice);

    auto grid = [&](const std::string& name, std::vector<double>& dst, Spacing spacing) {
        if (c.has(name + "_grid")) dst = c.numbers(name + "_grid");
        if (c.has(name + "_start") || c.has(name + "_stop") || c.has(name + "_count")) {
            if (!(c.has(name + "_start") && c.has(name + "_stop") && c.has(name + "_count")))
                throw std::invalid_argument("config: " + name + "_start, _stop and _count go together");
            dst = make_grid(c.number(name + "_start"), c.number(name + "_stop"),
                            static_cast<int>(c.integer(name + "_count")), spacing);
        }
    };
    grid("tg", s.tg_grid, Spacing::linear);
    grid("gamma", s.gamma_grid, Spacing::log);
    if (c.has("temperature_grid")) s.temperature_grid = c.numbers("temperature_grid");

    s.params.validate();
    s.optimizer.validate();
    s.penalty.validate();
    if (!(s.t_g > 0)) throw std::invalid_argument("config: tg must be positive");
    if (s.samples_per_slice < 1) throw std::invalid_argument("config: samples_per_slice must be >= 1");
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const ModelParams& p) {
    return {{"delta", p.delta},   {"e2", p.e2},           {"lambda", p.lambda},         {"kappa", p.kappa},
            {"gamma", rtn_gamma(p)}, {"temperature", p.temperature}, {"omega_c", p.omega_c},
            {"lamb_shift", p.lamb_shift}};
}

inline nlohmann::json to_json(const OptimizationResult& r, const ModelParams& p, std::uint64_t seed,
                              GradientMode mode) {
    return {{"params", to_json(p)},
            {"t_g", r.pulse.gate_time()},
            {"dt", r.pulse.dt},
            {"amplitudes", r.pulse.amplitudes},
            {"fidelity", r.fidelity},
            {"gate_error", r.gate_error},
            {"penalized_fidelity", r.penalized_fidelity},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason},
            {"restart_index", r.restart_index},
            {"seed", seed},
            {"gradient_mode", to_string(mode)}};
}

/// Pulse CSV: slice_index, t_mid, E1.
inline void write_pulse_csv(std::ostream& os, const ControlPulse& pulse) {
    os << "slice_index,t_mid,E1\n" << std::setprecision(17);
    for (std::size_t j = 0; j < pulse.slices(); ++j)
        os << j << ',' << pulse.slice_midpoint(j) << ',' << pulse.amplitudes[j] << '\n';
}

/// Reads a pulse CSV written by write_pulse_csv. Slices must be uniform.
inline ControlPulse read_pulse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("slice_index,t_mid,E1", 0) != 0)
        throw std::invalid_argument("pulse CSV: missing header");
    std::vector<double> t, e;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw std::invalid_argument("pulse CSV: malformed row");
        if (std::stoul(a) != t.size()) throw std::invalid_argument("pulse CSV: slice indices out of order");
        t.push_back(std::stod(b));
        e.push_back(std::stod(c));
    }
    if (e.empty()) throw std::invalid_argument("pulse CSV: no slices");
    const double dt = 2.0 * t[0];
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j] - (j + 0.5) * dt) > 1e-9 * (1.0 + t[j]))
            throw std::invalid_argument("pulse CSV: non-uniform slices");
    return ControlPulse{e, dt};
}

/// t_g sweep CSV columns: t_g, gate_error_grape, gate_error_rabi, t1_limit,
/// t1_limit_2x, fidelity, iterations, converged, seed.
inline void write_tg_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << "t_g,gate_error_grape,gate_error_rabi,t1_limit,t1_limit_2x,fidelity,iterations,converged,seed\n"
       << std::setprecision(17);
    for (const auto& pt : points)
        os << pt.value << ',' << pt.grape.gate_error << ',' << (pt.rabi_error ? *pt.rabi_error : std::nan("")) << ','
           << t1_limit(pt.params, pt.value) << ',' << t1_limit(pt.params, pt.value, 2.0) << ',' << pt.grape.fidelity
           << ',' << pt.grape.iterations << ',' << (pt.grape.converged ? 1 : 0) << ',' << pt.seed << '\n';
}

/// gamma sweep CSV columns: gamma, kappa, temperature, gate_error, fidelity,
/// iterations, converged, seed.
inline void write_gamma_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
    os << "gamma,kappa,temperature,gate_error,fidelity,iterations,converged,seed\n" << std::setprecision(17);
    for (const auto& pt : points)
        os << pt.value << ',' << pt.params.kappa << ',' << pt.params.temperature << ',' << pt.grape.gate_error << ','
           << pt.grape.fidelity << ',' << pt.grape.iterations << ',' << (pt.grape.converged ? 1 : 0) << ','
           << pt.seed << '\n';
}

/// Temperature sweep CSV columns: temperature, gamma_max, error_at_gamma_max.
inline void write_temperature_csv(std::ostream& os, const std::vector<TemperaturePoint>& points) {
    os << "temperature,gamma_max,error_at_gamma_max\n" << std::setprecision(17);
    for (const auto& tp : points) os << tp.temperature << ',' << tp.gamma_max << ',' << tp.error_at_gamma_max << '\n';
}

inline nlohmann::json to_json(const FitResult& f) {
    return {{"model", to_string(f.model)},
            {f.model == FitModel::linear ? "a" : "c", f.c0},
            {f.model == FitModel::linear ? "b" : "d", f.c1},
            {"residual_rms", f.residual_rms},
            {"window", {f.window_lo, f.window_hi}},
            {"points", f.points}};
}

inline nlohmann::json to_json(const SweepSpec& s) {
    return {{"variable", to_string(s.variable)},
            {"grid", s.grid},
            {"gamma_grid", s.gamma_grid},
            {"base_params", to_json(s.base_params)},
            {"gate", s.gate},
            {"t_g", s.t_g},
            {"warm_start", s.warm_start},
            {"seed", s.optimizer.rng_seed},
            {"restarts", s.optimizer.restarts},
            {"max_iterations", s.optimizer.max_iterations},
            {"gradient_mode", to_string(s.optimizer.gradient_mode)},
            {"search_direction", to_string(s.optimizer.search_direction)},
            {"slice_duration", s.optimizer.slice_duration},
            {"penalty", {{"enabled", s.penalty.enabled}, {"alpha0", s.penalty.alpha0}, {"t0", s.penalty.t0}}}};
}

inline nlohmann::json to_json(const std::vector<SweepPoint>& points) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& pt : points) {
        nlohmann::json j = {{"value", pt.value},
                            {"kappa", pt.params.kappa},
                            {"temperature", pt.params.temperature},
                            {"gate_error", pt.grape.gate_error},
                            {"fidelity", pt.grape.fidelity},
                            {"iterations", pt.grape.iterations},
                            {"converged", pt.grape.converged},
                            {"seed", pt.seed}};
        if (pt.rabi_error) j["gate_error_rabi"] = *pt.rabi_error;
        arr.push_back(std::move(j));
    }
    return arr;
}

/// Windows of the two gamma-dependence laws.
inline constexpr double kLinearWindowLo = 1e-3;
inline constexpr double kLinearWindowHi = 2e-2;
inline constexpr double kHyperbolicWindowLo = 2.0;
inline constexpr double kHyperbolicWindowHi = 10.0;

struct GammaAnalysis {
    Peak peak;
    std::optional<FitResult> linear;
    std::optional<FitResult> hyperbolic;
};

inline GammaAnalysis analyze_gamma_sweep(const std::vector<SweepPoint>& points) {
    std::vector<double> g, y;
    for (const auto& pt : points) {
        g.push_back(pt.value);
        y.push_back(pt.grape.gate_error);
    }
    GammaAnalysis a{locate_peak(g, y), std::nullopt, std::nullopt};
    try {
        a.linear = fit_curve(g, y, FitModel::linear, kLinearWindowLo, kLinearWindowHi);
    } catch (const std::invalid_argument&) {
    }
    try {
        a.hyperbolic = fit_curve(g, y, FitModel::hyperbolic, kHyperbolicWindowLo, kHyperbolicWindowHi);
    } catch (const std::invalid_argument&) {
    }
    return a;
}

}  // namespace tlfgrape
