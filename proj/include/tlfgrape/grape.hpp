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

// grape.hpp: open-system GRAPE on the reduced qubit map
//
// Objective for slice amplitudes E1(1..N):
//
//   phi        = Re tr{F_U† P F_N ... F_1 E} / 4
//   phi_tilde  = phi - sum_j alpha(t_j) E1(j)^2 dt       (penalty enabled)
//
// where E embeds a qubit state next to the thermal TLF and P traces the TLF
// out. The TLF-diagonal sector of Liouville space (8 of 16 entries) is
// invariant under every generator and is the only part E feeds, so all
// propagation runs on 8×8 blocks. The gradient contracts the derivative of
// each slice map with cached forward (8×4) and backward (4×8) products.

#pragma once

#include "tlfgrape/hilbert.hpp"
#include "tlfgrape/propagation.hpp"
#include "tlfgrape/redfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tlfgrape {

// ---------------------------------------------------------------------------
// Targets and fidelity

namespace detail {
inline Operator rotation2(Axis axis, double angle) {
    return std::cos(angle / 2) * identity(2) - kI * std::sin(angle / 2) * pauli2(axis);
}
}  // namespace detail

/// Target unitary on the qubit. Registered labels: "Z" = exp(-i pi/2 sigma_z),
/// "X" = exp(-i pi/2 sigma_x), "I".
inline Operator target_unitary(std::string_view gate) {
    static const std::map<std::string, Operator, std::less<>> registry = {
        {"Z", detail::rotation2(Axis::z, std::numbers::pi)},
        {"X", detail::rotation2(Axis::x, std::numbers::pi)},
        {"I", identity(2)},
    };
    const auto it = registry.find(gate);
    if (it == registry.end()) throw std::invalid_argument("unsupported gate label: " + std::string(gate));
    return it->second;
}

inline SuperOp target_superop(std::string_view gate) { return conjugation_superop(target_unitary(gate)); }

/// Re tr{F_U† F_R} / tr{F_U† F_U}; equals 1 for a perfect gate.
inline double fidelity(const SuperOp& reduced, const SuperOp& target) {
    if (reduced.rows() != target.rows() || reduced.cols() != target.cols())
        throw std::invalid_argument("fidelity: dimension mismatch");
    return (target.adjoint() * reduced).trace().real() / static_cast<double>(target.rows());
}

// ---------------------------------------------------------------------------
// Penalty

struct PenaltyParams {
    double alpha0 = 2.0;
    double t0 = 0.02;
    bool enabled = false;

    void validate() const {
        if (!(alpha0 >= 0)) throw std::invalid_argument("PenaltyParams: alpha0 must be non-negative");
        if (!(t0 > 0)) throw std::invalid_argument("PenaltyParams: t0 must be positive");
    }
};

/// alpha(t) = alpha0 (2 - tanh(t/t0) + tanh((t_g - t)/t0)).
inline double penalty_weight(double t, double t_g, const PenaltyParams& pp) {
    return pp.alpha0 * (2.0 - std::tanh(t / pp.t0) + std::tanh((t_g - t) / pp.t0));
}

/// Midpoint Riemann sum of alpha(t) E1(t)^2.
inline double penalty(const ControlPulse& pulse, const PenaltyParams& pp) {
    const double t_g = pulse.gate_time();
    double sum = 0.0;
    for (std::size_t j = 0; j < pulse.slices(); ++j) {
        const double a = pulse.amplitudes[j];
        sum += penalty_weight(pulse.slice_midpoint(j), t_g, pp) * a * a * pulse.dt;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Objective and gradient

enum class GradientMode { exact_directional, first_order };

inline std::string to_string(GradientMode m) {
    return m == GradientMode::exact_directional ? "exact_directional" : "first_order";
}

inline GradientMode gradient_mode_from_string(std::string_view s) {
    if (s == "exact_directional" || s == "exact") return GradientMode::exact_directional;
    if (s == "first_order") return GradientMode::first_order;
    throw std::invalid_argument("unknown gradient mode: " + std::string(s));
}

struct ObjectiveValue {
    double fidelity = 0.0;
    double penalized = 0.0;
};

/// Liouville-space indices of rho elements diagonal in the TLF index
/// (|q t><q' t|). The generator commutes with TLF phase rotations, so this
/// 8-dim sector is invariant; the thermal embedding starts in it and the
/// partial trace reads only from it.
inline std::array<int, 8> tlf_diagonal_sector() {
    std::array<int, 8> idx{};
    int k = 0;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r)
            if (r % 2 == c % 2) idx[static_cast<std::size_t>(k++)] = r + 4 * c;
    return idx;
}

class GrapeObjective {
public:
    using Block = Eigen::Matrix<cplx, 8, 8>;
    using Embed = Eigen::Matrix<cplx, 8, 4>;
    using Readout = Eigen::Matrix<cplx, 4, 8>;

    GrapeObjective(const ModelParams& params, SuperOp target, PenaltyParams penalty, double dt)
        : cache_(params), target_(std::move(target)), penalty_(penalty), dt_(dt), sector_(tlf_diagonal_sector()) {
        if (!(dt_ > 0)) throw std::invalid_argument("GrapeObjective: dt must be positive");
        if (target_.rows() != 4 || target_.cols() != 4) throw std::invalid_argument("GrapeObjective: target must be 4x4");
        penalty_.validate();
        const auto er = embed_and_reduce(thermal_tlf_state(params));
        for (int i = 0; i < 8; ++i) {
            embed_.row(i) = er.embed.row(sector_[static_cast<std::size_t>(i)]);
            reduce_.col(i) = er.reduce.col(sector_[static_cast<std::size_t>(i)]);
        }
        readout_ = target_.adjoint() * reduce_ / static_cast<double>(target_.rows());
    }

    const ModelParams& params() const { return cache_.params(); }
    const SuperOp& target() const { return target_; }
    const PenaltyParams& penalty_params() const { return penalty_; }
    double dt() const { return dt_; }
    GeneratorCache& cache() { return cache_; }

    ControlPulse pulse(const std::vector<double>& amplitudes) const { return ControlPulse{amplitudes, dt_}; }

    /// Reduced qubit map F^R of a pulse.
    SuperOp reduced(const std::vector<double>& amplitudes) {
        Embed x = embed_;
        for (double a : amplitudes) x = expm(dt_ * block(cache_.generator(a))) * x;
        return reduce_ * x;
    }

    ObjectiveValue evaluate(const std::vector<double>& amplitudes) {
        Embed x = embed_;
        for (double a : amplitudes) x = expm(dt_ * block(cache_.generator(a))) * x;
        return finish((readout_ * x).trace().real(), amplitudes);
    }

    /// Gradient of the penalized fidelity; the value at the same point is
    /// returned through `value` when requested.
    std::vector<double> gradient(const std::vector<double>& amplitudes, GradientMode mode,
                                 ObjectiveValue* value = nullptr) {
        const std::size_t n = amplitudes.size();
        std::vector<Block> maps(n);
        std::vector<Block> derivs(n);
        std::vector<Embed> forward(n + 1);
        forward[0] = embed_;
        for (std::size_t j = 0; j < n; ++j) {
            const Block l = dt_ * block(cache_.generator(amplitudes[j]));
            const Block dl = dt_ * block(cache_.generator_derivative(amplitudes[j]));
            if (mode == GradientMode::exact_directional) {
                auto [f, df] = expm_frechet(l, dl);
                maps[j] = f;
                derivs[j] = df;
            } else {
                maps[j] = expm(l);
                derivs[j] = dl * maps[j];
            }
            forward[j + 1] = maps[j] * forward[j];
        }

        std::vector<double> grad(n);
        Readout backward = readout_;
        for (std::size_t j = n; j-- > 0;) {
            grad[j] = (backward * derivs[j] * forward[j]).trace().real();
            backward = backward * maps[j];
        }
        if (penalty_.enabled) {
            const double t_g = static_cast<double>(n) * dt_;
            for (std::size_t j = 0; j < n; ++j) {
                const double t = (static_cast<double>(j) + 0.5) * dt_;
                grad[j] -= 2.0 * penalty_weight(t, t_g, penalty_) * amplitudes[j] * dt_;
            }
        }
        if (value) *value = finish((readout_ * forward[n]).trace().real(), amplitudes);
        return grad;
    }

private:
    Block block(const SuperOp& full) const {
        Block b;
        for (int c = 0; c < 8; ++c)
            for (int r = 0; r < 8; ++r) b(r, c) = full(sector_[static_cast<std::size_t>(r)], sector_[static_cast<std::size_t>(c)]);
        return b;
    }

    ObjectiveValue finish(double fid, const std::vector<double>& amplitudes) const {
        ObjectiveValue v{fid, fid};
        if (penalty_.enabled) v.penalized -= penalty(ControlPulse{amplitudes, dt_}, penalty_);
        return v;
    }

    GeneratorCache cache_;
    SuperOp target_;
    PenaltyParams penalty_;
    double dt_;
    std::array<int, 8> sector_;
    Embed embed_;
    Eigen::Matrix<cplx, 4, 8> reduce_;
    Readout readout_;  // F_U† P / 4 restricted to the sector
};

/// Fidelity of a pulse under the full model, reduced over the thermal TLF.
inline double evaluate_fidelity(const ModelParams& p, const ControlPulse& pulse, const SuperOp& target) {
    return fidelity(reduced_map(full_map(p, pulse).final, p), target);
}

// ---------------------------------------------------------------------------
// Rabi baseline

namespace detail {

/// Closed-system (kappa = 0, Lambda = 0) gate fidelity of a pulse, with the
/// qubit alone: |tr(U_target† U)|^2 / 4.
inline double closed_system_fidelity(const ModelParams& p, const ControlPulse& pulse, const Operator& target) {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd sx = pauli2(Axis::x);
    const Eigen::Matrix2cd sz = pauli2(Axis::z);
    for (double a : pulse.amplitudes) {
        const double norm = std::hypot(a, p.delta);
        const Eigen::Matrix2cd axis = (a * sz + p.delta * sx) / norm;
        const Eigen::Matrix2cd step =
            std::cos(norm * pulse.dt) * Eigen::Matrix2cd::Identity() - kI * std::sin(norm * pulse.dt) * axis;
        u = step * u;
    }
    return std::norm((target.adjoint() * u).trace()) / 4.0;
}

inline ControlPulse rabi_pulse(double amplitude, double phase, double omega, double t_g, double dt) {
    ControlPulse pulse = ControlPulse::zeros(t_g, dt);
    for (std::size_t j = 0; j < pulse.slices(); ++j)
        pulse.amplitudes[j] = amplitude * std::cos(omega * pulse.slice_midpoint(j) + phase);
    return pulse;
}

}  // namespace detail

struct RabiParameters {
    double amplitude;
    double phase;
};

/// Resonant drive E1(t) = A cos(2 Delta t + phase) at slice midpoints.
/// Nominal: A = pi / t_g, phase 0 (rotating-wave pi rotation). Calibrated:
/// (A, phase) maximize the closed-system fidelity by a grid scan followed by
/// a shrinking compass search. E1 -> -E1 leaves that fidelity unchanged, so
/// phase and phase + pi tie; the phase is reported in (-pi/2, pi/2].
inline RabiParameters rabi_parameters(const ModelParams& p, double t_g, bool calibrate,
                                      double dt = kDefaultSliceDuration, std::string_view gate = "Z",
                                      double amplitude_cap = kDefaultAmplitudeCap) {
    if (!(t_g > 0)) throw std::invalid_argument("rabi_baseline: t_g must be positive");
    const double omega = 2.0 * p.delta;
    const double nominal = std::min(std::numbers::pi / t_g, amplitude_cap);
    if (!calibrate) return {nominal, 0.0};

    const Operator target = target_unitary(gate);
    auto score = [&](double amp, double phase) {
        amp = std::clamp(amp, 0.0, amplitude_cap);
        return detail::closed_system_fidelity(p, detail::rabi_pulse(amp, phase, omega, t_g, dt), target);
    };

    RabiParameters best{nominal, 0.0};
    double best_score = score(best.amplitude, best.phase);
    constexpr int kAmpGrid = 41;
    constexpr int kPhaseGrid = 24;
    for (int i = 0; i < kAmpGrid; ++i) {
        const double amp = std::min(nominal * std::pow(2.0, -2.0 + 4.0 * i / (kAmpGrid - 1)), amplitude_cap);
        for (int k = 0; k < kPhaseGrid; ++k) {
            const double phase = 2.0 * std::numbers::pi * k / kPhaseGrid;
            const double s = score(amp, phase);
            if (s > best_score) {
                best_score = s;
                best = {amp, phase};
            }
        }
    }

    double step_amp = 0.05 * best.amplitude;
    double step_phase = 0.25;
    while (step_amp > 1e-10 * nominal || step_phase > 1e-10) {
        bool moved = false;
        const std::array<std::pair<double, double>, 4> moves{
            {{step_amp, 0.0}, {-step_amp, 0.0}, {0.0, step_phase}, {0.0, -step_phase}}};
        for (auto [da, dp] : moves) {
            const RabiParameters trial{std::clamp(best.amplitude + da, 0.0, amplitude_cap), best.phase + dp};
            const double s = score(trial.amplitude, trial.phase);
            if (s > best_score) {
                best_score = s;
                best = trial;
                moved = true;
            }
        }
        if (!moved) {
            step_amp *= 0.5;
            step_phase *= 0.5;
        }
    }
    best.phase = std::remainder(best.phase, std::numbers::pi);
    if (best.phase <= -0.5 * std::numbers::pi) best.phase += std::numbers::pi;
    return best;
}

inline ControlPulse rabi_baseline(const ModelParams& p, double t_g, bool calibrate,
                                  double dt = kDefaultSliceDuration, std::string_view gate = "Z",
                                  double amplitude_cap = kDefaultAmplitudeCap) {
    const auto rp = rabi_parameters(p, t_g, calibrate, dt, gate, amplitude_cap);
    return detail::rabi_pulse(rp.amplitude, rp.phase, 2.0 * p.delta, t_g, dt);
}

// ---------------------------------------------------------------------------
// Optimizer

/// Ascent direction: the plain gradient, or the limited-memory BFGS
/// direction built from recent steps. Both use the same Armijo backtracking.
enum class SearchDirection { steepest, lbfgs };

inline std::string to_string(SearchDirection d) { return d == SearchDirection::steepest ? "steepest" : "lbfgs"; }

inline SearchDirection search_direction_from_string(std::string_view s) {
    if (s == "steepest") return SearchDirection::steepest;
    if (s == "lbfgs") return SearchDirection::lbfgs;
    throw std::invalid_argument("unknown search direction: " + std::string(s));
}

struct OptimizerConfig {
    int max_iterations = 10000;
    double gradient_tolerance = 1e-8;
    double fidelity_stall_tolerance = 1e-10;
    int stall_window = 10;
    int restarts = 8;
    std::uint64_t rng_seed = 0;
    double amplitude_cap = kDefaultAmplitudeCap;
    GradientMode gradient_mode = GradientMode::exact_directional;
    double slice_duration = kDefaultSliceDuration;
    double random_amplitude = 1.0;
    bool calibrate_rabi = true;
    int threads = 1;
    SearchDirection search_direction = SearchDirection::lbfgs;
    int lbfgs_memory = 10;

    void validate() const {
        if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 0");
        if (!(gradient_tolerance > 0) || !(fidelity_stall_tolerance > 0))
            throw std::invalid_argument("OptimizerConfig: tolerances must be positive");
        if (stall_window < 1) throw std::invalid_argument("OptimizerConfig: stall_window must be >= 1");
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
        if (!(amplitude_cap > 0)) throw std::invalid_argument("OptimizerConfig: amplitude_cap must be positive");
        if (!(slice_duration > 0)) throw std::invalid_argument("OptimizerConfig: slice_duration must be positive");
        if (threads < 1) throw std::invalid_argument("OptimizerConfig: threads must be >= 1");
        if (lbfgs_memory < 1) throw std::invalid_argument("OptimizerConfig: lbfgs_memory must be >= 1");
    }
};

struct OptimizationResult {
    ControlPulse pulse;
    double fidelity = 0.0;
    double gate_error = 1.0;
    double penalized_fidelity = 0.0;
    int iterations = 0;
    std::vector<double> fidelity_history;  // penalized objective after each accepted step
    bool converged = false;
    int restart_index = 0;
    std::string stop_reason;
};

/// Armijo line-search constants.
inline constexpr double kArmijoC = 1e-4;
inline constexpr double kStepShrink = 0.5;
inline constexpr double kInitialMaxChange = 0.1;
inline constexpr double kMaxChangePerStep = 1.0;

namespace detail {

/// Limited-memory BFGS history for a maximization problem, stored as pairs
/// s = x_{k+1} - x_k and y = g_k - g_{k+1}.
class LbfgsHistory {
public:
    explicit LbfgsHistory(std::size_t memory) : memory_(memory) {}

    void clear() { pairs_.clear(); }

    void push(std::vector<double> s, std::vector<double> y) {
        const double sy = dot(s, y);
        if (!(sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)))) return;  // curvature condition fails
        if (pairs_.size() == memory_) pairs_.erase(pairs_.begin());
        pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
    }

    /// H g by the two-loop recursion; equals g with an empty history.
    std::vector<double> direction(const std::vector<double>& g) const {
        std::vector<double> q = g;
        std::vector<double> alpha(pairs_.size());
        for (std::size_t k = pairs_.size(); k-- > 0;) {
            const Pair& p = pairs_[k];
            alpha[k] = p.rho * dot(p.s, q);
            axpy(-alpha[k], p.y, q);
        }
        if (!pairs_.empty()) {
            const Pair& last = pairs_.back();
            const double scale = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& v : q) v *= scale;
        }
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            const Pair& p = pairs_[k];
            const double beta = p.rho * dot(p.y, q);
            axpy(alpha[k] - beta, p.s, q);
        }
        return q;
    }

    bool empty() const { return pairs_.empty(); }

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
        return sum;
    }

private:
    struct Pair {
        std::vector<double> s, y;
        double rho;
    };

    static void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
    }

    std::size_t memory_;
    std::vector<Pair> pairs_;
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace detail

/// Gradient ascent from one starting pulse.
inline OptimizationResult ascend(GrapeObjective& objective, std::vector<double> x, const OptimizerConfig& cfg) {
    const double cap = cfg.amplitude_cap;
    for (double& a : x) a = std::clamp(a, -cap, cap);

    OptimizationResult r;
    ObjectiveValue value;
    std::vector<double> grad = objective.gradient(x, cfg.gradient_mode, &value);
    r.fidelity_history.push_back(value.penalized);

    const bool quasi_newton = cfg.search_direction == SearchDirection::lbfgs;
    detail::LbfgsHistory history(static_cast<std::size_t>(cfg.lbfgs_memory));
    double step = -1.0;
    std::vector<double> trial(x.size());
    r.stop_reason = "max_iterations";
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const double gnorm = detail::inf_norm(grad);
        if (gnorm < cfg.gradient_tolerance) {
            r.converged = true;
            r.stop_reason = "gradient_tolerance";
            break;
        }

        std::vector<double> dir = quasi_newton ? history.direction(grad) : grad;
        if (detail::LbfgsHistory::dot(dir, grad) <= 0.0) {
            history.clear();
            dir = grad;
        }
        const double dnorm = detail::inf_norm(dir);
        if (quasi_newton && !history.empty()) {
            step = 1.0;
        } else if (step <= 0.0) {
            step = kInitialMaxChange / dnorm;
        }
        step = std::min(step, kMaxChangePerStep / dnorm);

        bool accepted = false;
        ObjectiveValue trial_value;
        for (int shrink = 0; shrink < 60; ++shrink) {
            double predicted = 0.0;
            bool moved = false;
            for (std::size_t j = 0; j < x.size(); ++j) {
                trial[j] = std::clamp(x[j] + step * dir[j], -cap, cap);
                predicted += grad[j] * (trial[j] - x[j]);
                moved = moved || trial[j] != x[j];
            }
            if (!moved || !(predicted > 0.0)) break;
            trial_value = objective.evaluate(trial);
            if (trial_value.penalized >= value.penalized + kArmijoC * predicted) {
                accepted = true;
                break;
            }
            step *= kStepShrink;
        }
        if (!accepted) {
            if (quasi_newton && !history.empty()) {
                // retry along the plain gradient before giving up
                history.clear();
                step = -1.0;
                continue;
            }
            r.converged = true;
            r.stop_reason = "line_search";
            break;
        }

        std::vector<double> new_grad = objective.gradient(trial, cfg.gradient_mode, &value);
        if (quasi_newton) {
            std::vector<double> s(x.size()), y(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) {
                s[j] = trial[j] - x[j];
                y[j] = grad[j] - new_grad[j];
            }
            history.push(std::move(s), std::move(y));
        }
        x.swap(trial);
        grad.swap(new_grad);
        r.fidelity_history.push_back(value.penalized);
        r.iterations = it + 1;
        step *= 2.0;

        const auto& h = r.fidelity_history;
        const auto w = static_cast<std::size_t>(cfg.stall_window);
        if (h.size() > w && h.back() - h[h.size() - 1 - w] < cfg.fidelity_stall_tolerance) {
            r.converged = true;
            r.stop_reason = "fidelity_stall";
            break;
        }
    }

    r.pulse = objective.pulse(x);
    r.fidelity = value.fidelity;
    r.gate_error = 1.0 - value.fidelity;
    r.penalized_fidelity = value.penalized;
    return r;
}

/// Per-restart RNG seed (splitmix64 of the master seed and the index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Starting pulses: zero, Rabi baseline, restarts - 2 uniform random pulses
/// in [-random_amplitude, random_amplitude], then any extra starts.
inline std::vector<ControlPulse> starting_pulses(const ModelParams& p, double t_g, std::string_view gate,
                                                 const OptimizerConfig& cfg,
                                                 const std::vector<ControlPulse>& extra_starts = {}) {
    std::vector<ControlPulse> starts;
    const ControlPulse zero = ControlPulse::zeros(t_g, cfg.slice_duration);
    starts.push_back(zero);
    if (cfg.restarts >= 2)
        starts.push_back(rabi_baseline(p, t_g, cfg.calibrate_rabi, cfg.slice_duration, gate, cfg.amplitude_cap));
    for (int k = 2; k < cfg.restarts; ++k) {
        std::mt19937_64 rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(k)));
        std::uniform_real_distribution<double> dist(-cfg.random_amplitude, cfg.random_amplitude);
        ControlPulse start = zero;
        for (double& a : start.amplitudes) a = dist(rng);
        starts.push_back(std::move(start));
    }
    for (const auto& extra : extra_starts) {
        if (extra.slices() != zero.slices())
            throw std::invalid_argument("optimize: extra start has the wrong number of slices");
        starts.push_back(ControlPulse{extra.amplitudes, zero.dt});
    }
    return starts;
}

/// Multi-start GRAPE. Restarts are independent; the best penalized
/// objective wins, ties going to the lowest restart index.
inline OptimizationResult optimize(const ModelParams& params, double t_g, std::string_view gate,
                                   const OptimizerConfig& cfg, const PenaltyParams& pp,
                                   const std::vector<ControlPulse>& extra_starts = {}) {
    params.validate();
    cfg.validate();
    pp.validate();
    if (!(t_g > 0)) throw std::invalid_argument("optimize: t_g must be positive");

    const SuperOp target = target_superop(gate);
    const auto starts = starting_pulses(params, t_g, gate, cfg, extra_starts);

    auto run = [&](std::size_t k) {
        GrapeObjective objective(params, target, pp, starts[k].dt);
        OptimizationResult r = ascend(objective, starts[k].amplitudes, cfg);
        r.restart_index = static_cast<int>(k);
        return r;
    };

    std::vector<OptimizationResult> results(starts.size());
    if (cfg.threads <= 1) {
        for (std::size_t k = 0; k < starts.size(); ++k) results[k] = run(k);
    } else {
        std::size_t next = 0;
        while (next < starts.size()) {
            std::vector<std::future<OptimizationResult>> batch;
            const std::size_t end = std::min(starts.size(), next + static_cast<std::size_t>(cfg.threads));
            for (std::size_t k = next; k < end; ++k) batch.push_back(std::async(std::launch::async, run, k));
            for (std::size_t k = next; k < end; ++k) results[k] = batch[k - next].get();
            next = end;
        }
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k)
        if (results[k].penalized_fidelity > results[best].penalized_fidelity) best = k;
    return results[best];
}

}  // namespace tlfgrape
