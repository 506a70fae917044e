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

// invariants.hpp: numerical self-checks of the propagation and gradient
//
// Each check reports a measured value and the bound it must meet. The suite
// runs in a few seconds and backs the `check` CLI subcommand.

#pragma once

#include "tlfgrape/experiments.hpp"
#include "tlfgrape/grape.hpp"
#include "tlfgrape/propagation.hpp"

#include <random>
#include <string>
#include <vector>

namespace tlfgrape {

struct InvariantCheck {
    std::string name;
    double value;
    double lower;  // pass when lower <= value <= upper
    double upper;
    bool passed() const { return value >= lower && value <= upper; }
};

namespace detail {

inline ControlPulse random_pulse(std::mt19937_64& rng, std::size_t n, double dt, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp);
    ControlPulse pulse{std::vector<double>(n), dt};
    for (double& a : pulse.amplitudes) a = u(rng);
    return pulse;
}

}  // namespace detail

/// Worst trace defect |vec(1)† F - vec(1)†| along random trajectories.
inline double check_trace_preservation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Vector id = vec(identity(4));
    double worst = 0.0;
    for (double kappa : {0.0, 0.005, 0.05}) {
        ModelParams p;
        p.kappa = kappa;
        const auto traj = full_map(p, detail::random_pulse(rng, 80, kDefaultSliceDuration, 2.0), true);
        for (const auto& f : traj.cumulative) worst = std::max(worst, max_abs(id.adjoint() * f - id.adjoint()));
    }
    return worst;
}

/// Worst anti-Hermitian part of F(rho) for random Hermitian rho.
inline double check_hermiticity(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    double worst = 0.0;
    for (double kappa : {0.005, 0.05}) {
        ModelParams p;
        p.kappa = kappa;
        const auto f = full_map(p, detail::random_pulse(rng, 80, kDefaultSliceDuration, 2.0)).final;
        for (int k = 0; k < 10; ++k) {
            Operator a(4, 4);
            for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cplx{d(rng), d(rng)};
            const Operator h = 0.5 * (a + a.adjoint());
            worst = std::max(worst, hermiticity_defect(unvec(f * vec(h))));
        }
    }
    return worst;
}

/// max |F† F - 1| of closed-system maps.
inline double check_unitarity(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelParams p;
    p.kappa = 0.0;
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        const auto f = full_map(p, detail::random_pulse(rng, 120, kDefaultSliceDuration, 3.0)).final;
        worst = std::max(worst, max_abs(f.adjoint() * f - identity(16)));
    }
    return worst;
}

/// Worst max-relative error of the exact gradient against central
/// differences (step 1e-6) over 20 random pulses and kappa in {0, 0.005, 0.05}.
inline double check_gradient(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    const std::array<double, 3> kappas{0.0, 0.005, 0.05};
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p;
        p.kappa = kappas[static_cast<std::size_t>(trial % 3)];
        const ControlPulse pulse = detail::random_pulse(rng, 24, kDefaultSliceDuration, 2.0);
        GrapeObjective obj(p, target_superop("Z"), PenaltyParams{2.0, 0.02, trial % 2 == 1}, pulse.dt);
        const auto g = obj.gradient(pulse.amplitudes, GradientMode::exact_directional);
        std::vector<double> x = pulse.amplitudes;
        double diff = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double keep = x[j];
            x[j] = keep + 1e-6;
            const double up = obj.evaluate(x).penalized;
            x[j] = keep - 1e-6;
            const double down = obj.evaluate(x).penalized;
            x[j] = keep;
            const double fd = (up - down) / 2e-6;
            diff = std::max(diff, std::abs(g[j] - fd));
            scale = std::max(scale, std::abs(fd));
        }
        worst = std::max(worst, diff / scale);
    }
    return worst;
}

/// Fitted TLF relaxation rate of <tau_z> (decoupled qubit, kappa = 0.005,
/// E1 = 0) divided by gamma = 2 kappa E2 coth(E2/T).
inline double check_thermalization_ratio() {
    ModelParams p;
    p.lambda = 0.0;
    Operator excited = Operator::Zero(2, 2);
    excited(0, 0) = 1.0;
    const Operator rho0 = kron(0.5 * identity(2), excited);
    const double eq = std::tanh(-p.e2 / p.temperature);
    const double gamma = rtn_gamma(p);
    // window of about one e-fold of the faster of the candidate rates
    const double t_end = 1.0 / gamma;
    const auto samples = evolve_state(p, ControlPulse::zeros(t_end, t_end / 200.0), rho0, 1);
    const Operator tz = pauli(Axis::z, Subsystem::tlf);
    std::vector<double> t, y;
    for (const auto& s : samples) {
        const double z = (tz * s.rho).trace().real();
        const double r = (z - eq) / (1.0 - eq);
        if (r < 1e-6) break;
        t.push_back(s.t);
        y.push_back(std::log(r));
    }
    const FitResult fit = fit_curve(t, y, FitModel::linear);
    return -fit.c1 / gamma;
}

/// Log-log slope of ||F(dt) - F(dt_ref)|| against dt for a smooth control.
inline double check_refinement_slope() {
    ModelParams p;
    p.kappa = 0.05;
    const double t_g = 2.0;
    auto final_map = [&](int n) {
        ControlPulse pulse = ControlPulse::zeros(t_g, t_g / n);
        for (std::size_t j = 0; j < pulse.slices(); ++j) {
            const double t = pulse.slice_midpoint(j);
            pulse.amplitudes[j] = 0.8 * std::sin(1.3 * t) + 0.3 * std::cos(3.1 * t);
        }
        return full_map(p, pulse).final;
    };
    const SuperOp reference = final_map(2560);
    std::vector<double> x, y;
    for (int n : {20, 40, 80, 160}) {
        x.push_back(std::log(t_g / n));
        y.push_back(std::log(max_abs(final_map(n) - reference)));
    }
    return fit_curve(x, y, FitModel::linear, -std::numeric_limits<double>::infinity()).c1;
}

inline std::vector<InvariantCheck> run_invariant_suite(std::uint64_t seed = 0) {
    return {
        {"trace_preservation", check_trace_preservation(derive_seed(seed, 0)), 0.0, 1e-10},
        {"hermiticity_preservation", check_hermiticity(derive_seed(seed, 1)), 0.0, 1e-10},
        {"closed_system_unitarity", check_unitarity(derive_seed(seed, 2)), 0.0, 1e-10},
        {"gradient_vs_finite_difference", check_gradient(derive_seed(seed, 3)), 0.0, 1e-5},
        {"tlf_thermalization_rate_over_gamma", check_thermalization_ratio(), 0.9, 1.1},
        {"dt_refinement_slope", check_refinement_slope(), 1.7, 2.3},
    };
}

}  // namespace tlfgrape
