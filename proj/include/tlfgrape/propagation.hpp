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

// propagation.hpp: piecewise-constant propagation of the quantum map

#pragma once

#include "tlfgrape/hilbert.hpp"
#include "tlfgrape/redfield.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace tlfgrape {

inline constexpr double kDefaultSliceDuration = 0.025;
inline constexpr double kDefaultAmplitudeCap = 10.0;

/// Piecewise-constant control E1(t): amplitudes[j] holds on [j dt, (j+1) dt).
struct ControlPulse {
    std::vector<double> amplitudes;
    double dt = kDefaultSliceDuration;

    std::size_t slices() const { return amplitudes.size(); }
    double gate_time() const { return static_cast<double>(amplitudes.size()) * dt; }
    double slice_midpoint(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dt; }

    void validate(double amplitude_cap = kDefaultAmplitudeCap) const {
        if (amplitudes.empty()) throw std::invalid_argument("ControlPulse: at least one slice required");
        if (!(dt > 0)) throw std::invalid_argument("ControlPulse: slice duration must be positive");
        for (double a : amplitudes)
            if (!std::isfinite(a) || std::abs(a) > amplitude_cap * (1 + 1e-12))
                throw std::invalid_argument("ControlPulse: amplitude exceeds cap");
    }

    /// Zero pulse over t_g with N = ceil(t_g / dt_target) slices and dt = t_g / N.
    static ControlPulse zeros(double t_g, double dt_target = kDefaultSliceDuration) {
        if (!(t_g > 0) || !(dt_target > 0)) throw std::invalid_argument("ControlPulse: t_g and dt must be positive");
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(t_g / dt_target - 1e-9)));
        return ControlPulse{std::vector<double>(n, 0.0), t_g / static_cast<double>(n)};
    }
};

/// Thermal TLF state exp(-E2 tau_z / T)/Z, ordered (excited, ground).
inline Operator thermal_tlf_state(const ModelParams& p) {
    if (!(p.temperature > 0)) throw std::invalid_argument("thermal_tlf_state: temperature must be positive");
    const double x = 2.0 * p.e2 / p.temperature;
    Operator rho = Operator::Zero(2, 2);
    // excited population 1/(1 + e^x), written to stay finite for large x
    const double excited = x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
    rho(0, 0) = excited;
    rho(1, 1) = 1.0 - excited;
    return rho;
}

inline SuperOp slice_propagator(const ModelParams& p, double e1, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("slice_propagator: dt must be positive");
    return expm(dt * generator(p, e1));
}

struct MapTrajectory {
    std::vector<SuperOp> slice_maps;
    std::vector<SuperOp> cumulative;  // cumulative[j] = F_{j+1} ... F_1, if requested
    SuperOp final;
};

inline MapTrajectory full_map(GeneratorCache& cache, const ControlPulse& pulse, bool keep_cumulative = false) {
    pulse.validate(std::numeric_limits<double>::infinity());
    MapTrajectory traj;
    traj.slice_maps.reserve(pulse.slices());
    traj.final = SuperOp::Identity(16, 16);
    for (double a : pulse.amplitudes) {
        traj.slice_maps.push_back(expm(pulse.dt * cache.generator(a)));
        traj.final = traj.slice_maps.back() * traj.final;
        if (keep_cumulative) traj.cumulative.push_back(traj.final);
    }
    return traj;
}

inline MapTrajectory full_map(const ModelParams& p, const ControlPulse& pulse, bool keep_cumulative = false) {
    GeneratorCache cache(p);
    return full_map(cache, pulse, keep_cumulative);
}

/// F^R = P F E with the TLF embedded in its thermal state.
inline SuperOp reduced_map(const SuperOp& f, const ModelParams& p) {
    if (f.rows() != 16 || f.cols() != 16) throw std::invalid_argument("reduced_map: expected a 16x16 map");
    const auto er = embed_and_reduce(thermal_tlf_state(p));
    return er.reduce * f * er.embed;
}

struct TrajectorySample {
    double t;
    Operator rho;
    std::array<double, 3> bloch;
    double entropy_nats;
    double e1;
};

/// Samples rho(t) at samples_per_slice points inside each slice (plus t = 0).
inline std::vector<TrajectorySample> evolve_state(const ModelParams& p, const ControlPulse& pulse, const Operator& rho0,
                                                  int samples_per_slice = 1) {
    if (rho0.rows() != 4 || rho0.cols() != 4) throw std::invalid_argument("evolve_state: expected a 4x4 initial state");
    if (samples_per_slice < 1) throw std::invalid_argument("evolve_state: samples_per_slice must be >= 1");
    if (!is_hermitian(rho0, 1e-10) || std::abs(rho0.trace() - 1.0) > 1e-10)
        throw std::invalid_argument("evolve_state: initial state must be a density matrix");
    pulse.validate(std::numeric_limits<double>::infinity());

    GeneratorCache cache(p);
    std::vector<TrajectorySample> out;
    auto record = [&](double t, const Vector& v, double e1) {
        Operator rho = unvec(v);
        const Operator q = partial_trace_tlf(rho);
        out.push_back({t, rho, bloch_vector(q), entropy(q), e1});
    };

    Vector state = vec(rho0);
    record(0.0, state, pulse.amplitudes.front());
    const double sub_dt = pulse.dt / samples_per_slice;
    for (std::size_t j = 0; j < pulse.slices(); ++j) {
        const double a = pulse.amplitudes[j];
        const SuperOp step = expm(sub_dt * cache.generator(a));
        for (int k = 1; k <= samples_per_slice; ++k) {
            state = step * state;
            record(static_cast<double>(j) * pulse.dt + k * sub_dt, state, a);
        }
    }
    return out;
}

/// CSV: t, bloch_x, bloch_y, bloch_z, entropy_nats, E1.
inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples) {
    os << "t,bloch_x,bloch_y,bloch_z,entropy_nats,E1\n" << std::setprecision(17);
    for (const auto& s : samples)
        os << s.t << ',' << s.bloch[0] << ',' << s.bloch[1] << ',' << s.bloch[2] << ',' << s.entropy_nats << ','
           << s.e1 << '\n';
}

}  // namespace tlfgrape
