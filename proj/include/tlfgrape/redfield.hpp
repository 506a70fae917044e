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

// redfield.hpp: Bloch-Redfield generator for a qubit coupled to a damped TLF
//
//   H_S = E1 sigma_z + Delta sigma_x + E2 tau_z + Lambda sigma_z tau_z
//
// The fluctuator couples to an Ohmic bath through tau^+ b + tau^- b†. The
// bath is eliminated analytically; it enters only through
// G_s(w) = J(w) (n(w) + s), J(w) = kappa w for 0 < w <= omega_c.
//
// With bath correlation functions
//   C_1(t) = ∫ dw G_1(w) e^{-iwt},   C_0(t) = ∫ dw G_0(w) e^{+iwt},
// the dissipative part of the master equation reads
//
//   rho' = [tau^+, S1m rho] + [tau^-, S0p rho] - [tau^-, rho S1p] - [tau^+, rho S0m]
//
// with rate tensors, in the eigenbasis of H_S (w_ab = e_a - e_b),
//
//   S_s^-[ab] = -tau^-_ab W_s(-w_ab),   S_s^+[ab] = -tau^+_ab conj(W_s(w_ab)),
//   W_s(x)    = pi G_s(x) - i P∫_0^wc dw G_s(w)/(w - x).
//
// The bare TLF flip rate is then 2 pi J(2E2)(2n+1) = 2 pi gamma, where
// gamma = 2 kappa E2 coth(E2/T) is the conventional RTN parameter.

#pragma once

#include "tlfgrape/hilbert.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace tlfgrape {

/// Physical constants in units hbar = k_B = 1, with Delta setting the scale.
struct ModelParams {
    double delta = 1.0;
    double e2 = 0.1;
    double lambda = 0.1;
    double kappa = 0.005;
    double temperature = 0.2;
    double omega_c = 100.0;
    bool lamb_shift = false;

    void validate() const {
        if (!(delta > 0)) throw std::invalid_argument("ModelParams: delta must be positive");
        if (!(e2 > 0)) throw std::invalid_argument("ModelParams: e2 must be positive");
        if (!(kappa >= 0)) throw std::invalid_argument("ModelParams: kappa must be non-negative");
        if (!(temperature > 0)) throw std::invalid_argument("ModelParams: temperature must be positive");
        if (!std::isfinite(lambda)) throw std::invalid_argument("ModelParams: lambda must be finite");
        const double scale = std::max({delta, e2, std::abs(lambda), temperature});
        if (!(omega_c >= 10.0 * scale))
            throw std::invalid_argument("ModelParams: omega_c must be at least 10x every other energy scale");
    }

    /// Redfield treatment assumes T > kappa E2; callers warn, not fail.
    bool motional_narrowing_regime() const { return temperature > kappa * e2; }
};

inline Operator hamiltonian(const ModelParams& p, double e1) {
    return e1 * pauli(Axis::z, Subsystem::qubit) + p.delta * pauli(Axis::x, Subsystem::qubit) +
           p.e2 * pauli(Axis::z, Subsystem::tlf) +
           p.lambda * pauli(Axis::z, Subsystem::qubit) * pauli(Axis::z, Subsystem::tlf);
}

/// dH/dE1.
inline Operator control_operator() { return pauli(Axis::z, Subsystem::qubit); }

inline double spectral_density(double omega, const ModelParams& p) {
    return (omega > 0.0 && omega <= p.omega_c) ? p.kappa * omega : 0.0;
}

inline double bose(double omega, double temperature) { return 1.0 / std::expm1(omega / temperature); }

inline constexpr double kDegenerateBohr = 1e-9;

/// G_s(w) = J(w)(n(w) + s); continuous limit kappa*T at w -> 0+.
inline double bath_weight(double omega, int s, const ModelParams& p) {
    if (std::abs(omega) < kDegenerateBohr) return p.kappa * p.temperature;
    if (omega <= 0.0 || omega > p.omega_c) return 0.0;
    return spectral_density(omega, p) * (bose(omega, p.temperature) + s);
}

/// P∫_0^wc dw G_s(w)/(w - x).
inline double lamb_integral(double x, int s, const ModelParams& p) {
    using boost::math::quadrature::gauss_kronrod;
    if (p.kappa == 0.0 || std::abs(x) < kDegenerateBohr) return 0.0;
    const double wc = p.omega_c;
    auto g = [&](double w) { return bath_weight(w, s, p); };
    double value = 0.0;
    if (x < 0.0 || x >= wc) {
        value = gauss_kronrod<double, 31>::integrate([&](double w) { return g(w) / (w - x); }, 0.0, wc, 15, 1e-10);
    } else {
        const double gx = g(x);
        auto subtracted = [&](double w) {
            const double d = w - x;
            if (std::abs(d) < 1e-10) return 0.0;
            return (g(w) - gx) / d;
        };
        value = gauss_kronrod<double, 31>::integrate(subtracted, 0.0, x, 15, 1e-10) +
                gauss_kronrod<double, 31>::integrate(subtracted, x, wc, 15, 1e-10) + gx * std::log((wc - x) / x);
    }
    return value;
}

inline cplx half_fourier_weight(double x, int s, const ModelParams& p) {
    const double dissipative = std::numbers::pi * bath_weight(x, s, p);
    const double shift = p.lamb_shift ? lamb_integral(x, s, p) : 0.0;
    return {dissipative, -shift};
}

enum class TensorSign { plus, minus };

/// Rate tensor Sigma_s^± given the eigendecomposition of H_S.
inline Operator sigma_tensor_in_basis(const ModelParams& p, const HermitianEigen& eig, int s, TensorSign sign) {
    if (s != 0 && s != 1) throw std::invalid_argument("sigma_tensor: s must be 0 or 1");
    const Operator& v = eig.vectors;
    const Operator tau = v.adjoint() * ladder_tlf(sign == TensorSign::plus ? Ladder::raise : Ladder::lower) * v;
    Operator weighted = Operator::Zero(4, 4);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            if (tau(a, b) == cplx{0.0}) continue;
            const double w_ab = eig.values(a) - eig.values(b);
            const cplx w = sign == TensorSign::minus ? half_fourier_weight(-w_ab, s, p)
                                                     : std::conj(half_fourier_weight(w_ab, s, p));
            weighted(a, b) = -tau(a, b) * w;
        }
    }
    return v * weighted * v.adjoint();
}

/// Rate tensor Sigma_s^± at control value e1 (s = 0 absorbs, s = 1 emits).
inline Operator sigma_tensor(const ModelParams& p, double e1, int s, TensorSign sign) {
    return sigma_tensor_in_basis(p, eig_hermitian(hamiltonian(p, e1)), s, sign);
}

struct RateTensors {
    Operator s1_minus, s1_plus, s0_plus, s0_minus;
};

inline RateTensors rate_tensors(const ModelParams& p, double e1) {
    const auto eig = eig_hermitian(hamiltonian(p, e1));
    RateTensors r;
    r.s1_minus = sigma_tensor_in_basis(p, eig, 1, TensorSign::minus);
    r.s0_plus = sigma_tensor_in_basis(p, eig, 0, TensorSign::plus);
    r.s1_plus = r.s1_minus.adjoint();
    r.s0_minus = r.s0_plus.adjoint();
    return r;
}

/// The dissipator D(rho) as an explicit function, used by tests as an oracle.
inline Operator apply_dissipator(const RateTensors& r, const Operator& rho) {
    const Operator tp = ladder_tlf(Ladder::raise);
    const Operator tm = ladder_tlf(Ladder::lower);
    auto comm = [](const Operator& a, const Operator& b) -> Operator { return a * b - b * a; };
    return comm(tp, r.s1_minus * rho) + comm(tm, r.s0_plus * rho) - comm(tm, rho * r.s1_plus) -
           comm(tp, rho * r.s0_minus);
}

/// Gamma with rho' = -i[H, rho] - Gamma rho.
inline SuperOp relaxation_superop(const ModelParams& p, double e1) {
    if (p.kappa == 0.0) return SuperOp::Zero(16, 16);
    const RateTensors r = rate_tensors(p, e1);
    const Operator tp = ladder_tlf(Ladder::raise);
    const Operator tm = ladder_tlf(Ladder::lower);
    // [A, S rho] -> 1⊗(A S) - A^T⊗S;  [A, rho S] -> S^T⊗A - (S A)^T⊗1
    const Operator id = identity(4);
    const SuperOp dissipator = kron(id, tp * r.s1_minus) - kron(tp.transpose(), r.s1_minus) +
                               kron(id, tm * r.s0_plus) - kron(tm.transpose(), r.s0_plus) -
                               (kron(r.s1_plus.transpose(), tm) - kron((r.s1_plus * tm).transpose(), id)) -
                               (kron(r.s0_minus.transpose(), tp) - kron((r.s0_minus * tp).transpose(), id));
    return -dissipator;
}

/// L(e1) = -(i [H(e1), .] + Gamma(e1)).
inline SuperOp generator(const ModelParams& p, double e1) {
    return -(kI * commutator_superop(hamiltonian(p, e1)) + relaxation_superop(p, e1));
}

/// Generator pieces shared by propagation and the gradient. Memoizes Gamma
/// and dGamma/dE1 per distinct control value; one instance per worker.
class GeneratorCache {
public:
    static constexpr double kFiniteDifferenceStep = 1e-5;

    explicit GeneratorCache(ModelParams params, std::size_t capacity = 4096)
        : params_(std::move(params)), capacity_(capacity),
          drift_commutator_(commutator_superop(hamiltonian(params_, 0.0))),
          control_commutator_(commutator_superop(control_operator())) {}

    const ModelParams& params() const { return params_; }

    const SuperOp& relaxation(double e1) { return entry(e1).relaxation; }

    /// Central finite difference of Gamma with step 1e-5 Delta.
    const SuperOp& relaxation_derivative(double e1) {
        Entry& e = entry(e1);
        if (!e.has_derivative) {
            if (params_.kappa == 0.0) {
                e.derivative = SuperOp::Zero(16, 16);
            } else {
                const double h = kFiniteDifferenceStep;
                e.derivative = (relaxation_superop(params_, e1 + h) - relaxation_superop(params_, e1 - h)) / (2 * h);
            }
            e.has_derivative = true;
        }
        return e.derivative;
    }

    SuperOp generator(double e1) {
        return -(kI * (drift_commutator_ + e1 * control_commutator_) + relaxation(e1));
    }

    SuperOp generator_derivative(double e1) {
        return -(kI * control_commutator_ + relaxation_derivative(e1));
    }

    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        SuperOp relaxation;
        SuperOp derivative;
        bool has_derivative = false;
    };

    Entry& entry(double e1) {
        auto it = entries_.find(e1);
        if (it != entries_.end()) return it->second;
        if (entries_.size() >= capacity_) entries_.clear();
        Entry e;
        e.relaxation = relaxation_superop(params_, e1);
        return entries_.emplace(e1, std::move(e)).first->second;
    }

    ModelParams params_;
    std::size_t capacity_;
    SuperOp drift_commutator_;
    SuperOp control_commutator_;
    std::map<double, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Random-telegraph-noise analytics (Lambda -> 0 limit)

/// TLF flip rate gamma = 2 kappa E2 coth(E2/T).
inline double rtn_gamma(const ModelParams& p) {
    if (p.kappa == 0.0) return 0.0;
    return 2.0 * p.kappa * p.e2 / std::tanh(p.e2 / p.temperature);
}

inline double kappa_for_gamma(double gamma_target, const ModelParams& p) {
    if (!(gamma_target > 0)) throw std::invalid_argument("kappa_for_gamma: target rate must be positive");
    return gamma_target * std::tanh(p.e2 / p.temperature) / (2.0 * p.e2);
}

/// S(w) = Lambda^2 gamma / (w^2 + gamma^2).
inline double rtn_spectrum(double omega, const ModelParams& p) {
    const double g = rtn_gamma(p);
    if (g == 0.0) return omega == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return p.lambda * p.lambda * g / (omega * omega + g * g);
}

struct RelaxationRates {
    double t1_rate;
    double t2_rate;
};

inline RelaxationRates t1_t2_rates(const ModelParams& p, double e1) {
    const double e_sq = p.delta * p.delta + e1 * e1;
    const double energy = std::sqrt(e_sq);
    const double t1 = p.delta * p.delta / e_sq * rtn_spectrum(2.0 * energy, p);
    const double t2 = 0.5 * t1 + e1 * e1 / e_sq * rtn_spectrum(0.0, p);
    return {t1, t2};
}

}  // namespace tlfgrape
