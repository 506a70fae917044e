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

// hilbert.hpp: operators on qubit ⊗ TLF space, vectorization, superoperators
//
// Basis ordering is qubit ⊗ TLF: index = 2*q + t. Density matrices are
// vectorized by stacking columns, so vec(A rho B) = (B^T ⊗ A) vec(rho).
// Every superoperator in the library is written against that identity.

#pragma once

#include "tlfgrape/expm.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace tlfgrape {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Operator on the 2-dim qubit or 4-dim qubit ⊗ TLF Hilbert space.
using Operator = Eigen::MatrixXcd;
/// Linear map acting on column-stacked density matrices (4×4 or 16×16).
using SuperOp = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

enum class Axis { x, y, z };
enum class Subsystem { qubit, tlf };
enum class Ladder { raise, lower };

inline Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

inline Operator kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Operator k = Eigen::kroneckerProduct(a, b);
    return k;
}

/// 2×2 Pauli matrix.
inline Operator pauli2(Axis axis) {
    Operator m(2, 2);
    switch (axis) {
        case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
        case Axis::y: m << 0.0, -kI, kI, 0.0; break;
        case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
    }
    return m;
}

/// sigma_axis ⊗ 1 for the qubit, 1 ⊗ tau_axis for the fluctuator.
inline Operator pauli(Axis axis, Subsystem sub) {
    return sub == Subsystem::qubit ? kron(pauli2(axis), identity(2)) : kron(identity(2), pauli2(axis));
}

/// tau^± = (tau_x ± i tau_y)/2 embedded as 1 ⊗ tau^±. tau^+ maps the lower
/// TLF eigenstate (tau_z = -1, index 1) to the upper one (index 0).
inline Operator ladder_tlf(Ladder sign) {
    Operator t = Operator::Zero(2, 2);
    if (sign == Ladder::raise) {
        t(0, 1) = 1.0;
    } else {
        t(1, 0) = 1.0;
    }
    return kron(identity(2), t);
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Operator& a) { return max_abs(a - a.adjoint()); }

inline bool is_hermitian(const Operator& a, double tol = 1e-12) {
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

inline bool is_unitary(const Operator& u, double tol = 1e-10) {
    return u.rows() == u.cols() && max_abs(u.adjoint() * u - identity(u.rows())) <= tol;
}

struct HermitianEigen {
    RealVector values;  // ascending
    Operator vectors;   // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. Each eigenvector is rotated so
/// that its largest-magnitude component (first one on ties) is real positive.
inline HermitianEigen eig_hermitian(const Operator& h) {
    if (!is_hermitian(h, 1e-12)) throw std::invalid_argument("eig_hermitian: matrix is not Hermitian");
    const Eigen::SelfAdjointEigenSolver<Operator> solver(h);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: solver failed");

    HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
        auto col = out.vectors.col(c);
        const double peak = col.cwiseAbs().maxCoeff();
        Eigen::Index pivot = 0;
        while (std::abs(col(pivot)) < peak - 1e-12) ++pivot;
        const cplx phase = std::conj(col(pivot)) / std::abs(col(pivot));
        col *= phase;
        col(pivot) = std::abs(col(pivot));
    }
    return out;
}

/// Column-stacking vectorization.
inline Vector vec(const Operator& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Operator unvec(const Vector& v) {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (n * n != v.size()) throw std::invalid_argument("unvec: length " + std::to_string(v.size()) + " is not a perfect square");
    return Eigen::Map<const Operator>(v.data(), n, n);
}

/// Superoperator of rho -> A rho.
inline SuperOp left_mult(const Operator& a) { return kron(identity(a.rows()), a); }
/// Superoperator of rho -> rho B.
inline SuperOp right_mult(const Operator& b) { return kron(b.transpose(), identity(b.rows())); }

/// Superoperator of rho -> [H, rho].
inline SuperOp commutator_superop(const Operator& h) { return left_mult(h) - right_mult(h); }

/// Superoperator of rho -> U rho U†. A global phase on U drops out.
inline SuperOp conjugation_superop(const Operator& u) {
    if (!is_unitary(u, 1e-10)) throw std::invalid_argument("conjugation_superop: operator is not unitary");
    return kron(u.conjugate(), u);
}

inline Operator partial_trace_tlf(const Operator& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw std::invalid_argument("partial_trace_tlf: expected a 4x4 operator");
    Operator out = Operator::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) out(i, j) += rho(2 * i + k, 2 * j + k);
    return out;
}

/// Embedding E (16×4): vec(rho_q) -> vec(rho_q ⊗ rho_tlf), and reduction
/// P (4×16): vec(rho) -> vec(tr_TLF rho).
struct EmbedReduce {
    SuperOp embed;
    SuperOp reduce;
};

inline EmbedReduce embed_and_reduce(const Operator& rho_tlf) {
    if (rho_tlf.rows() != 2 || rho_tlf.cols() != 2) throw std::invalid_argument("embed_and_reduce: expected a 2x2 TLF state");
    if (!is_hermitian(rho_tlf, 1e-12) || std::abs(rho_tlf.trace() - 1.0) > 1e-12)
        throw std::invalid_argument("embed_and_reduce: TLF state must be Hermitian with unit trace");

    EmbedReduce er{SuperOp::Zero(16, 4), SuperOp::Zero(4, 16)};
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            Operator unit = Operator::Zero(2, 2);
            unit(i, j) = 1.0;
            er.embed.col(i + 2 * j) = vec(kron(unit, rho_tlf));
            for (int k = 0; k < 2; ++k) er.reduce(i + 2 * j, (2 * i + k) + 4 * (2 * j + k)) = 1.0;
        }
    }
    return er;
}

inline RealVector density_eigenvalues(const Operator& rho) {
    const Operator herm = 0.5 * (rho + rho.adjoint());
    return Eigen::SelfAdjointEigenSolver<Operator>(herm, Eigen::EigenvaluesOnly).eigenvalues();
}

/// von Neumann entropy in nats; eigenvalues below 1e-12 count as zero.
inline double entropy(const Operator& rho) {
    if (std::abs(rho.trace() - 1.0) > 1e-8) throw std::invalid_argument("entropy: trace differs from 1");
    double s = 0.0;
    for (double lambda : density_eigenvalues(rho))
        if (lambda > 1e-12) s -= lambda * std::log(lambda);
    return s;
}

inline std::array<double, 3> bloch_vector(const Operator& rho) {
    if (rho.rows() != 2 || rho.cols() != 2) throw std::invalid_argument("bloch_vector: expected a 2x2 density matrix");
    return {(pauli2(Axis::x) * rho).trace().real(), (pauli2(Axis::y) * rho).trace().real(),
            (pauli2(Axis::z) * rho).trace().real()};
}

}  // namespace tlfgrape
