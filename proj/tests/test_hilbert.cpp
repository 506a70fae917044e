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

#include "tlfgrape/hilbert.hpp"
#include "tlfgrape/redfield.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <vector>

namespace tlfgrape {
namespace {

using testing::random_density;
using testing::random_hermitian;
using testing::random_matrix;
using testing::random_unitary;

// Characteristic polynomial coefficients by Faddeev-LeVerrier, then roots by
// Durand-Kerner iteration. Independent of any eigensolver.
std::vector<cplx> charpoly_roots(const Operator& a) {
    const auto n = a.rows();
    std::vector<cplx> c(static_cast<std::size_t>(n) + 1);  // monic, c[0] = 1
    c[0] = 1.0;
    Operator m = Operator::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[static_cast<std::size_t>(k - 1)] * identity(n);
        c[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
    }
    auto poly = [&](cplx z) {
        cplx v = 0.0;
        for (const cplx& coef : c) v = v * z + coef;
        return v;
    };
    std::vector<cplx> roots(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = std::pow(cplx{0.4, 0.9}, static_cast<double>(i));
    for (int it = 0; it < 500; ++it) {
        for (std::size_t i = 0; i < roots.size(); ++i) {
            cplx denom = 1.0;
            for (std::size_t j = 0; j < roots.size(); ++j)
                if (j != i) denom *= roots[i] - roots[j];
            roots[i] -= poly(roots[i]) / denom;
        }
    }
    return roots;
}

TEST(Pauli, AlgebraAndTensorLayout) {
    for (auto sub : {Subsystem::qubit, Subsystem::tlf}) {
        for (auto axis : {Axis::x, Axis::y, Axis::z}) {
            const Operator p = pauli(axis, sub);
            EXPECT_LE(max_abs(p * p - identity(4)), 1e-15);
            EXPECT_TRUE(is_hermitian(p));
            EXPECT_TRUE(is_unitary(p));
            EXPECT_LE(std::abs(p.trace()), 1e-15);
        }
    }
    EXPECT_LE(std::abs((pauli(Axis::x, Subsystem::qubit) * pauli(Axis::z, Subsystem::qubit)).trace()), 1e-15);
    Operator expected = Operator::Zero(4, 4);
    expected.diagonal() << 1.0, -1.0, -1.0, 1.0;
    EXPECT_LE(max_abs(pauli(Axis::z, Subsystem::qubit) * pauli(Axis::z, Subsystem::tlf) - expected), 0.0);
}

TEST(Pauli, LadderOperators) {
    const Operator tp = ladder_tlf(Ladder::raise);
    const Operator tm = ladder_tlf(Ladder::lower);
    EXPECT_LE(max_abs(tp * tp), 0.0);
    EXPECT_LE(max_abs(tp * tm - tm * tp - pauli(Axis::z, Subsystem::tlf)), 1e-15);
    const Operator tx = pauli(Axis::x, Subsystem::tlf);
    const Operator ty = pauli(Axis::y, Subsystem::tlf);
    EXPECT_LE(max_abs(tp - 0.5 * (tx + kI * ty)), 1e-15);

    // tau^+ |ground><ground| = |excited><ground| on the TLF factor
    Operator ground = Operator::Zero(2, 2);
    ground(1, 1) = 1.0;
    Operator raised = Operator::Zero(2, 2);
    raised(0, 1) = 1.0;
    const Operator rho = kron(identity(2), ground);
    EXPECT_LE(max_abs(unvec(left_mult(tp) * vec(rho)) - kron(identity(2), raised)), 0.0);
}

TEST(EigHermitian, SimpleSpectra) {
    const auto z = eig_hermitian(pauli2(Axis::z));
    EXPECT_NEAR(z.values(0), -1.0, 1e-15);
    EXPECT_NEAR(z.values(1), 1.0, 1e-15);
    EXPECT_LE(std::abs(std::abs(z.vectors(1, 0)) - 1.0), 1e-15);
    EXPECT_LE(std::abs(std::abs(z.vectors(0, 1)) - 1.0), 1e-15);

    const auto x = eig_hermitian(pauli2(Axis::x));
    EXPECT_NEAR(x.values(0), -1.0, 1e-14);
    EXPECT_NEAR(x.values(1), 1.0, 1e-14);
}

TEST(EigHermitian, MatchesCharacteristicPolynomialRoots) {
    const ModelParams p;
    const Operator h = hamiltonian(p, 0.0);
    const auto eig = eig_hermitian(h);
    auto roots = charpoly_roots(h);
    std::vector<double> re;
    for (const auto& r : roots) {
        EXPECT_LE(std::abs(r.imag()), 1e-10);
        re.push_back(r.real());
    }
    std::sort(re.begin(), re.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(eig.values(i), re[static_cast<std::size_t>(i)], 1e-10);
}

TEST(EigHermitian, ReconstructionAndPhaseConvention) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Operator h = random_hermitian(rng, 4);
        const auto eig = eig_hermitian(h);
        const Operator recon = eig.vectors * eig.values.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
        EXPECT_LE(max_abs(recon - h), 1e-10);
        EXPECT_TRUE(is_unitary(eig.vectors, 1e-12));
        for (int i = 0; i + 1 < 4; ++i) EXPECT_LE(eig.values(i), eig.values(i + 1));
        for (Eigen::Index c = 0; c < 4; ++c) {
            Eigen::Index k;
            eig.vectors.col(c).cwiseAbs().maxCoeff(&k);
            EXPECT_EQ(eig.vectors(k, c).imag(), 0.0);
            EXPECT_GT(eig.vectors(k, c).real(), 0.0);
        }
    }
}

TEST(EigHermitian, RejectsNonHermitian) {
    Operator a = Operator::Zero(2, 2);
    a(0, 1) = 1.0;
    EXPECT_THROW(eig_hermitian(a), std::invalid_argument);
}

TEST(Vectorization, ColumnStackingAndRoundTrip) {
    Vector expected(4);
    expected << 1.0, 0.0, 0.0, 1.0;
    EXPECT_LE(max_abs(vec(identity(2)) - expected), 0.0);

    Operator m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    Vector cols(4);
    cols << 1.0, 3.0, 2.0, 4.0;
    EXPECT_LE(max_abs(vec(m) - cols), 0.0);

    std::mt19937_64 rng(3);
    const Operator rho = random_matrix(rng, 4);
    EXPECT_EQ(unvec(vec(rho)), rho);
    EXPECT_THROW(unvec(Vector::Zero(5)), std::invalid_argument);
}

TEST(Vectorization, SandwichIdentity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Operator a = random_matrix(rng, 4);
        const Operator b = random_matrix(rng, 4);
        const Operator rho = random_matrix(rng, 4);
        const Vector lhs = vec(a * rho * b);
        EXPECT_LE(max_abs(lhs - kron(b.transpose(), a) * vec(rho)), 1e-12 * (1.0 + max_abs(lhs)));
        EXPECT_LE(max_abs(lhs - left_mult(a) * right_mult(b) * vec(rho)), 1e-12 * (1.0 + max_abs(lhs)));
    }
}

TEST(CommutatorSuperop, ActionAndSpectrum) {
    EXPECT_LE(max_abs(commutator_superop(identity(4))), 0.0);

    std::mt19937_64 rng(7);
    const Operator h = random_hermitian(rng, 4);
    const Operator rho = random_density(rng, 4);
    EXPECT_LE(max_abs(unvec(commutator_superop(h) * vec(rho)) - (h * rho - rho * h)), 1e-12);

    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(commutator_superop(pauli2(Axis::z)));
    std::vector<double> ev;
    for (const auto& v : solver.eigenvalues()) ev.push_back(v.real());
    std::sort(ev.begin(), ev.end());
    EXPECT_NEAR(ev[0], -2.0, 1e-14);
    EXPECT_NEAR(ev[1], 0.0, 1e-14);
    EXPECT_NEAR(ev[2], 0.0, 1e-14);
    EXPECT_NEAR(ev[3], 2.0, 1e-14);
}

TEST(ConjugationSuperop, Properties) {
    EXPECT_LE(max_abs(conjugation_superop(identity(2)) - identity(4)), 0.0);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 10; ++trial) {
        const Operator u = random_unitary(rng, 4);
        const Operator v = random_unitary(rng, 4);
        const Operator phased = std::exp(kI * angle(rng)) * u;
        EXPECT_LE(max_abs(conjugation_superop(phased) - conjugation_superop(u)), 1e-12);
        EXPECT_LE(max_abs(conjugation_superop(u) * conjugation_superop(v) - conjugation_superop(u * v)), 1e-10);
        EXPECT_TRUE(is_unitary(conjugation_superop(u), 1e-10));
        const Operator rho = random_density(rng, 4);
        EXPECT_LE(max_abs(unvec(conjugation_superop(u) * vec(rho)) - u * rho * u.adjoint()), 1e-12);
    }

    Operator zero = Operator::Zero(2, 2);
    zero(0, 0) = 1.0;
    Operator one = Operator::Zero(2, 2);
    one(1, 1) = 1.0;
    EXPECT_LE(max_abs(unvec(conjugation_superop(pauli2(Axis::x)) * vec(zero)) - one), 0.0);

    EXPECT_THROW(conjugation_superop(2.0 * identity(2)), std::invalid_argument);
}

TEST(PartialTrace, ProductAndCorrelatedStates) {
    std::mt19937_64 rng(17);
    const Operator q = random_density(rng, 2);
    const Operator t = random_density(rng, 2);
    EXPECT_LE(max_abs(partial_trace_tlf(kron(q, t)) - q), 1e-14);

    // (|0,+><0,+| + |1,-><1,-|)/2 with |±> the TLF tau_x eigenstates
    Vector plus(2), minus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    Vector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    const Vector a = Eigen::kroneckerProduct(e0, plus);
    const Vector b = Eigen::kroneckerProduct(e1, minus);
    const Operator rho = 0.5 * (a * a.adjoint() + b * b.adjoint());
    EXPECT_LE(max_abs(partial_trace_tlf(rho) - 0.5 * identity(2)), 1e-15);

    for (int trial = 0; trial < 10; ++trial) {
        const Operator r = random_matrix(rng, 4);
        EXPECT_NEAR(std::abs(partial_trace_tlf(r).trace() - r.trace()), 0.0, 1e-13);
    }
    EXPECT_THROW(partial_trace_tlf(identity(2)), std::invalid_argument);
}

TEST(EmbedReduce, MapsAgreeWithDirectOperations) {
    const double p = 0.3;
    Operator tlf = Operator::Zero(2, 2);
    tlf(0, 0) = p;
    tlf(1, 1) = 1.0 - p;
    const auto er = embed_and_reduce(tlf);
    EXPECT_LE(max_abs(er.reduce * er.embed - identity(4)), 0.0);

    Operator zero = Operator::Zero(2, 2);
    zero(0, 0) = 1.0;
    Operator expected = Operator::Zero(4, 4);
    expected(0, 0) = p;
    expected(1, 1) = 1.0 - p;
    EXPECT_LE(max_abs(unvec(er.embed * vec(zero)) - expected), 1e-16);
    EXPECT_LE(max_abs(unvec(er.reduce * vec(identity(4) / 4.0)) - identity(2) / 2.0), 1e-16);

    std::mt19937_64 rng(19);
    const Operator full = random_matrix(rng, 4);
    EXPECT_LE(max_abs(unvec(er.reduce * vec(full)) - partial_trace_tlf(full)), 1e-14);
    const Operator q = random_density(rng, 2);
    EXPECT_LE(max_abs(partial_trace_tlf(unvec(er.embed * vec(q))) - q), 1e-15);
}

TEST(Entropy, KnownValues) {
    Operator pure = Operator::Zero(2, 2);
    pure(0, 0) = 1.0;
    EXPECT_NEAR(entropy(pure), 0.0, 1e-15);
    EXPECT_NEAR(entropy(identity(2) / 2.0), std::log(2.0), 1e-14);

    Operator thermal = Operator::Zero(2, 2);
    thermal(0, 0) = 0.26894;
    thermal(1, 1) = 0.73106;
    EXPECT_NEAR(entropy(thermal), 0.5823, 1e-4);
    EXPECT_THROW(entropy(identity(2)), std::invalid_argument);
}

TEST(Bloch, Components) {
    Operator zero = Operator::Zero(2, 2);
    zero(0, 0) = 1.0;
    auto b = bloch_vector(zero);
    EXPECT_DOUBLE_EQ(b[0], 0.0);
    EXPECT_DOUBLE_EQ(b[1], 0.0);
    EXPECT_DOUBLE_EQ(b[2], 1.0);

    const Operator plus = 0.5 * (identity(2) + pauli2(Axis::x));
    b = bloch_vector(plus);
    EXPECT_NEAR(b[0], 1.0, 1e-15);

    const Operator y = 0.5 * identity(2) + 0.3 * pauli2(Axis::y);
    b = bloch_vector(y);
    EXPECT_NEAR(b[0], 0.0, 1e-15);
    EXPECT_NEAR(b[1], 0.6, 1e-15);
    EXPECT_NEAR(b[2], 0.0, 1e-15);

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        b = bloch_vector(random_density(rng, 2));
        EXPECT_LE(std::hypot(b[0], b[1], b[2]), 1.0 + 1e-10);
    }
}

}  // namespace
}  // namespace tlfgrape
