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

#include "tlfgrape/expm.hpp"
#include "tlfgrape/hilbert.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <numbers>
#include <random>

namespace tlfgrape {
namespace {

using testing::random_hermitian;
using testing::random_matrix;

double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return max_abs(a - b) / std::max(1.0, max_abs(b)); }

TEST(Expm, ClosedForms) {
    EXPECT_LE(max_abs(expm(Operator::Zero(4, 4)) - identity(4)), 0.0);

    const Operator rot = expm(Operator(-kI * (std::numbers::pi / 2) * pauli2(Axis::x)));
    EXPECT_LE(max_abs(rot - Operator(-kI * pauli2(Axis::x))), 1e-14);

    Operator d = Operator::Zero(2, 2);
    d(0, 0) = cplx{0.7, -1.2};
    d(1, 1) = cplx{-3.0, 0.4};
    const Operator e = expm(d);
    EXPECT_LE(std::abs(e(0, 0) - std::exp(d(0, 0))), 1e-14);
    EXPECT_LE(std::abs(e(1, 1) - std::exp(d(1, 1))), 1e-14);
    EXPECT_EQ(e(0, 1), cplx{0.0});
}

TEST(Expm, AgreesWithReferenceAcrossNormScales) {
    std::mt19937_64 rng(29);
    for (double scale : {1e-4, 1e-2, 0.2, 0.7, 1.5, 4.0, 30.0, 300.0}) {
        for (int n : {2, 4, 8, 16}) {
            const Operator a = scale * random_matrix(rng, n) / std::sqrt(static_cast<double>(n));
            const Operator ref = a.exp();
            EXPECT_LE(rel_diff(expm(a), ref), 1e-11) << "scale " << scale << " n " << n;
        }
    }
}

TEST(Expm, FixedSizeBlocks) {
    std::mt19937_64 rng(31);
    const Operator a = random_matrix(rng, 8);
    const Eigen::Matrix<cplx, 8, 8> fixed = a;
    const Eigen::Matrix<cplx, 8, 8> e = expm(fixed);
    EXPECT_LE(rel_diff(e, expm(a)), 1e-14);
}

TEST(Expm, AntiHermitianGivesUnitary) {
    std::mt19937_64 rng(37);
    for (double t : {0.01, 1.0, 25.0}) {
        const Operator u = expm(Operator(-kI * t * random_hermitian(rng, 4)));
        EXPECT_LE(max_abs(u.adjoint() * u - identity(4)), 1e-11);
    }
}

TEST(Expm, RejectsBadInput) {
    EXPECT_THROW(expm(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
    Operator nan = Operator::Zero(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(expm(nan), std::invalid_argument);
}

// The Frechet derivative is the upper-right block of exp([[A, E], [0, A]]).
TEST(ExpmFrechet, MatchesBlockAugmentedExponential) {
    std::mt19937_64 rng(41);
    for (double scale : {1e-3, 0.1, 0.9, 2.0, 8.0, 60.0}) {
        for (int n : {4, 8, 16}) {
            const Operator a = scale * random_matrix(rng, n) / std::sqrt(static_cast<double>(n));
            const Operator e = random_matrix(rng, n);
            Operator big = Operator::Zero(2 * n, 2 * n);
            big.topLeftCorner(n, n) = a;
            big.bottomRightCorner(n, n) = a;
            big.topRightCorner(n, n) = e;
            const Operator ref = big.exp();
            auto [value, frechet] = expm_frechet(a, e);
            EXPECT_LE(rel_diff(value, ref.topLeftCorner(n, n)), 1e-11) << scale;
            EXPECT_LE(max_abs(frechet - ref.topRightCorner(n, n)) / std::max(1.0, max_abs(ref.topRightCorner(n, n))), 1e-10)
                << "scale " << scale << " n " << n;
        }
    }
}

TEST(ExpmFrechet, CommutingDirection) {
    // For E = A the derivative is A e^A.
    std::mt19937_64 rng(43);
    const Operator a = random_matrix(rng, 4);
    auto [value, frechet] = expm_frechet(a, a);
    EXPECT_LE(rel_diff(frechet, a * value), 1e-12);
}

}  // namespace
}  // namespace tlfgrape
