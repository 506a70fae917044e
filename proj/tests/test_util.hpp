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

// Shared random generators for the unit tests.

#pragma once

#include "tlfgrape/hilbert.hpp"

#include <random>

namespace tlfgrape::testing {

inline Operator random_matrix(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> d;
    Operator m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx{d(rng), d(rng)};
    return m;
}

inline Operator random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const Operator a = random_matrix(rng, n);
    return 0.5 * (a + a.adjoint());
}

inline Operator random_density(std::mt19937_64& rng, Eigen::Index n) {
    const Operator a = random_matrix(rng, n);
    const Operator rho = a * a.adjoint();
    return rho / rho.trace().real();
}

inline Operator random_unitary(std::mt19937_64& rng, Eigen::Index n) {
    const Eigen::HouseholderQR<Operator> qr(random_matrix(rng, n));
    return qr.householderQ();
}

}  // namespace tlfgrape::testing
