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

// expm.hpp: dense matrix exponential and its Frechet derivative
//
// Scaling-and-squaring with diagonal Pade approximants of degree 3/5/7/9/13.
// The Frechet variant follows Al-Mohy & Higham (2009): the derivative
// L(A, E) = d/dh exp(A + hE)|_{h=0} is carried through the same Pade
// evaluation and the same squaring chain, so it costs roughly three
// exponentials instead of one exponential of the doubled block matrix.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace tlfgrape {

namespace detail {

// Pade coefficients b_0 .. b_m.
inline constexpr std::array<double, 4> kPade3{120., 60., 12., 1.};
inline constexpr std::array<double, 6> kPade5{30240., 15120., 3360., 420., 30., 1.};
inline constexpr std::array<double, 8> kPade7{17297280., 8648640., 1995840., 277200.,
                                              25200.,    1512.,    56.,      1.};
inline constexpr std::array<double, 10> kPade9{17643225600., 8821612800., 2075673600., 302702400.,
                                               30270240.,    2162160.,    110880.,     3960.,
                                               90.,          1.};
inline constexpr std::array<double, 14> kPade13{
    64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
    129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
    1323241920.,        40840800.,          960960.,           16380.,
    182.,               1.};

// 1-norm thresholds for the exponential alone (Higham 2005) ...
inline constexpr double kThetaExp3 = 1.495585217958292e-2;
inline constexpr double kThetaExp5 = 2.539398330063230e-1;
inline constexpr double kThetaExp7 = 9.504178996162932e-1;
inline constexpr double kThetaExp9 = 2.097847961257068e0;
inline constexpr double kThetaExp13 = 5.371920351148152e0;

// ... and for the exponential together with its Frechet derivative.
inline constexpr double kThetaFrechet3 = 1.08e-2;
inline constexpr double kThetaFrechet5 = 2.00e-1;
inline constexpr double kThetaFrechet7 = 7.83e-1;
inline constexpr double kThetaFrechet9 = 1.78e0;
inline constexpr double kThetaFrechet13 = 4.74e0;

template <typename M>
double norm1(const M& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

template <typename M>
struct PadeTerms {
    M u, v, lu, lv;
};

// Low-degree approximant (m = 3, 5, 7, 9). U and V are built from even
// powers of A; the Frechet parts use M_{2k} = d(A^{2k})[E].
template <typename M, std::size_t N>
PadeTerms<M> pade_low(const M& a, const M* e, const std::array<double, N>& b) {
    constexpr int m = static_cast<int>(N) - 1;
    const auto n = a.rows();
    const M id = M::Identity(n, n);

    M a2 = a * a;
    // powers[k] = A^{2k}, dpowers[k] = d(A^{2k})
    std::array<M, 5> powers;
    std::array<M, 5> dpowers;
    powers[0] = id;
    powers[1] = a2;
    if (e) {
        dpowers[0] = M::Zero(n, n);
        dpowers[1] = a * (*e) + (*e) * a;
    }
    for (int k = 2; 2 * k <= m; ++k) {
        powers[k] = powers[k - 1] * a2;
        if (e) dpowers[k] = powers[k - 1] * dpowers[1] + dpowers[k - 1] * a2;
    }

    M odd = M::Zero(n, n);
    M even = M::Zero(n, n);
    M dodd = M::Zero(n, n);
    M deven = M::Zero(n, n);
    for (int k = 0; 2 * k <= m; ++k) {
        if (2 * k + 1 <= m) odd += b[2 * k + 1] * powers[k];
        even += b[2 * k] * powers[k];
        if (e && k > 0) {
            if (2 * k + 1 <= m) dodd += b[2 * k + 1] * dpowers[k];
            deven += b[2 * k] * dpowers[k];
        }
    }

    PadeTerms<M> t;
    t.u = a * odd;
    t.v = std::move(even);
    if (e) {
        t.lu = a * dodd + (*e) * odd;
        t.lv = std::move(deven);
    }
    return t;
}

template <typename M>
PadeTerms<M> pade13(const M& a, const M* e) {
    const auto& b = kPade13;
    const auto n = a.rows();
    const M id = M::Identity(n, n);
    const M a2 = a * a;
    const M a4 = a2 * a2;
    const M a6 = a2 * a4;

    const M w1 = b[13] * a6 + b[11] * a4 + b[9] * a2;
    const M w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    const M z1 = b[12] * a6 + b[10] * a4 + b[8] * a2;
    const M z2 = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
    const M w = a6 * w1 + w2;

    PadeTerms<M> t;
    t.u = a * w;
    t.v = a6 * z1 + z2;
    if (e) {
        const M m2 = a * (*e) + (*e) * a;
        const M m4 = a2 * m2 + m2 * a2;
        const M m6 = a4 * m2 + m4 * a2;
        const M lw1 = b[13] * m6 + b[11] * m4 + b[9] * m2;
        const M lw2 = b[7] * m6 + b[5] * m4 + b[3] * m2;
        const M lz1 = b[12] * m6 + b[10] * m4 + b[8] * m2;
        const M lz2 = b[6] * m6 + b[4] * m4 + b[2] * m2;
        const M lw = a6 * lw1 + m6 * w1 + lw2;
        t.lu = a * lw + (*e) * w;
        t.lv = a6 * lz1 + m6 * z1 + lz2;
    }
    return t;
}

template <typename M>
struct ExpmResult {
    M value;
    M frechet;  // unset unless requested
};

template <typename M>
ExpmResult<M> expm_impl(const M& input, const M* direction) {
    if (input.rows() != input.cols()) throw std::invalid_argument("expm: matrix must be square");
    if (!input.allFinite()) throw std::invalid_argument("expm: non-finite entries");
    if (direction && (direction->rows() != input.rows() || direction->cols() != input.cols()))
        throw std::invalid_argument("expm: direction shape mismatch");

    const bool frechet = direction != nullptr;
    const double norm = norm1(input);
    const double t3 = frechet ? kThetaFrechet3 : kThetaExp3;
    const double t5 = frechet ? kThetaFrechet5 : kThetaExp5;
    const double t7 = frechet ? kThetaFrechet7 : kThetaExp7;
    const double t9 = frechet ? kThetaFrechet9 : kThetaExp9;
    const double t13 = frechet ? kThetaFrechet13 : kThetaExp13;

    PadeTerms<M> terms;
    int squarings = 0;
    if (norm <= t3) {
        terms = pade_low<M>(input, direction, kPade3);
    } else if (norm <= t5) {
        terms = pade_low<M>(input, direction, kPade5);
    } else if (norm <= t7) {
        terms = pade_low<M>(input, direction, kPade7);
    } else if (norm <= t9) {
        terms = pade_low<M>(input, direction, kPade9);
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / t13))));
        const double scale = std::ldexp(1.0, -squarings);
        const M a = input * scale;
        if (frechet) {
            const M e = (*direction) * scale;
            terms = pade13(a, &e);
        } else {
            terms = pade13<M>(a, nullptr);
        }
    }

    const Eigen::PartialPivLU<M> lu(terms.v - terms.u);
    ExpmResult<M> out;
    out.value = lu.solve(terms.v + terms.u);
    if (frechet) out.frechet = lu.solve(terms.lu + terms.lv + (terms.lu - terms.lv) * out.value);

    for (int k = 0; k < squarings; ++k) {
        if (frechet) out.frechet = out.value * out.frechet + out.frechet * out.value;
        out.value = out.value * out.value;
    }
    return out;
}

}  // namespace detail

/// Matrix exponential e^A. Works for dynamic and fixed-size complex matrices.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a) {
    using M = typename Derived::PlainObject;
    const M m = a;
    return detail::expm_impl<M>(m, nullptr).value;
}

/// e^A together with the Frechet derivative of exp at A in direction E.
template <typename DerivedA, typename DerivedE>
std::pair<typename DerivedA::PlainObject, typename DerivedA::PlainObject> expm_frechet(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedE>& e) {
    using M = typename DerivedA::PlainObject;
    const M am = a;
    const M em = e;
    auto r = detail::expm_impl<M>(am, &em);
    return {std::move(r.value), std::move(r.frechet)};
}

}  // namespace tlfgrape
