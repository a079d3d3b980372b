// SPDX-License-Identifier: Apache-2.0
//
// Truncated Taylor kernels shared by the double and extended precision
// code paths. Scalar only needs the usual arithmetic, abs and exp.
#pragma once

#include "linearcredit/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>

namespace linearcredit::detail {

template <typename Scalar>
Scalar abs_of(const Scalar& v) {
    using std::abs;
    return abs(v);
}

template <typename Scalar>
Scalar exp_of(const Scalar& v) {
    using std::exp;
    return exp(v);
}

template <typename Scalar>
Scalar norm1(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
    Scalar best(0);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        Scalar col(0);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            col += abs_of(a(i, j));
        if (col > best)
            best = col;
    }
    return best;
}

template <typename Scalar>
Scalar norm1(const Eigen::SparseMatrix<Scalar>& a) {
    Scalar best(0);
    for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
        Scalar col(0);
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
            col += abs_of(it.value());
        if (col > best)
            best = col;
    }
    return best;
}

template <typename Scalar>
Scalar vec_norm1(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
    Scalar s(0);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += abs_of(v(i));
    return s;
}

template <typename Scalar>
Scalar trace_of(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
    return a.trace();
}

template <typename Scalar>
Scalar trace_of(const Eigen::SparseMatrix<Scalar>& a) {
    Scalar s(0);
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a, k); it; ++it)
            if (it.row() == it.col())
                s += it.value();
    return s;
}

template <typename Mat>
void shift_diagonal(Mat& a, const typename Mat::Scalar& mu) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        a.coeffRef(i, i) -= mu;
}

/// e^{A h} v by shifted Taylor stepping: each step has ||(A - mu Id) dt||_1 <= 1
/// and stops once two consecutive terms are below unit roundoff relative to
/// the partial sum.
template <typename Mat>
Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1> taylor_action(
    const Mat& a, double h, const Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>& v) {
    using Scalar = typename Mat::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const auto n = a.rows();
    require(a.cols() == n, ErrorKind::InvalidInput, "expm_action: matrix must be square");
    require(v.size() == n, ErrorKind::InvalidInput, "expm_action: dimension mismatch");
    require(h >= 0.0 && std::isfinite(h), ErrorKind::InvalidInput,
            "expm_action: horizon must be finite and nonnegative");
    if (h == 0.0 || n == 0)
        return v;

    const Scalar mu = trace_of(a) / Scalar(static_cast<double>(n));
    Mat shifted = a;
    shift_diagonal(shifted, mu);
    const Scalar hs(h);
    const Scalar scaled = norm1(shifted) * hs;
    require(static_cast<double>(scaled) < 1e12, ErrorKind::InvalidInput,
            "expm_action: matrix has non-finite or huge entries");
    const int steps = std::max(1, static_cast<int>(std::ceil(static_cast<double>(scaled))));
    const Scalar dt = hs / Scalar(steps);
    const Scalar growth = exp_of(Scalar(mu * dt));
    const Scalar tol = std::numeric_limits<Scalar>::epsilon() / 2;
    constexpr int max_terms = 80;

    Vec f = v;
    for (int s = 0; s < steps; ++s) {
        Vec term = f;
        Scalar prev = vec_norm1(term);
        for (int k = 1; k <= max_terms; ++k) {
            term = Vec(shifted * term) * Scalar(dt / Scalar(k));
            f += term;
            const Scalar cur = vec_norm1(term);
            if (cur + prev <= tol * vec_norm1(f))
                break;
            prev = cur;
        }
        f *= growth;
    }
    return f;
}

/// e^{A h} by Taylor scaling and squaring. Used where Pade tables for the
/// scalar type are not available.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> taylor_expm(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, double h) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto n = a.rows();
    if (n == 0)
        return a;
    const Scalar mu = trace_of(a) / Scalar(static_cast<double>(n));
    Mat b = a;
    shift_diagonal(b, mu);
    b *= Scalar(h);
    const double nrm = static_cast<double>(norm1(b));
    int squarings = 0;
    if (nrm > 0.5)
        squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    b /= Scalar(std::ldexp(1.0, squarings));

    const Scalar tol = std::numeric_limits<Scalar>::epsilon() / 4;
    Mat e = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 60; ++k) {
        term = Mat(term * b) / Scalar(k);
        e += term;
        if (norm1(term) <= tol)
            break;
    }
    for (int s = 0; s < squarings; ++s)
        e = Mat(e * e);
    return e * exp_of(Scalar(mu * Scalar(h)));
}

}  // namespace linearcredit::detail
