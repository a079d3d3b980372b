// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/linmat.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/model.hpp"
#include "linearcredit/detail/taylor.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace linearcredit {

namespace {

void require_square_finite(const Matrix& a, const char* who) {
    require(a.rows() == a.cols() && a.rows() >= 1, ErrorKind::InvalidInput,
            std::string(who) + ": matrix must be square and non-empty");
    require(a.allFinite(), ErrorKind::InvalidInput,
            std::string(who) + ": matrix has non-finite entries");
}

Matrix augmented_integral(const Matrix& a, double h) {
    const auto n = a.rows();
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = a * h;
    aug.topRightCorner(n, n) = Matrix::Identity(n, n) * h;
    return expm(aug).topRightCorner(n, n);
}

// \int_0^h u e^{Au} du from exp(h [[A, Id, 0], [0, 0, Id], [0, 0, 0]]):
// block (0,1) is \int_0^h e^{Au} du, block (0,2) is \int_0^h (h-u) e^{Au} du.
Matrix augmented_first_moment(const Matrix& a, double h) {
    const auto n = a.rows();
    Matrix aug = Matrix::Zero(3 * n, 3 * n);
    aug.block(0, 0, n, n) = a * h;
    aug.block(0, n, n, n) = Matrix::Identity(n, n) * h;
    aug.block(n, 2 * n, n, n) = Matrix::Identity(n, n) * h;
    const Matrix e = expm(aug);
    return h * e.block(0, n, n, n) - e.block(0, 2 * n, n, n);
}

}  // namespace

Matrix expm(const Matrix& a) {
    require_square_finite(a, "expm");
    return a.exp();
}

Vector expm_action(const Matrix& a, double h, const Vector& v) {
    require(a.allFinite(), ErrorKind::InvalidInput, "expm_action: matrix has non-finite entries");
    return detail::taylor_action(a, h, v);
}

Vector expm_action(const SparseMatrix& a, double h, const Vector& v) {
    return detail::taylor_action(a, h, v);
}

double rcond_estimate(const Matrix& a) {
    require_square_finite(a, "rcond_estimate");
    if (a.rows() == 0)
        return 0.0;
    const Vector sv = Eigen::BDCSVD<Matrix>(a).singularValues();
    const double top = sv(0);
    if (!(top > 0.0))
        return 0.0;
    const double rc = sv(sv.size() - 1) / top;
    return std::isfinite(rc) ? rc : 0.0;
}

Matrix exp_integral(const Matrix& a, double h, IntegralBranch branch) {
    require_square_finite(a, "exp_integral");
    require(h >= 0.0 && std::isfinite(h), ErrorKind::InvalidInput,
            "exp_integral: horizon must be finite and nonnegative");
    const auto n = a.rows();
    if (h == 0.0)
        return Matrix::Zero(n, n);

    if (branch == IntegralBranch::Auto)
        branch = rcond_estimate(a) >= kInvertibleRcond ? IntegralBranch::Inverse
                                                        : IntegralBranch::Augmented;
    if (branch == IntegralBranch::Augmented)
        return augmented_integral(a, h);

    Eigen::PartialPivLU<Matrix> lu(a);
    return lu.solve(expm(a * h) - Matrix::Identity(n, n));
}

Matrix exp_integral_weighted(const Matrix& a, double t, double t_maturity,
                             IntegralBranch branch) {
    require_square_finite(a, "exp_integral_weighted");
    require(std::isfinite(t) && std::isfinite(t_maturity), ErrorKind::InvalidInput,
            "exp_integral_weighted: times must be finite");
    require(t_maturity >= t, ErrorKind::InvalidInput,
            "exp_integral_weighted: maturity precedes start");
    const auto n = a.rows();
    const double h = t_maturity - t;
    if (h == 0.0)
        return Matrix::Zero(n, n);

    if (branch == IntegralBranch::Auto)
        branch = rcond_estimate(a) >= kInvertibleRcond ? IntegralBranch::Inverse
                                                        : IntegralBranch::Augmented;
    if (branch == IntegralBranch::Augmented)
        return augmented_first_moment(a, h) + t * augmented_integral(a, h);

    // (tM - t) A^{-1} e^{Ah} + A^{-1} (t Id - A^{-1}) (e^{Ah} - Id)
    const Matrix id = Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(a);
    const Matrix e = expm(a * h);
    const Matrix inv_e_minus = lu.solve(e - id);
    return h * lu.solve(e) + lu.solve(t * (e - id) - inv_e_minus);
}

AStarCheck lhcc_astar_invertible(double r, const LhccParams& params) {
    const LhcParams lhc = lhcc_to_lhc(params);
    const Matrix a_star = drift_matrix(to_linear(lhc), r);
    AStarCheck out;
    out.by_lemma = r > 0.0;
    out.rcond = rcond_estimate(a_star);
    out.determinant = a_star.determinant();
    out.invertible = out.by_lemma || out.rcond >= kInvertibleRcond;
    return out;
}

}  // namespace linearcredit
