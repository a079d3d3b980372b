// SPDX-License-Identifier: Apache-2.0
//
// Dense matrix exponential kernels. Every closed-form price in the library
// reduces to e^{Ah}, its action on a vector, or one of the two exponential
// integrals below.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace linearcredit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct LhccParams;

/// Reciprocal condition threshold below which the integral kernels switch
/// to block augmentation.
inline constexpr double kInvertibleRcond = 1e-10;

enum class IntegralBranch { Auto, Inverse, Augmented };

/// e^A by scaling and squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& a);

/// e^{Ah} v without forming e^{Ah}. Truncated Taylor steps on a shifted,
/// scaled operator.
Vector expm_action(const Matrix& a, double h, const Vector& v);
Vector expm_action(const SparseMatrix& a, double h, const Vector& v);

/// \int_0^h e^{As} ds.
///
/// With Auto, uses A^{-1}(e^{Ah} - Id) when the reciprocal condition number
/// of A is at least kInvertibleRcond, otherwise reads the top-right block of
/// exp(h [[A, Id], [0, 0]]).
Matrix exp_integral(const Matrix& a, double h,
                    IntegralBranch branch = IntegralBranch::Auto);

/// \int_t^{tM} s e^{A(s-t)} ds. Throws InvalidInput when tM < t.
Matrix exp_integral_weighted(const Matrix& a, double t, double t_maturity,
                             IntegralBranch branch = IntegralBranch::Auto);

/// Reciprocal 2-norm condition number of a square matrix (0 if singular).
double rcond_estimate(const Matrix& a);

struct AStarCheck {
    bool invertible = false;
    /// True when r > 0, the hypothesis under which the cascade drift is
    /// known to be invertible.
    bool by_lemma = false;
    double rcond = 0.0;
    double determinant = 0.0;
};

/// Invertibility of A - r Id for the cascade model.
AStarCheck lhcc_astar_invertible(double r, const LhccParams& params);

}  // namespace linearcredit
