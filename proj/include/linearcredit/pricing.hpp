// SPDX-License-Identifier: Apache-2.0
//
// Closed-form single-name prices. Each price is psi^T (Y_t, X_t) / a^T Y_t
// for a pricing vector psi built from the drift matrix.
#pragma once

#include "linearcredit/linmat.hpp"
#include "linearcredit/model.hpp"
#include "linearcredit/moments.hpp"

#include <vector>

namespace linearcredit {

inline constexpr double kBasisPoint = 1e-4;

/// Payment schedule t0 < t1 < ... < tM, in year fractions.
struct TenorGrid {
    double t0 = 0.0;
    std::vector<double> dates;

    [[nodiscard]] double maturity() const { return dates.back(); }
    [[nodiscard]] double accrual(std::size_t j) const {
        return dates[j] - (j == 0 ? t0 : dates[j - 1]);
    }
};

/// Regular schedule with `frequency` payments per year; a short last period
/// absorbs any remainder.
TenorGrid make_grid(double t0, double tM, int frequency = 4);
void check_grid(const TenorGrid& g);

struct CdsLegs {
    Vector prot;
    Vector prem;
    double recovery = 0.0;
};

/// (Y, X) stacked for n = 1 models.
Vector stacked(const State& s);

/// psi^T yx / a^T Y.
double value(const LinearModel& model, const Vector& psi, const Vector& yx);

/// e^{-r(tM - t)} (a^T, 0) e^{A(tM - t)}.
Vector psi_z(const LinearModel& model, double t, double tM, double r);

/// Zero-recovery bond price for a firm alive at t.
double bond_zero(const LinearModel& model, const Vector& yx, double t, double tM, double r);

/// Recovery of delta paid at maturity.
double bond_recovery_maturity(const LinearModel& model, const Vector& yx, double t, double tM,
                              double r, double delta);

/// Pays 1 at default if tau <= tM.
Vector psi_d(const LinearModel& model, double t, double tM, double r,
             IntegralBranch branch = IntegralBranch::Auto);

/// Pays tau at default if tau <= tM.
Vector psi_dstar(const LinearModel& model, double t, double tM, double r,
                 IntegralBranch branch = IntegralBranch::Auto);

/// Recovery of delta paid at default.
double bond_recovery_default(const LinearModel& model, const Vector& yx, double t, double tM,
                             double r, double delta);

/// Protection and premium legs; the premium leg includes accrued coupon up
/// to default. Requires t <= t0.
CdsLegs cds_legs(const LinearModel& model, double t, const TenorGrid& grid, double r,
                 double delta, IntegralBranch branch = IntegralBranch::Auto);

/// Spread as a rate (multiply by 1e4 for basis points).
double cds_spread(const LinearModel& model, const Vector& yx, const CdsLegs& legs);
double cds_spread(const LinearModel& model, const Vector& yx, double t, const TenorGrid& grid,
                  double r, double delta);

/// Unilateral CVA for a polynomial exposure f(Y, X) given in the basis of op.
/// The exposure degree must be below the operator degree.
double ucva(const MomentOperator& op, const State& s, double t, double tM, double r,
            const Vector& exposure, int nodes = 64);

}  // namespace linearcredit
