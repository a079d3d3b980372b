// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/pricing.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/quadrature.hpp"

#include <cmath>

namespace linearcredit {

namespace {

void check_times(double t, double tM) {
    require(std::isfinite(t) && std::isfinite(tM) && tM >= t, ErrorKind::InvalidInput,
            "pricing: need finite t <= tM");
}

void check_recovery(double delta) {
    require(delta >= 0.0 && delta <= 1.0, ErrorKind::InvalidInput,
            "pricing: recovery must lie in [0, 1]");
}

// -a^T (c, gamma_block): the default-rate row.
Vector default_row(const LinearModel& model) {
    Vector w(model.dim());
    w.head(model.n) = -(model.c.transpose() * model.a);
    w.tail(model.m) = -(model.gamma_block.transpose() * model.a);
    return w;
}

}  // namespace

TenorGrid make_grid(double t0, double tM, int frequency) {
    require(frequency >= 1, ErrorKind::InvalidInput, "make_grid: frequency must be positive");
    require(std::isfinite(t0) && std::isfinite(tM) && tM > t0, ErrorKind::InvalidInput,
            "make_grid: need t0 < tM");
    const double step = 1.0 / frequency;
    const double periods = (tM - t0) * frequency;
    auto count = static_cast<long>(std::llround(periods));
    if (std::abs(periods - static_cast<double>(count)) > 1e-9)
        count = static_cast<long>(std::ceil(periods));
    TenorGrid g;
    g.t0 = t0;
    for (long j = 1; j < count; ++j)
        g.dates.push_back(t0 + static_cast<double>(j) * step);
    g.dates.push_back(tM);
    return g;
}

void check_grid(const TenorGrid& g) {
    require(!g.dates.empty(), ErrorKind::InvalidInput, "tenor grid: no payment dates");
    double prev = g.t0;
    for (double d : g.dates) {
        require(std::isfinite(d) && d > prev, ErrorKind::InvalidInput,
                "tenor grid: dates must be strictly increasing after t0");
        prev = d;
    }
}

Vector stacked(const State& s) {
    Vector v(1 + s.x.size());
    v << s.y, s.x;
    return v;
}

double value(const LinearModel& model, const Vector& psi, const Vector& yx) {
    require(psi.size() == model.dim() && yx.size() == model.dim(), ErrorKind::InvalidInput,
            "pricing: state dimension mismatch");
    const double surv = model.a.dot(yx.head(model.n));
    require(surv > 0.0, ErrorKind::Domain, "pricing: survival level a^T Y must be positive");
    return psi.dot(yx) / surv;
}

Vector psi_z(const LinearModel& model, double t, double tM, double r) {
    check_dimensions(model);
    check_times(t, tM);
    Vector e = Vector::Zero(model.dim());
    e.head(model.n) = model.a;
    const Matrix at = drift_matrix(model, r).transpose();
    return expm_action(at, tM - t, e);
}

double bond_zero(const LinearModel& model, const Vector& yx, double t, double tM, double r) {
    return value(model, psi_z(model, t, tM, r), yx);
}

double bond_recovery_maturity(const LinearModel& model, const Vector& yx, double t, double tM,
                              double r, double delta) {
    check_recovery(delta);
    return (1.0 - delta) * bond_zero(model, yx, t, tM, r) + delta * std::exp(-r * (tM - t));
}

Vector psi_d(const LinearModel& model, double t, double tM, double r, IntegralBranch branch) {
    check_dimensions(model);
    check_times(t, tM);
    const Matrix k = exp_integral(drift_matrix(model, r), tM - t, branch);
    return k.transpose() * default_row(model);
}

Vector psi_dstar(const LinearModel& model, double t, double tM, double r,
                 IntegralBranch branch) {
    check_dimensions(model);
    check_times(t, tM);
    const Matrix k = exp_integral_weighted(drift_matrix(model, r), t, tM, branch);
    return k.transpose() * default_row(model);
}

double bond_recovery_default(const LinearModel& model, const Vector& yx, double t, double tM,
                             double r, double delta) {
    check_recovery(delta);
    return bond_zero(model, yx, t, tM, r) + delta * value(model, psi_d(model, t, tM, r), yx);
}

CdsLegs cds_legs(const LinearModel& model, double t, const TenorGrid& grid, double r,
                 double delta, IntegralBranch branch) {
    check_recovery(delta);
    check_grid(grid);
    require(t <= grid.t0, ErrorKind::InvalidInput, "cds_legs: valuation time after t0");
    const std::size_t M = grid.dates.size();
    const double tM = grid.maturity();
    const Vector d0 = psi_d(model, t, grid.t0, r, branch);
    const Vector dM = psi_d(model, t, tM, r, branch);

    CdsLegs legs;
    legs.recovery = delta;
    legs.prot = (1.0 - delta) * (dM - d0);

    Vector prem = psi_dstar(model, t, tM, r, branch) - psi_dstar(model, t, grid.t0, r, branch);
    const double t_prev_last = M >= 2 ? grid.dates[M - 2] : grid.t0;
    prem += -t_prev_last * dM + grid.t0 * d0;
    for (std::size_t j = 0; j < M; ++j) {
        const double acc = grid.accrual(j);
        prem += acc * psi_z(model, t, grid.dates[j], r);
        if (j + 1 < M)
            prem += acc * psi_d(model, t, grid.dates[j], r, branch);
    }
    legs.prem = prem;
    return legs;
}

double cds_spread(const LinearModel& model, const Vector& yx, const CdsLegs& legs) {
    const double prem = value(model, legs.prem, yx);
    require(prem > 0.0, ErrorKind::DegenerateAnnuity, "cds_spread: premium leg is not positive");
    return value(model, legs.prot, yx) / prem;
}

double cds_spread(const LinearModel& model, const Vector& yx, double t, const TenorGrid& grid,
                  double r, double delta) {
    return cds_spread(model, yx, cds_legs(model, t, grid, r, delta));
}

double ucva(const MomentOperator& op, const State& s, double t, double tM, double r,
            const Vector& exposure, int nodes) {
    check_times(t, tM);
    check_state(s, op.m());
    Vector lin(op.m() + 1);
    lin << 0.0, op.params().gamma;
    const Vector q = times_linear(op.basis(), exposure, lin);
    if (tM == t || q.isZero(0.0))
        return 0.0;
    const Vector h = op.basis().evaluate(s);
    const double out = integrate(
        [&](double u) { return std::exp(-r * (u - t)) * h.dot(op.propagate(q, u - t)); }, t, tM,
        nodes);
    return out / s.y;
}

}  // namespace linearcredit
