// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/model.hpp"

#include "linearcredit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace linearcredit {

namespace {

std::string idx(int i) { return std::to_string(i + 1); }

struct Margins {
    Vector zero;
    Vector upper;
};

Margins drift_margins(const Vector& gamma, const Vector& b, const Matrix& beta) {
    const auto m = b.size();
    Margins out{Vector::Zero(m), Vector::Zero(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        double neg = 0.0;
        double pos = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i)
                continue;
            neg += std::max(0.0, -beta(i, j));
            pos += std::max(0.0, gamma(j) + beta(i, j));
        }
        out.zero(i) = b(i) - neg;
        out.upper(i) = -(gamma(i) + beta(i, i) + b(i) + pos);
    }
    return out;
}

}  // namespace

void check_dimensions(const LhcParams& p) {
    require(p.m >= 1, ErrorKind::InvalidInput, "lhc: m must be positive");
    require(p.gamma.size() == p.m && p.b.size() == p.m && p.sigma.size() == p.m &&
                p.beta.rows() == p.m && p.beta.cols() == p.m,
            ErrorKind::InvalidInput, "lhc: inconsistent dimensions");
    require(p.gamma.allFinite() && p.b.allFinite() && p.beta.allFinite() &&
                p.sigma.allFinite(),
            ErrorKind::InvalidInput, "lhc: non-finite parameter");
    require((p.gamma.array() >= 0.0).all(), ErrorKind::InvalidInput,
            "lhc: gamma must be nonnegative");
    require((p.sigma.array() >= 0.0).all(), ErrorKind::InvalidInput,
            "lhc: sigma must be nonnegative");
}

void check_dimensions(const LhccParams& p) {
    require(p.m >= 1, ErrorKind::InvalidInput, "lhcc: m must be positive");
    require(p.kappa.size() == p.m && p.theta.size() == p.m && p.sigma.size() == p.m,
            ErrorKind::InvalidInput, "lhcc: inconsistent dimensions");
    require(std::isfinite(p.gamma1) && p.gamma1 >= 0.0, ErrorKind::InvalidInput,
            "lhcc: gamma1 must be finite and nonnegative");
    require(p.kappa.allFinite() && (p.kappa.array() > 0.0).all(), ErrorKind::InvalidInput,
            "lhcc: kappa must be positive");
    require(p.theta.allFinite() && (p.theta.array() >= 0.0).all(), ErrorKind::InvalidInput,
            "lhcc: theta must be nonnegative");
    require(p.sigma.allFinite() && (p.sigma.array() >= 0.0).all(), ErrorKind::InvalidInput,
            "lhcc: sigma must be nonnegative");
}

void check_dimensions(const LinearModel& model) {
    const int n = model.n;
    const int m = model.m;
    require(n >= 1 && m >= 0, ErrorKind::InvalidInput, "linear: bad block sizes");
    require(model.c.rows() == n && model.c.cols() == n && model.gamma_block.rows() == n &&
                model.gamma_block.cols() == m && model.b.rows() == m && model.b.cols() == n &&
                model.beta.rows() == m && model.beta.cols() == m && model.a.size() == n,
            ErrorKind::InvalidInput, "linear: inconsistent dimensions");
    require((model.a.array() >= 0.0).all() && std::abs(model.a.sum() - 1.0) <= 1e-12,
            ErrorKind::InvalidInput, "linear: weights a must be nonnegative and sum to one");
}

ValidationReport validate_lhc(const LhcParams& p, double tol) {
    check_dimensions(p);
    const Margins mg = drift_margins(p.gamma, p.b, p.beta);
    ValidationReport rep;
    rep.slack_zero = mg.zero;
    rep.slack_upper = mg.upper;
    rep.valid = true;
    for (int i = 0; i < p.m; ++i) {
        const double half_var = 0.5 * p.sigma(i) * p.sigma(i);
        rep.zero_unattainable.push_back(mg.zero(i) >= half_var);
        rep.upper_unattainable.push_back(mg.upper(i) >= half_var);
        if (mg.zero(i) < -tol) {
            rep.valid = false;
            rep.messages.push_back("drift points outward at x_" + idx(i) + " = 0");
        }
        if (mg.upper(i) < -tol) {
            rep.valid = false;
            rep.messages.push_back("drift points outward at x_" + idx(i) + " = y");
        }
    }
    return rep;
}

Vector lhcc_slack(const LhccParams& p) {
    check_dimensions(p);
    return (1.0 - p.gamma1 / p.kappa.array() - p.theta.array()).matrix();
}

LhcParams lhcc_embed(const LhccParams& p) {
    check_dimensions(p);
    const int m = p.m;
    LhcParams out;
    out.m = m;
    out.gamma = Vector::Zero(m);
    out.gamma(0) = p.gamma1;
    out.b = Vector::Zero(m);
    out.b(m - 1) = p.kappa(m - 1) * p.theta(m - 1);
    out.beta = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        out.beta(i, i) = -p.kappa(i);
        if (i + 1 < m)
            out.beta(i, i + 1) = p.kappa(i) * p.theta(i);
    }
    out.sigma = p.sigma;
    return out;
}

LhcParams lhcc_to_lhc(const LhccParams& p, double tol) {
    const Vector slack = lhcc_slack(p);
    for (int i = 0; i < p.m; ++i)
        require(slack(i) >= -tol, ErrorKind::Constraint,
                "lhcc: theta_" + idx(i) + " exceeds 1 - gamma1/kappa_" + idx(i) +
                    " (slack " + std::to_string(slack(i)) + ")");
    return lhcc_embed(p);
}

LinearModel to_linear(const LhcParams& p) {
    check_dimensions(p);
    LinearModel out;
    out.n = 1;
    out.m = p.m;
    out.c = Matrix::Zero(1, 1);
    out.gamma_block = -p.gamma.transpose();
    out.b = p.b;
    out.beta = p.beta;
    out.a = Vector::Ones(1);
    return out;
}

Matrix drift_matrix(const LinearModel& model, double r) {
    check_dimensions(model);
    const int n = model.n;
    const int m = model.m;
    Matrix a(n + m, n + m);
    a.topLeftCorner(n, n) = model.c;
    a.topRightCorner(n, m) = model.gamma_block;
    a.bottomLeftCorner(m, n) = model.b;
    a.bottomRightCorner(m, m) = model.beta;
    a.diagonal().array() -= r;
    return a;
}

double intensity(const LinearModel& model, const Vector& y, const Vector& x) {
    check_dimensions(model);
    require(y.size() == model.n && x.size() == model.m, ErrorKind::InvalidInput,
            "intensity: state dimension mismatch");
    const double s = model.a.dot(y);
    require(s > 0.0, ErrorKind::Domain, "intensity: survival level a^T y is zero");
    const double lam = -model.a.dot(model.c * y + model.gamma_block * x) / s;
    return std::max(0.0, lam);
}

double intensity(const LinearModel& model, const State& s) {
    return intensity(model, Vector::Constant(1, s.y), s.x);
}

bool in_state_space(const State& s, double tol) {
    if (!(s.y > 0.0 && s.y <= 1.0 + tol) || !s.x.allFinite())
        return false;
    return (s.x.array() >= -tol).all() && (s.x.array() <= s.y + tol).all();
}

void check_state(const State& s, int m) {
    require(s.x.size() == m, ErrorKind::InvalidInput, "state: factor dimension mismatch");
    require(in_state_space(s, 1e-12), ErrorKind::InvalidInput,
            "state: (y, x) must satisfy 0 < y <= 1 and 0 <= x_i <= y");
}

LhcParams canonicalize(const LhcParams& p, const Vector& L) {
    check_dimensions(p);
    require(L.size() == p.m && (L.array() > 0.0).all() && L.allFinite(),
            ErrorKind::InvalidInput, "canonicalize: L must be a positive m-vector");
    LhcParams out = p;
    out.gamma = (L.array() * p.gamma.array()).matrix();
    out.b = (p.b.array() / L.array()).matrix();
    for (int i = 0; i < p.m; ++i)
        for (int j = 0; j < p.m; ++j)
            out.beta(i, j) = p.beta(i, j) * L(j) / L(i);
    return out;
}

namespace {

constexpr double kMprTol = 1e-12;

bool near(double a, double b) {
    return std::abs(a - b) <= kMprTol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool case_offdiag_equal(const Matrix& beta, const Matrix& beta_P, int i) {
    for (Eigen::Index j = 0; j < beta.cols(); ++j)
        if (j != i && !near(beta_P(i, j), beta(i, j)))
            return false;
    return true;
}

}  // namespace

Vector mpr_lambda(const LhcParams& p, const Vector& b_P, const Matrix& beta_P,
                  const State& s) {
    check_dimensions(p);
    require(b_P.size() == p.m && beta_P.rows() == p.m && beta_P.cols() == p.m,
            ErrorKind::InvalidInput, "mpr_lambda: dimension mismatch");
    check_state(s, p.m);
    const Vector db = b_P - p.b;
    const Matrix dbeta = beta_P - p.beta;
    const Vector num = db * s.y + dbeta * s.x;
    Vector out(p.m);
    for (int i = 0; i < p.m; ++i) {
        const double xi = s.x(i);
        const double gap = s.y - xi;
        if (num(i) == 0.0 && db(i) == 0.0 && dbeta.row(i).isZero(0.0)) {
            out(i) = 0.0;
            continue;
        }
        require(p.sigma(i) > 0.0, ErrorKind::Domain,
                "mpr_lambda: sigma_" + idx(i) + " is zero");
        const bool offdiag = case_offdiag_equal(p.beta, beta_P, i);
        // Case 1: numerator proportional to x_i.
        const bool case1 = offdiag && near(b_P(i), p.b(i));
        // Case 2: numerator proportional to y - x_i.
        const bool case2 = offdiag && near(db(i), -dbeta(i, i));
        if (xi > 0.0 && gap > 0.0) {
            out(i) = num(i) / (p.sigma(i) * std::sqrt(xi * gap));
        } else if (case1 && gap > 0.0) {
            out(i) = dbeta(i, i) * std::sqrt(xi) / (p.sigma(i) * std::sqrt(gap));
        } else if (case2 && xi > 0.0) {
            out(i) = db(i) * std::sqrt(gap) / (p.sigma(i) * std::sqrt(xi));
        } else {
            fail(ErrorKind::Domain,
                 "mpr_lambda: factor " + idx(i) + " on the boundary without a special case");
        }
    }
    return out;
}

MprCheck mpr_validate(const LhcParams& p, const Vector& b_P, const Matrix& beta_P,
                      const State& s0) {
    check_dimensions(p);
    require(b_P.size() == p.m && beta_P.rows() == p.m && beta_P.cols() == p.m,
            ErrorKind::InvalidInput, "mpr_validate: dimension mismatch");
    check_state(s0, p.m);
    const Margins q = drift_margins(p.gamma, p.b, p.beta);
    const Margins pm = drift_margins(p.gamma, b_P, beta_P);
    MprCheck out;
    out.equivalent = true;
    auto complain = [&](const std::string& msg) {
        out.equivalent = false;
        out.messages.push_back(msg);
    };
    for (int i = 0; i < p.m; ++i) {
        const double half_var = 0.5 * p.sigma(i) * p.sigma(i);
        const double db = b_P(i) - p.b(i);
        const double dbii = beta_P(i, i) - p.beta(i, i);
        const bool offdiag = case_offdiag_equal(p.beta, beta_P, i);
        const bool case1 = offdiag && near(b_P(i), p.b(i));
        const bool case2 = offdiag && near(db, -dbii);
        const double x = s0.x(i);
        const double gap = s0.y - x;

        // At zero: strict version unless case 1 relaxes it.
        const double need_zero = case1 ? 0.0 : half_var;
        const bool start_zero_ok = case1 ? x >= 0.0 : x > 0.0;
        // At y: strict version unless case 2 relaxes it.
        const double need_upper = case2 ? 0.0 : half_var;
        const bool start_upper_ok = case2 ? gap >= 0.0 : gap > 0.0;

        if (!start_zero_ok || !start_upper_ok)
            complain("initial x_" + idx(i) + " outside the admissible range");
        if (q.zero(i) < need_zero || pm.zero(i) < need_zero)
            complain("boundary x_" + idx(i) + " = 0 attainable");
        if (q.upper(i) < need_upper || pm.upper(i) < need_upper)
            complain("boundary x_" + idx(i) + " = y attainable");
    }
    return out;
}

}  // namespace linearcredit
