// SPDX-License-Identifier: Apache-2.0
//
// Model specifications: the generic linear framework, the linear hypercube
// (LHC) diffusion and its cascade sub-family (LHCC).
#pragma once

#include "linearcredit/linmat.hpp"

#include <string>
#include <vector>

namespace linearcredit {

/// Generic linear survival model. The drift of (Y, X) is A (Y, X) with
/// A = [[c, gamma_block], [b, beta]] and the survival process is a^T Y.
struct LinearModel {
    int n = 1;
    int m = 0;
    Matrix c;            // n x n
    Matrix gamma_block;  // n x m
    Matrix b;            // m x n
    Matrix beta;         // m x m
    Vector a;            // n, nonnegative, sums to one

    [[nodiscard]] int dim() const { return n + m; }
};

struct LhcParams {
    int m = 0;
    Vector gamma;
    Vector b;
    Matrix beta;
    Vector sigma;
};

struct LhccParams {
    int m = 0;
    double gamma1 = 0.0;
    Vector kappa;
    Vector theta;
    Vector sigma;
};

/// A point (y, x) of the hyperpyramid E = {y in (0,1], x in [0,y]^m}.
struct State {
    double y = 1.0;
    Vector x;
};

struct ValidationReport {
    bool valid = false;
    /// b_i - sum_{j != i} beta_ij^-
    Vector slack_zero;
    /// -(gamma_i + beta_ii + b_i + sum_{j != i} (gamma_j + beta_ij)^+)
    Vector slack_upper;
    /// Factor i cannot reach 0 (slack_zero >= sigma_i^2 / 2).
    std::vector<bool> zero_unattainable;
    /// Factor i cannot reach y (slack_upper >= sigma_i^2 / 2).
    std::vector<bool> upper_unattainable;
    std::vector<std::string> messages;
};

/// Inward-pointing drift conditions. A slack counts as satisfied when it is
/// at least -tol.
ValidationReport validate_lhc(const LhcParams& p, double tol = 1e-12);

/// Per-dimension slack 1 - gamma1/kappa_i - theta_i of the cascade constraint.
Vector lhcc_slack(const LhccParams& p);

/// Cascade embedding without the constraint check.
LhcParams lhcc_embed(const LhccParams& p);

/// Cascade embedding. Throws Constraint naming the first i with
/// theta_i > 1 - gamma1/kappa_i + tol.
LhcParams lhcc_to_lhc(const LhccParams& p, double tol = 1e-12);

LinearModel to_linear(const LhcParams& p);

/// [[c, gamma_block], [b, beta]] - r Id.
Matrix drift_matrix(const LinearModel& model, double r = 0.0);

/// -a^T (c Y + gamma X) / a^T Y.
double intensity(const LinearModel& model, const Vector& y, const Vector& x);
double intensity(const LinearModel& model, const State& s);

bool in_state_space(const State& s, double tol = 0.0);
void check_state(const State& s, int m);

/// Maps a model whose factor i lives on [0, L_i y] to the equivalent model
/// on the unit hypercube, under the change of variable x_i' = x_i / L_i.
LhcParams canonicalize(const LhcParams& p, const Vector& L);

/// Market price of risk turning the Q-drift (b, beta) into (b_P, beta_P).
Vector mpr_lambda(const LhcParams& p, const Vector& b_P, const Matrix& beta_P,
                  const State& s);

struct MprCheck {
    bool equivalent = false;
    std::vector<std::string> messages;
};

/// Sufficient conditions for the measure change to be equivalent, given the
/// initial state.
MprCheck mpr_validate(const LhcParams& p, const Vector& b_P, const Matrix& beta_P,
                      const State& s0);

void check_dimensions(const LhcParams& p);
void check_dimensions(const LhccParams& p);
void check_dimensions(const LinearModel& model);

}  // namespace linearcredit
