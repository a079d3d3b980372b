// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace linearcredit;

TEST(ValidateLhc, OneFactorValid) {
    const ValidationReport r = validate_lhc(lc_test::one_factor());
    EXPECT_TRUE(r.valid);
    EXPECT_NEAR(r.slack_zero(0), 0.2, 1e-15);
    EXPECT_NEAR(r.slack_upper(0), 0.6, 1e-15);
    // b = 0.2 < sigma^2 / 2 = 0.28125: zero is attainable.
    EXPECT_FALSE(r.zero_unattainable[0]);
}

TEST(ValidateLhc, FrozenFactor) {
    LhcParams p;
    p.m = 1;
    p.gamma = Vector::Zero(1);
    p.b = Vector::Zero(1);
    p.beta = Matrix::Zero(1, 1);
    p.sigma = Vector::Zero(1);
    const ValidationReport r = validate_lhc(p);
    EXPECT_TRUE(r.valid);
    EXPECT_EQ(r.slack_zero(0), 0.0);
    EXPECT_EQ(r.slack_upper(0), 0.0);
}

TEST(ValidateLhc, DetectsOutwardDrift) {
    LhcParams p = lc_test::one_factor();
    p.b(0) = -0.1;
    EXPECT_FALSE(validate_lhc(p).valid);
    p = lc_test::one_factor();
    p.beta(0, 0) = -0.2;
    EXPECT_FALSE(validate_lhc(p).valid);
}

TEST(LhccToLhc, Bombardier) {
    const LhccParams q = lc_test::table2()[0].params;
    EXPECT_NEAR(1.0 - q.gamma1 / q.kappa(0), 0.6245, 1e-4);
    const LhcParams p = lhcc_to_lhc(q);
    EXPECT_TRUE(validate_lhc(p).valid);
    EXPECT_EQ(p.gamma(0), 0.205);
    EXPECT_EQ(p.gamma(1), 0.0);
    EXPECT_EQ(p.beta(0, 1), 0.546 * 0.624);
    EXPECT_EQ(p.b(1), 0.421 * 0.512);
    EXPECT_EQ(p.b(0), 0.0);
}

TEST(LhccToLhc, ZeroIntensityEdge) {
    const LhcParams p = lhcc_to_lhc(lc_test::lhcc(0.0, {1.0}, {1.0}));
    EXPECT_EQ(p.beta(0, 0), -1.0);
    EXPECT_EQ(p.b(0), 1.0);
    EXPECT_EQ(p.gamma(0), 0.0);
}

TEST(LhccToLhc, ConstraintViolationNamesDimension) {
    try {
        lhcc_to_lhc(lc_test::lhcc(0.2, {0.5, 0.4}, {0.5, 0.6}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Constraint);
        EXPECT_NE(std::string(e.what()).find("theta_2"), std::string::npos);
    }
}

TEST(LhccToLhc, BindingSlackCarriesOver) {
    // theta_i = 1 - gamma1/kappa_i exactly in exact arithmetic.
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.2, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const double g = 0.1;
        std::vector<double> k{u(rng), u(rng), u(rng)};
        std::vector<double> th;
        for (double kk : k)
            th.push_back(std::max(0.0, 1.0 - g / kk));
        const LhcParams p = lhcc_to_lhc(lc_test::lhcc(g, k, th));
        const ValidationReport r = validate_lhc(p);
        EXPECT_TRUE(r.valid);
        for (int i = 0; i < 3; ++i)
            EXPECT_NEAR(r.slack_upper(i), 0.0, 1e-12);
    }
}

TEST(DriftMatrix, OneFactor) {
    const Matrix a = drift_matrix(to_linear(lc_test::one_factor()));
    Matrix ref(2, 2);
    ref << 0, -0.25, 0.2, -1.05;
    EXPECT_TRUE(a.isApprox(ref, 1e-15));
}

TEST(DriftMatrix, RateShiftsDiagonalOnly) {
    const LinearModel lm = to_linear(lc_test::table2_lhc(1));
    const Matrix a0 = drift_matrix(lm, 0.0);
    const Matrix ar = drift_matrix(lm, 0.0252);
    EXPECT_EQ(ar, Matrix(a0 - 0.0252 * Matrix::Identity(a0.rows(), a0.cols())));
}

TEST(Intensity, Values) {
    const LinearModel lm = to_linear(lc_test::one_factor());
    EXPECT_EQ(intensity(lm, State{0.7, Vector::Zero(1)}), 0.0);
    EXPECT_NEAR(intensity(lm, State{0.6, Vector::Constant(1, 0.6)}), 0.25, 1e-15);
    EXPECT_NEAR(intensity(lm, lc_test::one_factor_state()), 0.05, 1e-15);
}

TEST(Intensity, WithinBoundsOnE) {
    const LinearModel lm = to_linear(lc_test::table2_lhc(2));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double upper = lc_test::table2_lhc(2).gamma.sum();
    for (int trial = 0; trial < 200; ++trial) {
        State s{0.01 + 0.99 * u(rng), Vector(3)};
        for (int i = 0; i < 3; ++i)
            s.x(i) = s.y * u(rng);
        const double lam = intensity(lm, s);
        EXPECT_GE(lam, 0.0);
        EXPECT_LE(lam, upper + 1e-15);
    }
}

TEST(Canonicalize, Identity) {
    const LhcParams p = lc_test::table2_lhc(1);
    const LhcParams q = canonicalize(p, Vector::Ones(3));
    EXPECT_EQ(q.gamma, p.gamma);
    EXPECT_EQ(q.b, p.b);
    EXPECT_EQ(q.beta, p.beta);
}

TEST(Canonicalize, OneFactorScaling) {
    const LhcParams q = canonicalize(lc_test::one_factor(), Vector::Constant(1, 2.0));
    EXPECT_EQ(q.gamma(0), 0.5);
    EXPECT_EQ(q.b(0), 0.1);
    EXPECT_EQ(q.beta(0, 0), -1.05);
}

TEST(Canonicalize, GroupAction) {
    const LhcParams p = lc_test::table2_lhc(4);
    Vector l1(3), l2(3);
    l1 << 2.0, 0.5, 4.0;
    l2 << 0.25, 8.0, 2.0;
    const LhcParams a = canonicalize(canonicalize(p, l1), l2);
    const LhcParams b = canonicalize(p, (l1.array() * l2.array()).matrix());
    EXPECT_EQ(a.gamma, b.gamma);
    EXPECT_EQ(a.b, b.b);
    EXPECT_EQ(a.beta, b.beta);
}

TEST(Mpr, NoChange) {
    const LhcParams p = lc_test::one_factor();
    const Vector lam = mpr_lambda(p, p.b, p.beta, State{1.0, Vector::Constant(1, 0.5)});
    EXPECT_EQ(lam(0), 0.0);
}

TEST(Mpr, InteriorValue) {
    const LhcParams p = lc_test::one_factor();
    Matrix bp = p.beta;
    bp(0, 0) -= 0.1;
    const Vector lam = mpr_lambda(p, p.b, bp, State{1.0, Vector::Constant(1, 0.5)});
    EXPECT_NEAR(lam(0), -0.1 * 0.5 / (0.75 * 0.5), 1e-15);
    EXPECT_NEAR(lam(0), -0.1333, 1e-4);
}

TEST(Mpr, CaseOneMatchesSpecialForm) {
    const LhcParams p = lc_test::one_factor();
    Matrix bp = p.beta;
    bp(0, 0) += 0.3;
    const State s{0.8, Vector::Constant(1, 0.3)};
    const double expected = 0.3 * std::sqrt(0.3) / (0.75 * std::sqrt(0.5));
    EXPECT_NEAR(mpr_lambda(p, p.b, bp, s)(0), expected, 1e-14);
    // Defined at x = 0 as well.
    EXPECT_EQ(mpr_lambda(p, p.b, bp, State{0.8, Vector::Zero(1)})(0), 0.0);
}

TEST(Mpr, CaseTwoDefinedAtUpperBoundary) {
    const LhcParams p = lc_test::one_factor();
    Vector bp = p.b;
    Matrix betap = p.beta;
    bp(0) += 0.1;
    betap(0, 0) -= 0.1;
    const State s{0.8, Vector::Constant(1, 0.3)};
    const double expected = 0.1 * std::sqrt(0.5) / (0.75 * std::sqrt(0.3));
    EXPECT_NEAR(mpr_lambda(p, bp, betap, s)(0), expected, 1e-14);
    EXPECT_EQ(mpr_lambda(p, bp, betap, State{0.8, Vector::Constant(1, 0.8)})(0), 0.0);
}

TEST(Mpr, BoundaryWithoutSpecialCase) {
    const LhcParams p = lc_test::one_factor();
    Vector bp = p.b;
    bp(0) += 0.1;
    try {
        mpr_lambda(p, bp, p.beta, State{0.8, Vector::Zero(1)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
}

TEST(Mpr, Validation) {
    LhcParams p = lc_test::one_factor(0.3);
    const State s0 = lc_test::one_factor_state();
    EXPECT_TRUE(mpr_validate(p, p.b, p.beta, s0).equivalent);
    // Large volatility makes both boundaries attainable.
    p.sigma(0) = 1.5;
    Vector bp = p.b;
    bp(0) += 0.01;
    EXPECT_FALSE(mpr_validate(p, bp, p.beta, s0).equivalent);
}
