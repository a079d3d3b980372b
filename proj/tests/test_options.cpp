// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/options.hpp"
#include "linearcredit/pricing.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace linearcredit;

namespace {

CdsOptionSpec section_spec(double strike_bp) {
    CdsOptionSpec spec;
    spec.t0 = 1.0;
    spec.tM = 6.0;
    spec.strike = strike_bp * kBasisPoint;
    spec.recovery = 0.4;
    spec.r = 0.0;
    return spec;
}

CdsLegs section_legs() {
    return cds_legs(to_linear(lc_test::one_factor()), 1.0, make_grid(1.0, 6.0), 0.0, 0.4);
}

// Orthonormal Legendre function on [lo, hi] via boost.
double legendre_on(double z, int j, double lo, double hi) {
    const double u = (2.0 * z - lo - hi) / (hi - lo);
    return std::sqrt((2.0 * j + 1.0) / (hi - lo)) * boost::math::legendre_p(j, u);
}

double binomial_payoff(const CdisPayoff& f, double y, double x) {
    // Expectation over the number of survivors J ~ Bin(N - N_t, y / Y_t).
    const int alive = f.N - f.defaulted;
    const double q = y / f.y_t;
    double sum = 0.0;
    for (int j = 0; j <= alive; ++j) {
        const double prob = boost::math::binomial_coefficient<double>(alive, j) *
                            std::pow(q, j) * std::pow(1.0 - q, alive - j);
        const double per_name = j == 0 ? 0.0 : j * x / y;
        sum += prob * std::max(per_name + (1.0 - f.recovery) * (f.N - j), 0.0);
    }
    return f.discount * sum / f.N;
}

}  // namespace

TEST(Support, Definition) {
    CdsLegs legs;
    legs.prot = (Vector(2) << 0.02, -0.05).finished();
    legs.prem = Vector::Zero(2);
    const PayoffSupport s = cds_option_support(legs, 0.3);
    EXPECT_EQ(s.b_min, -0.05);
    EXPECT_EQ(s.b_max, 0.02);
}

TEST(Support, ZeroStrikeNonnegativeProtection) {
    CdsLegs legs;
    legs.prot = (Vector(2) << 0.02, 0.05).finished();
    legs.prem = (Vector(2) << 1.0, 2.0).finished();
    EXPECT_EQ(cds_option_support(legs, 0.0).b_min, 0.0);
}

TEST(Support, WidensWithStrike) {
    const CdsLegs legs = section_legs();
    const PayoffSupport lo = cds_option_support(legs, 0.025);
    const PayoffSupport hi = cds_option_support(legs, 0.035);
    EXPECT_GT(hi.b_max - hi.b_min, lo.b_max - lo.b_min);
    EXPECT_LE(lo.b_min, 0.0);
    EXPECT_GE(lo.b_max, 0.0);
}

TEST(Legendre, SymmetricSupportCoefficients) {
    const LegendreApprox a = legendre_payoff_coeffs({-1.0, 1.0}, 4);
    EXPECT_NEAR(a.coeffs[0], 1.0 / (2.0 * std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(a.coeffs[1], std::sqrt(1.5) / 3.0, 1e-15);
    // z^+ - |z|/2 is odd, so even coefficients above zero come from |z| / 2.
    EXPECT_NEAR(a.coeffs[3], 0.0, 1e-15);
}

TEST(Legendre, CoefficientsMatchQuadrature) {
    const PayoffSupport s{-0.031, 0.087};
    const double scale = 1.7;
    const LegendreApprox a = legendre_payoff_coeffs(s, 30, scale);
    for (int j = 0; j <= 30; ++j) {
        const double ref = scale * boost::math::quadrature::gauss<double, 30>::integrate(
                                       [&](double z) { return z * legendre_on(z, j, s.b_min, s.b_max); },
                                       0.0, s.b_max);
        EXPECT_NEAR(a.coeffs[j], ref, 1e-13) << j;
    }
}

TEST(Legendre, ReconstructionWithinSupError) {
    const PayoffSupport s{-0.05, 0.02};
    const LegendreApprox a = legendre_payoff_coeffs(s, 12);
    EXPECT_GT(a.sup_error, 0.0);
    for (int i = 0; i <= 1000; ++i) {
        const double z = s.b_min + (s.b_max - s.b_min) * i / 1000.0;
        double direct = 0.0;
        for (int j = 0; j <= 12; ++j)
            direct += a.coeffs[j] * legendre_on(z, j, s.b_min, s.b_max);
        EXPECT_NEAR(a(z), direct, 1e-13);
        EXPECT_LE(std::abs(a(z) - std::max(z, 0.0)), a.sup_error + 1e-15);
    }
}

TEST(Legendre, ProjectionErrorDecreases) {
    // Squared L2 error is ||f||^2 - sum f_j^2 by Parseval.
    const PayoffSupport s{-0.04, 0.06};
    const double norm2 = std::pow(s.b_max, 3) / 3.0;
    const LegendreApprox a = legendre_payoff_coeffs(s, 30);
    double captured = 0.0;
    double prev = norm2;
    for (int j = 0; j <= 30; ++j) {
        captured += a.coeffs[j] * a.coeffs[j];
        const double err = norm2 - captured;
        EXPECT_LE(err, prev + 1e-18);
        EXPECT_GE(err, -1e-15);
        prev = err;
    }
}

TEST(Legendre, DegenerateSupport) {
    try {
        (void)legendre_payoff_coeffs({0.0, 0.0}, 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateSupport);
    }
}

TEST(ZMoments, LowOrders) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    const CdsLegs legs = section_legs();
    const double k = 0.03;
    const std::vector<double> z = z_moments(p, s, 0.0, 1.0, legs, k, 6);
    EXPECT_EQ(z[0], 1.0);
    const MomentOperator op(p, 2);
    const Vector mu = op.monomial_moments(s, 1.0);
    const Vector psi = psi_cds(legs, k);
    const auto& b = op.basis();
    const double ref = psi(0) * psi(0) * mu(b.index({2, 0})) +
                       2 * psi(0) * psi(1) * mu(b.index({1, 1})) +
                       psi(1) * psi(1) * mu(b.index({0, 2}));
    EXPECT_NEAR(z[2], ref, 1e-17);
}

TEST(ZMoments, MatchPowersOfLinearForm) {
    const LhcParams p = lc_test::table2_lhc(0);
    const State s{0.9, (Vector(2) << 0.2, 0.5).finished()};
    const CdsLegs legs = cds_legs(to_linear(p), 0.5, make_grid(0.5, 3.0), 0.01, 0.4);
    const std::vector<double> z = z_moments(p, s, 0.0, 0.5, legs, 0.02, 5);
    const MomentOperator op(p, 5);
    const Vector psi = psi_cds(legs, 0.02);
    Vector power = monomial_vector(op.basis(), {0, 0, 0});
    for (int j = 1; j <= 5; ++j) {
        power = times_linear(op.basis(), power, psi);
        EXPECT_NEAR(z[j], op.moment(s, power, 0.5), 1e-14 * std::pow(psi.cwiseAbs().sum(), j));
    }
}

TEST(CdsOption, DeterministicModel) {
    // With sigma = 0 and x = y the payoff value is known at t0.
    const LhcParams p = lc_test::constant_intensity(0.05);
    const State s{1.0, Vector::Constant(1, 1.0)};
    for (double strike : {0.02, 0.03, 0.04}) {
        CdsOptionSpec spec = section_spec(strike / kBasisPoint);
        spec.r = 0.01;
        const CdsLegs legs = cds_legs(to_linear(p), spec.t0, make_grid(spec.t0, spec.tM), spec.r,
                                      spec.recovery);
        const double y0 = std::exp(-0.05 * spec.t0);
        const double z = psi_cds(legs, spec.strike).sum() * y0;
        const double exact = std::exp(-spec.r * spec.t0) * std::max(z, 0.0);
        const OptionPrice o = cds_option_price(p, s, 0.0, spec, 30);
        EXPECT_NEAR(o.price, exact, o.error_bound + 1e-12) << strike;
    }
}

TEST(CdsOption, ConvergenceWithinBasisPoint) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    for (double k : {250.0, 300.0, 350.0}) {
        const OptionPrice p10 = cds_option_price(p, s, 0.0, section_spec(k), 10);
        const OptionPrice p30 = cds_option_price(p, s, 0.0, section_spec(k), 30);
        EXPECT_LT(std::abs(p10.price - p30.price) / kBasisPoint, 1.0) << k;
        EXPECT_GT(p30.price, 0.0);
    }
}

TEST(CdsOption, BoundNonincreasingAndConsistent) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    for (double k : {250.0, 300.0, 350.0}) {
        const OptionPrice ref = cds_option_price(p, s, 0.0, section_spec(k), 30);
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {1, 5, 10, 20, 30}) {
            const OptionPrice o = cds_option_price(p, s, 0.0, section_spec(k), n);
            EXPECT_LE(o.error_bound, prev + 1e-12) << k << " " << n;
            EXPECT_LE(std::abs(o.price - ref.price), o.error_bound + ref.error_bound + 1e-14);
            prev = o.error_bound;
        }
    }
}

TEST(CdsOption, MonotoneInStrike) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    double prev = std::numeric_limits<double>::infinity();
    for (double k = 150.0; k <= 450.0; k += 25.0) {
        const double price = cds_option_price(p, s, 0.0, section_spec(k), 20).price;
        EXPECT_LE(price, prev + 1e-12) << k;
        prev = price;
    }
}

TEST(CdsOption, NondecreasingInVolatility) {
    const State s = lc_test::one_factor_state();
    double prev = -1.0;
    for (double sigma : {0.25, 0.5, 0.75, 1.0}) {
        const double price =
            cds_option_price(lc_test::one_factor(sigma), s, 0.0, section_spec(300.0), 20).price;
        EXPECT_GE(price, prev) << sigma;
        prev = price;
    }
}

TEST(CdsOption, HugeStrike) {
    // The payoff vanishes on E, so the price is the approximation error alone.
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    const OptionPrice coarse = cds_option_price(p, s, 0.0, section_spec(1e4), 5);
    const OptionPrice fine = cds_option_price(p, s, 0.0, section_spec(1e4), 30);
    EXPECT_LE(std::abs(coarse.price), coarse.error_bound);
    EXPECT_LE(std::abs(fine.price), fine.error_bound);
    EXPECT_LT(std::abs(fine.price), std::abs(coarse.price));
}

TEST(CdsOption, ValuationAfterExpiry) {
    try {
        (void)cds_option_price(lc_test::one_factor(), lc_test::one_factor_state(), 2.0,
                               section_spec(300.0), 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
}

TEST(CdisPayoff, MatchesBinomialExpectation) {
    CdisPayoff f;
    f.N = 5;
    f.defaulted = 1;
    f.recovery = 0.35;
    f.y_t = 0.95;
    f.discount = 0.97;
    for (double y : {0.3, 0.7, 0.95})
        for (double x : {-0.05, -0.002, 0.0, 0.01, 0.04})
            EXPECT_NEAR(f(y, x), binomial_payoff(f, y, x), 1e-14) << y << " " << x;
}

TEST(CdisPayoff, SingleSurvivor) {
    CdisPayoff f;
    f.N = 3;
    f.defaulted = 2;
    f.recovery = 0.4;
    f.y_t = 0.9;
    const double y = 0.6, x = -0.01;
    const double ref = ((1 - 0.4) * 3 * (0.9 - y) + std::max(x + y * 0.6 * 2, 0.0)) / (3 * 0.9);
    EXPECT_NEAR(f(y, x), ref, 1e-15);
}

TEST(CdisPayoff, NoDecayAndFullRecovery) {
    CdisPayoff f;
    f.N = 4;
    f.defaulted = 1;
    f.recovery = 1.0;
    f.y_t = 0.8;
    for (double x : {-0.02, 0.03})
        EXPECT_NEAR(f(0.8, x), std::max(3 * x / 0.8, 0.0) / 4, 1e-15);
}

TEST(Chebyshev, Nodes) {
    const std::vector<double> x = chebyshev_nodes(-1.0, 1.0, 1);
    EXPECT_NEAR(x[0], std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(x[1], -std::sqrt(0.5), 1e-15);
}

TEST(Chebyshev, ReproducesPolynomials) {
    const auto f = [](double s, double x) {
        return 0.3 - 1.2 * s + 2.0 * s * s * x - 0.7 * std::pow(x, 4) + std::pow(s, 4) * std::pow(x, 3);
    };
    const Rect r{0.2, 0.9, -0.3, 0.5};
    const ChebGrid2D fit = cheb_fit_2d(f, r, 4);
    EXPECT_LT(cheb_sup_error(f, fit, 64), 1e-12);
}

TEST(Chebyshev, ExactAtNodes) {
    const auto f = [](double s, double x) { return std::max(x + s - 0.5, 0.0); };
    const Rect r{0.0, 1.0, -0.2, 0.3};
    const ChebGrid2D fit = cheb_fit_2d(f, r, 9);
    for (double s : chebyshev_nodes(r.a, r.b, 9))
        for (double x : chebyshev_nodes(r.c, r.d, 9))
            EXPECT_NEAR(fit(s, x), f(s, x), 1e-12);
}

TEST(CdisOption, SingleNameReduction) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    CdisOptionSpec spec;
    spec.cds = section_spec(300.0);
    spec.N = 1;
    const OptionPrice index = cdis_option_homogeneous(p, s, 0.0, spec, 16);
    const OptionPrice single = cds_option_price(p, s, 0.0, spec.cds, 30);
    const MomentOperator op(p, 1);
    const double ey = op.monomial_moments(s, 1.0)(1);
    const double loss = (1.0 - spec.cds.recovery) * (1.0 - ey / s.y);
    EXPECT_NEAR(index.price, single.price + loss, index.error_bound + single.error_bound);
}

TEST(CdisOption, DeterministicModel) {
    const LhcParams p = lc_test::constant_intensity(0.05);
    const State s{1.0, Vector::Constant(1, 1.0)};
    CdisOptionSpec spec;
    spec.cds = section_spec(300.0);
    spec.N = 6;
    spec.defaulted = 1;
    const CdsLegs legs = cds_legs(to_linear(p), 1.0, make_grid(1.0, 6.0), 0.0, 0.4);
    const double y = std::exp(-0.05);
    const double x = psi_cds(legs, spec.cds.strike).sum() * y;
    CdisPayoff f{6, 1, 0.4, 1.0, 1.0};
    const OptionPrice o = cdis_option_homogeneous(p, s, 0.0, spec, 12);
    EXPECT_NEAR(o.price, f(y, x), o.error_bound + 1e-12);
}

TEST(CdisOption, BoundDecreasesOverall) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    CdisOptionSpec spec;
    spec.cds = section_spec(300.0);
    spec.N = 10;
    const OptionPrice coarse = cdis_option_homogeneous(p, s, 0.0, spec, 4);
    const OptionPrice fine = cdis_option_homogeneous(p, s, 0.0, spec, 16);
    EXPECT_LT(fine.error_bound, coarse.error_bound);
    EXPECT_LE(std::abs(fine.price - coarse.price), fine.error_bound + coarse.error_bound);
}

TEST(CdisOption, ExpiryNow) {
    const LhcParams p = lc_test::one_factor();
    const State s = lc_test::one_factor_state();
    CdisOptionSpec spec;
    spec.cds = section_spec(300.0);
    spec.cds.t0 = 0.0;
    spec.N = 3;
    const OptionPrice o = cdis_option_homogeneous(p, s, 0.0, spec, 8);
    EXPECT_EQ(o.error_bound, 0.0);
    EXPECT_GE(o.price, 0.0);
}
