// SPDX-License-Identifier: Apache-2.0
//
// CDS and CDIS options by polynomial payoff approximation and the moment
// formula: Fourier-Legendre series for the single-name payoff, tensor
// Chebyshev interpolation for the homogeneous index payoff.
#pragma once

#include "linearcredit/model.hpp"
#include "linearcredit/moments.hpp"
#include "linearcredit/pricing.hpp"

#include <functional>
#include <vector>

namespace linearcredit {

struct PayoffSupport {
    double b_min = 0.0;
    double b_max = 0.0;
};

/// psi_prot - k psi_prem.
Vector psi_cds(const CdsLegs& legs, double k);

/// Range of psi_cds^T (y, x) over E.
PayoffSupport cds_option_support(const CdsLegs& legs, double k);

/// Orthonormal Legendre expansion of scale * z^+ on [b_min, b_max].
struct LegendreApprox {
    int order = 0;
    PayoffSupport support;
    double scale = 1.0;
    /// f_j = scale * \int_0^{b_max} z Le_j(z) dz for the orthonormal Le_j.
    std::vector<double> coeffs;
    /// max |scale z^+ - approximation| over the validation grid.
    double sup_error = 0.0;

    /// Clenshaw evaluation of the truncated series.
    [[nodiscard]] double operator()(double z) const;
};

/// sqrt((2j + 1) / (b_max - b_min)).
double legendre_norm(const PayoffSupport& s, int j);

LegendreApprox legendre_payoff_coeffs(const PayoffSupport& support, int order,
                                      double scale = 1.0, int grid_points = 10000);

/// E[Z^j | F_t], j = 0..order, Z = psi_cds^T (Y_{t0}, X_{t0}).
std::vector<double> z_moments(const LhcParams& p, const State& s, double t, double t0,
                              const CdsLegs& legs, double k, int order);

struct OptionPrice {
    double price = 0.0;
    double error_bound = 0.0;
};

struct CdsOptionSpec {
    double t0 = 1.0;
    double tM = 6.0;
    double strike = 0.03;
    double recovery = 0.4;
    double r = 0.0;
    int frequency = 4;
};

/// Price of the option to enter the CDS at t0, valued at t <= t0 for a firm
/// alive at t.
OptionPrice cds_option_price(const LhcParams& p, const State& s, double t,
                             const CdsOptionSpec& spec, int order);

/// Payoff of the homogeneous CDIS option as a function of the survival level
/// y = a^T Y_{t0} and x = psi_cds^T (Y_{t0}, X_{t0}).
struct CdisPayoff {
    int N = 1;
    int defaulted = 0;
    double recovery = 0.4;
    double y_t = 1.0;
    double discount = 1.0;

    [[nodiscard]] double operator()(double y, double x) const;
};

struct Rect {
    double a = -1.0, b = 1.0;  // first coordinate
    double c = -1.0, d = 1.0;  // second coordinate
};

/// Tensor Chebyshev interpolant of order N on a rectangle.
struct ChebGrid2D {
    int order = 0;
    Rect rect;
    Matrix coeffs;  // (N + 1) x (N + 1)

    [[nodiscard]] double operator()(double s, double x) const;
};

/// Chebyshev nodes mu + sigma cos((j + 1/2) pi / (N + 1)), j = 0..N.
std::vector<double> chebyshev_nodes(double a, double b, int order);

ChebGrid2D cheb_fit_2d(const std::function<double(double, double)>& f, const Rect& rect,
                       int order);

/// max |f - fit| over a uniform grid_points x grid_points grid.
double cheb_sup_error(const std::function<double(double, double)>& f, const ChebGrid2D& fit,
                      int grid_points = 256);

struct CdisOptionSpec {
    CdsOptionSpec cds;
    int N = 1;
    int defaulted = 0;
};

/// Homogeneous CDIS option: Chebyshev fit of the bivariate payoff and
/// expectation by bivariate moments of (a^T Y_{t0}, psi_cds^T (Y_{t0}, X_{t0})).
OptionPrice cdis_option_homogeneous(const LhcParams& p, const State& s, double t,
                                    const CdisOptionSpec& spec, int order);

}  // namespace linearcredit
