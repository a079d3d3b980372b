// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/options.hpp"

#include "linearcredit/errors.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace linearcredit {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_support(const PayoffSupport& s) {
    require(std::isfinite(s.b_min) && std::isfinite(s.b_max), ErrorKind::InvalidInput,
            "payoff support is not finite");
    require(s.b_max > s.b_min, ErrorKind::DegenerateSupport,
            "degenerate payoff support [" + std::to_string(s.b_min) + ", " +
                std::to_string(s.b_max) + "]");
}

/// Le_0(u), ..., Le_n(u) for the standard Legendre polynomials.
template <typename T>
std::vector<T> legendre_values(T u, int n) {
    std::vector<T> le(static_cast<std::size_t>(n) + 1);
    le[0] = 1;
    if (n >= 1)
        le[1] = u;
    for (int k = 1; k < n; ++k)
        le[k + 1] = (T(2 * k + 1) * u * le[k] - T(k) * le[k - 1]) / T(k + 1);
    return le;
}

/// p * (lin^T (y, x) + c0) in the basis.
ExtVector times_affine(const MonomialBasis& basis, const ExtVector& p, const ExtVector& lin,
                       const Extended& c0) {
    ExtVector out = times_linear(basis, p, lin);
    out += c0 * p;
    return out;
}

ExtVector unit_ext(std::size_t n) {
    ExtVector v = ExtVector::Zero(static_cast<Eigen::Index>(n));
    v(0) = 1;
    return v;
}

Extended dot(const ExtVector& a, const ExtVector& b) {
    Extended s = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        s += a(i) * b(i);
    return s;
}

ExtVector to_ext(const Vector& v) {
    ExtVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out(i) = v(i);
    return out;
}

void check_option_times(double t, double t0, double tM) {
    require(std::isfinite(t) && std::isfinite(t0) && std::isfinite(tM), ErrorKind::InvalidInput,
            "option times must be finite");
    require(t <= t0, ErrorKind::Domain, "valuation time after option expiry");
    require(t0 < tM, ErrorKind::InvalidInput, "option expiry must precede CDS maturity");
}

CdsLegs option_legs(const LhcParams& p, const CdsOptionSpec& spec) {
    const TenorGrid grid = make_grid(spec.t0, spec.tM, spec.frequency);
    return cds_legs(to_linear(p), spec.t0, grid, spec.r, spec.recovery);
}

}  // namespace

Vector psi_cds(const CdsLegs& legs, double k) {
    require(legs.prot.size() == legs.prem.size(), ErrorKind::InvalidInput,
            "psi_cds: leg dimension mismatch");
    return legs.prot - k * legs.prem;
}

PayoffSupport cds_option_support(const CdsLegs& legs, double k) {
    const Vector psi = psi_cds(legs, k);
    PayoffSupport s;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        s.b_min += std::min(0.0, psi(i));
        s.b_max += std::max(0.0, psi(i));
    }
    return s;
}

double legendre_norm(const PayoffSupport& s, int j) {
    return std::sqrt((2.0 * j + 1.0) / (s.b_max - s.b_min));
}

double LegendreApprox::operator()(double z) const {
    const double mu = 0.5 * (support.b_min + support.b_max);
    const double sigma = 0.5 * (support.b_max - support.b_min);
    const double u = (z - mu) / sigma;
    // Clenshaw recurrence for sum_k c_k Le_k(u), Le_{k+1} = alpha_k Le_k + beta_k Le_{k-1}.
    double b1 = 0.0, b2 = 0.0;
    for (int k = order; k >= 1; --k) {
        const double ck = coeffs[static_cast<std::size_t>(k)] * legendre_norm(support, k);
        const double alpha = (2.0 * k + 1.0) * u / (k + 1.0);
        const double beta = -(k + 1.0) / (k + 2.0);
        const double bk = ck + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = bk;
    }
    const double c0 = coeffs[0] * legendre_norm(support, 0);
    return c0 + u * b1 - 0.5 * b2;
}

LegendreApprox legendre_payoff_coeffs(const PayoffSupport& support, int order, double scale,
                                      int grid_points) {
    check_support(support);
    require(order >= 0, ErrorKind::InvalidInput, "approximation order must be nonnegative");
    require(grid_points >= 2, ErrorKind::InvalidInput, "validation grid needs two points");

    LegendreApprox out;
    out.order = order;
    out.support = support;
    out.scale = scale;

    const Extended lo = support.b_min;
    const Extended hi = support.b_max;
    const Extended mu = (lo + hi) / 2;
    const Extended sigma = (hi - lo) / 2;
    // Payoff z^+ is nonzero on u in [u0, 1].
    Extended u0 = -mu / sigma;
    u0 = std::clamp(u0, Extended(-1), Extended(1));
    const std::vector<Extended> le = legendre_values(u0, order + 2);

    // A_j = int_{u0}^1 Le_j, B_j = int_{u0}^1 u Le_j.
    std::vector<Extended> a(static_cast<std::size_t>(order) + 2);
    a[0] = 1 - u0;
    for (int j = 1; j <= order + 1; ++j)
        a[j] = (le[j - 1] - le[j + 1]) / Extended(2 * j + 1);
    out.coeffs.resize(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j) {
        const Extended bj =
            (Extended(j + 1) * a[j + 1] + (j > 0 ? Extended(j) * a[j - 1] : Extended(0))) /
            Extended(2 * j + 1);
        const Extended norm = boost::multiprecision::sqrt(Extended(2 * j + 1) / (hi - lo));
        out.coeffs[j] = static_cast<double>(Extended(scale) * norm * sigma * (mu * a[j] + sigma * bj));
    }

    double err = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double z = support.b_min +
                         (support.b_max - support.b_min) * i / static_cast<double>(grid_points - 1);
        err = std::max(err, std::abs(scale * std::max(z, 0.0) - out(z)));
    }
    out.sup_error = err;
    return out;
}

std::vector<double> z_moments(const LhcParams& p, const State& s, double t, double t0,
                              const CdsLegs& legs, double k, int order) {
    require(order >= 0, ErrorKind::InvalidInput, "moment order must be nonnegative");
    require(t <= t0, ErrorKind::Domain, "valuation time after option expiry");
    const Vector psi = psi_cds(legs, k);
    require(psi.size() == p.m + 1, ErrorKind::InvalidInput, "z_moments: leg dimension mismatch");
    const MomentOperator op(p, order);
    const MonomialBasis& basis = op.basis();
    const ExtVector mu = op.monomial_moments_ext(s, t0 - t);

    // c_alpha = sum_i 1{alpha_i >= 1} c_{alpha - e_i} psi_i.
    ExtVector c = ExtVector::Zero(static_cast<Eigen::Index>(basis.size()));
    c(0) = 1;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (c(static_cast<Eigen::Index>(j)) == 0)
            continue;
        for (int v = 0; v <= p.m; ++v) {
            const std::size_t nxt = basis.successor(j, v);
            if (nxt != MonomialBasis::npos)
                c(static_cast<Eigen::Index>(nxt)) += c(static_cast<Eigen::Index>(j)) * psi(v);
        }
    }
    std::vector<double> out(static_cast<std::size_t>(order) + 1);
    for (int d = 0; d <= order; ++d) {
        Extended sum = 0;
        const std::size_t off = basis.block_begin(d);
        for (std::size_t q = off; q < off + basis.block_size(d); ++q)
            sum += c(static_cast<Eigen::Index>(q)) * mu(static_cast<Eigen::Index>(q));
        out[d] = static_cast<double>(sum);
    }
    return out;
}

OptionPrice cds_option_price(const LhcParams& p, const State& s, double t,
                             const CdsOptionSpec& spec, int order) {
    check_dimensions(p);
    check_state(s, p.m);
    check_option_times(t, spec.t0, spec.tM);
    require(order >= 0, ErrorKind::InvalidInput, "approximation order must be nonnegative");

    const CdsLegs legs = option_legs(p, spec);
    const PayoffSupport support = cds_option_support(legs, spec.strike);
    const double scale = std::exp(-spec.r * (spec.t0 - t)) / s.y;
    const LegendreApprox approx = legendre_payoff_coeffs(support, order, scale);

    const MomentOperator op(p, std::max(order, 1));
    const MonomialBasis& basis = op.basis();
    const ExtVector mu = op.monomial_moments_ext(s, spec.t0 - t);

    // Orthonormal Legendre polynomials of W = (Z - mid) / half-width, as
    // coefficient vectors in the monomial basis.
    const Extended mid = (Extended(support.b_min) + support.b_max) / 2;
    const Extended half = (Extended(support.b_max) - support.b_min) / 2;
    const ExtVector lin = to_ext(psi_cds(legs, spec.strike)) / half;
    const Extended c0 = -mid / half;

    ExtVector prev = unit_ext(basis.size());
    ExtVector cur;
    Extended price = Extended(approx.coeffs[0]) * legendre_norm(support, 0) * dot(prev, mu);
    if (order >= 1) {
        cur = times_affine(basis, prev, lin, c0);
        price += Extended(approx.coeffs[1]) * legendre_norm(support, 1) * dot(cur, mu);
    }
    for (int j = 1; j < order; ++j) {
        ExtVector next = times_affine(basis, cur, lin, c0) * Extended(2 * j + 1) / Extended(j + 1) -
                         prev * Extended(j) / Extended(j + 1);
        price += Extended(approx.coeffs[j + 1]) * legendre_norm(support, j + 1) * dot(next, mu);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return {static_cast<double>(price), approx.sup_error};
}

double CdisPayoff::operator()(double y, double x) const {
    const int alive = N - defaulted;
    double sum = (1.0 - recovery) * N * std::pow(y_t - y, alive);
    for (int j = 1; j <= alive; ++j) {
        const double inner = j * x + y * (1.0 - recovery) * (N - j);
        if (inner <= 0.0)
            continue;
        sum += boost::math::binomial_coefficient<double>(static_cast<unsigned>(alive),
                                                         static_cast<unsigned>(j)) *
               inner * std::pow(y, j - 1) * std::pow(y_t - y, alive - j);
    }
    return discount / (N * std::pow(y_t, alive)) * sum;
}

std::vector<double> chebyshev_nodes(double a, double b, int order) {
    require(order >= 0, ErrorKind::InvalidInput, "Chebyshev order must be nonnegative");
    const double mu = 0.5 * (a + b);
    const double sigma = 0.5 * (b - a);
    std::vector<double> x(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j)
        x[j] = mu + sigma * std::cos((0.5 + j) * kPi / (order + 1));
    return x;
}

namespace {

std::vector<double> chebyshev_values(double u, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    t[0] = 1.0;
    if (n >= 1)
        t[1] = u;
    for (int k = 1; k < n; ++k)
        t[k + 1] = 2.0 * u * t[k] - t[k - 1];
    return t;
}

}  // namespace

double ChebGrid2D::operator()(double s, double x) const {
    const double us = (s - 0.5 * (rect.a + rect.b)) / (0.5 * (rect.b - rect.a));
    const double ux = (x - 0.5 * (rect.c + rect.d)) / (0.5 * (rect.d - rect.c));
    const std::vector<double> ts = chebyshev_values(us, order);
    const std::vector<double> tx = chebyshev_values(ux, order);
    double sum = 0.0;
    for (int n = 0; n <= order; ++n)
        for (int m = 0; m <= order; ++m)
            sum += coeffs(n, m) * ts[n] * tx[m];
    return sum;
}

ChebGrid2D cheb_fit_2d(const std::function<double(double, double)>& f, const Rect& rect,
                       int order) {
    require(order >= 0, ErrorKind::InvalidInput, "Chebyshev order must be nonnegative");
    require(rect.b > rect.a && rect.d > rect.c, ErrorKind::DegenerateSupport,
            "degenerate interpolation rectangle");
    const int n1 = order + 1;
    const std::vector<double> xs = chebyshev_nodes(rect.a, rect.b, order);
    const std::vector<double> xx = chebyshev_nodes(rect.c, rect.d, order);
    Matrix values(n1, n1);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j)
            values(i, j) = f(xs[i], xx[j]);
    // cos(n z_i) for every order n and node i.
    Matrix cosines(n1, n1);
    for (int n = 0; n < n1; ++n)
        for (int i = 0; i < n1; ++i)
            cosines(n, i) = std::cos(n * (0.5 + i) * kPi / n1);

    ChebGrid2D out;
    out.order = order;
    out.rect = rect;
    out.coeffs = cosines * values * cosines.transpose() / (static_cast<double>(n1) * n1);
    for (int n = 0; n < n1; ++n)
        for (int m = 0; m < n1; ++m)
            out.coeffs(n, m) *= std::ldexp(1.0, (n != 0) + (m != 0));
    return out;
}

double cheb_sup_error(const std::function<double(double, double)>& f, const ChebGrid2D& fit,
                      int grid_points) {
    require(grid_points >= 2, ErrorKind::InvalidInput, "validation grid needs two points");
    const Rect& r = fit.rect;
    double err = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double s = r.a + (r.b - r.a) * i / static_cast<double>(grid_points - 1);
        for (int j = 0; j < grid_points; ++j) {
            const double x = r.c + (r.d - r.c) * j / static_cast<double>(grid_points - 1);
            err = std::max(err, std::abs(f(s, x) - fit(s, x)));
        }
    }
    return err;
}

OptionPrice cdis_option_homogeneous(const LhcParams& p, const State& s, double t,
                                    const CdisOptionSpec& spec, int order) {
    check_dimensions(p);
    check_state(s, p.m);
    const CdsOptionSpec& cds = spec.cds;
    check_option_times(t, cds.t0, cds.tM);
    require(spec.N >= 1 && spec.defaulted >= 0 && spec.defaulted < spec.N,
            ErrorKind::InvalidInput, "CDIS option needs at least one surviving name");
    require(order >= 0, ErrorKind::InvalidInput, "Chebyshev order must be nonnegative");

    const CdsLegs legs = option_legs(p, cds);
    const Vector psi = psi_cds(legs, cds.strike);
    const PayoffSupport support = cds_option_support(legs, cds.strike);
    check_support(support);

    CdisPayoff payoff;
    payoff.N = spec.N;
    payoff.defaulted = spec.defaulted;
    payoff.recovery = cds.recovery;
    payoff.y_t = s.y;
    payoff.discount = std::exp(-cds.r * (cds.t0 - t));

    const double h = cds.t0 - t;
    if (h == 0.0)
        return {payoff(s.y, psi.dot(stacked(s))), 0.0};

    Rect rect;
    rect.a = std::exp(-p.gamma.sum() * h) * s.y;
    rect.b = s.y;
    if (rect.b - rect.a <= 1e-12 * rect.b)
        rect.a = rect.b * (1.0 - 1e-9);
    rect.c = support.b_min * s.y;
    rect.d = support.b_max * s.y;
    const auto f = [&payoff](double y, double x) { return payoff(y, x); };
    const ChebGrid2D fit = cheb_fit_2d(f, rect, order);
    const double bound = cheb_sup_error(f, fit);

    const MomentOperator op(p, std::max(2 * order, 1));
    const MonomialBasis& basis = op.basis();
    const ExtVector mu = op.monomial_moments_ext(s, h);
    const auto dim = static_cast<Eigen::Index>(basis.size());

    // Scaled coordinates as affine forms in (y, x).
    ExtVector lin_s = ExtVector::Zero(p.m + 1);
    const Extended half_s = (Extended(rect.b) - rect.a) / 2;
    lin_s(0) = 1 / half_s;
    const Extended c_s = -((Extended(rect.a) + rect.b) / 2) / half_s;
    const Extended half_x = (Extended(rect.d) - rect.c) / 2;
    const ExtVector lin_x = to_ext(psi) / half_x;
    const Extended c_x = -((Extended(rect.c) + rect.d) / 2) / half_x;

    Extended price = 0;
    ExtVector ts_prev = ExtVector::Zero(dim);
    ExtVector ts = ExtVector::Zero(dim);
    for (int n = 0; n <= order; ++n) {
        if (n == 0) {
            ts = unit_ext(basis.size());
        } else if (n == 1) {
            ts_prev = ts;
            ts = times_affine(basis, ts_prev, lin_s, c_s);
        } else {
            ExtVector next = 2 * times_affine(basis, ts, lin_s, c_s) - ts_prev;
            ts_prev = std::move(ts);
            ts = std::move(next);
        }
        // T_n(s) T_m(x) for m = 0..N.
        ExtVector q_prev = ts;
        price += Extended(fit.coeffs(n, 0)) * dot(q_prev, mu);
        if (order == 0)
            continue;
        ExtVector q = times_affine(basis, q_prev, lin_x, c_x);
        price += Extended(fit.coeffs(n, 1)) * dot(q, mu);
        for (int m = 2; m <= order; ++m) {
            ExtVector next = 2 * times_affine(basis, q, lin_x, c_x) - q_prev;
            price += Extended(fit.coeffs(n, m)) * dot(next, mu);
            q_prev = std::move(q);
            q = std::move(next);
        }
    }
    return {static_cast<double>(price), bound};
}

}  // namespace linearcredit
