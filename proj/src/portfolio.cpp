// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/portfolio.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/quadrature.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

namespace linearcredit {

namespace {

std::vector<int> block_offsets(const Portfolio& pf) {
    std::vector<int> off(pf.blocks.size() + 1, 0);
    for (std::size_t j = 0; j < pf.blocks.size(); ++j)
        off[j + 1] = off[j] + pf.blocks[j].m;
    return off;
}

void check_states(const Portfolio& pf, const std::vector<State>& states) {
    require(states.size() == pf.blocks.size(), ErrorKind::InvalidInput,
            "portfolio: need one state per block");
    for (std::size_t j = 0; j < states.size(); ++j)
        check_state(states[j], pf.blocks[j].m);
}

double binom(int n, int k) {
    return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n),
                                                     static_cast<unsigned>(k));
}

}  // namespace

void check_portfolio(const Portfolio& pf) {
    require(!pf.blocks.empty(), ErrorKind::InvalidInput, "portfolio: no blocks");
    require(!pf.firms.empty(), ErrorKind::EmptyPortfolio, "portfolio: no firms");
    require(pf.recovery >= 0.0 && pf.recovery <= 1.0, ErrorKind::InvalidInput,
            "portfolio: recovery must lie in [0, 1]");
    const auto d = static_cast<Eigen::Index>(pf.blocks.size());
    for (const auto& b : pf.blocks)
        check_dimensions(b);
    for (std::size_t i = 0; i < pf.firms.size(); ++i) {
        const Firm& f = pf.firms[i];
        const std::string who = "portfolio: firm " + std::to_string(i + 1);
        if (pf.construction == Construction::Linear) {
            require(f.weights.size() == d, ErrorKind::InvalidInput, who + " has wrong weight count");
            require(f.weights.minCoeff() >= 0.0 && std::abs(f.weights.sum() - 1.0) <= 1e-12,
                    ErrorKind::InvalidInput, who + " weights must be nonnegative and sum to 1");
        } else {
            require(static_cast<Eigen::Index>(f.exponents.size()) == d, ErrorKind::InvalidInput,
                    who + " has wrong exponent count");
            for (int e : f.exponents)
                require(e >= 0, ErrorKind::InvalidInput, who + " has a negative exponent");
        }
    }
}

LinearModel stacked_model(const Portfolio& pf, std::size_t firm) {
    check_portfolio(pf);
    require(pf.construction == Construction::Linear, ErrorKind::Unsupported,
            "stacked_model: requires the linear construction");
    require(firm < pf.size(), ErrorKind::InvalidInput, "stacked_model: firm index out of range");
    const std::vector<int> off = block_offsets(pf);
    const int d = static_cast<int>(pf.blocks.size());
    const int m = off.back();
    LinearModel lm;
    lm.n = d;
    lm.m = m;
    lm.c = Matrix::Zero(d, d);
    lm.gamma_block = Matrix::Zero(d, m);
    lm.b = Matrix::Zero(m, d);
    lm.beta = Matrix::Zero(m, m);
    for (int j = 0; j < d; ++j) {
        const LhcParams& p = pf.blocks[j];
        lm.gamma_block.block(j, off[j], 1, p.m) = -p.gamma.transpose();
        lm.b.block(off[j], j, p.m, 1) = p.b;
        lm.beta.block(off[j], off[j], p.m, p.m) = p.beta;
    }
    lm.a = pf.firms[firm].weights;
    return lm;
}

Vector stacked_state(const std::vector<State>& states) {
    Eigen::Index m = 0;
    for (const auto& s : states)
        m += s.x.size();
    const auto d = static_cast<Eigen::Index>(states.size());
    Vector v(d + m);
    Eigen::Index pos = d;
    for (Eigen::Index j = 0; j < d; ++j) {
        v(j) = states[j].y;
        v.segment(pos, states[j].x.size()) = states[j].x;
        pos += states[j].x.size();
    }
    return v;
}

Vector shadow_intensities(const Portfolio& pf, const std::vector<State>& states) {
    check_states(pf, states);
    Vector h(static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j)
        h(static_cast<Eigen::Index>(j)) = intensity(to_linear(pf.blocks[j]), states[j]);
    return h;
}

Vector intensity_weights(const Portfolio& pf, std::size_t firm, const std::vector<State>& states) {
    check_portfolio(pf);
    check_states(pf, states);
    require(pf.construction == Construction::Linear, ErrorKind::Unsupported,
            "intensity_weights: requires the linear construction");
    require(firm < pf.size(), ErrorKind::InvalidInput, "intensity_weights: firm out of range");
    const Vector& a = pf.firms[firm].weights;
    Vector w(a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j)
        w(j) = a(j) * states[static_cast<std::size_t>(j)].y;
    const double s = w.sum();
    require(s > 0.0, ErrorKind::Domain, "intensity_weights: zero survival level");
    return w / s;
}

double firm_intensity(const Portfolio& pf, std::size_t firm, const std::vector<State>& states) {
    check_portfolio(pf);
    require(firm < pf.size(), ErrorKind::InvalidInput, "firm_intensity: firm out of range");
    const Vector h = shadow_intensities(pf, states);
    if (pf.construction == Construction::Linear)
        return intensity_weights(pf, firm, states).dot(h);
    double lam = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j)
        lam += pf.firms[firm].exponents[j] * h(static_cast<Eigen::Index>(j));
    return lam;
}

double polynomial_survival(const Portfolio& pf, std::size_t firm,
                           const std::vector<State>& states, double h) {
    check_portfolio(pf);
    check_states(pf, states);
    require(pf.construction == Construction::Polynomial, ErrorKind::Unsupported,
            "polynomial_survival: requires the polynomial construction");
    require(firm < pf.size(), ErrorKind::InvalidInput, "polynomial_survival: firm out of range");
    double out = 1.0;
    for (std::size_t j = 0; j < pf.blocks.size(); ++j) {
        const int e = pf.firms[firm].exponents[j];
        if (e == 0)
            continue;
        const MomentOperator op(pf.blocks[j], e);
        Exponents alpha(pf.blocks[j].m + 1, 0);
        alpha[0] = e;
        out *= op.moment(states[j], monomial_vector(op.basis(), alpha), h) /
               std::pow(states[j].y, e);
    }
    return out;
}

double cdis_spread(const Portfolio& pf, const std::vector<State>& states,
                   const std::vector<bool>& alive, double t, const TenorGrid& grid, double r) {
    check_portfolio(pf);
    check_states(pf, states);
    require(alive.size() == pf.size(), ErrorKind::InvalidInput,
            "cdis_spread: need one alive flag per firm");
    const Vector yx = stacked_state(states);
    double prot = 0.0;
    double prem = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        if (!alive[i])
            continue;
        any = true;
        const LinearModel lm = stacked_model(pf, i);
        const CdsLegs legs = cds_legs(lm, t, grid, r, pf.recovery);
        prot += value(lm, legs.prot, yx);
        prem += value(lm, legs.prem, yx);
    }
    require(any, ErrorKind::EmptyPortfolio, "cdis_spread: every firm has defaulted");
    require(prem > 0.0, ErrorKind::DegenerateAnnuity, "cdis_spread: premium leg is not positive");
    return prot / prem;
}

std::vector<double> default_count_distribution(const std::vector<double>& ratios,
                                               const std::vector<bool>& alive) {
    require(ratios.size() == alive.size(), ErrorKind::InvalidInput,
            "default_count_distribution: size mismatch");
    const std::size_t N = ratios.size();
    for (std::size_t i = 0; i < N; ++i)
        require(!alive[i] || (ratios[i] >= 0.0 && ratios[i] <= 1.0), ErrorKind::InvalidInput,
                "default_count_distribution: survival ratio outside [0, 1]");
    const double two_pi = boost::math::constants::two_pi<double>();
    const double L = static_cast<double>(N + 1);
    std::vector<std::complex<double>> phi(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        const std::complex<double> z = std::polar(1.0, two_pi * static_cast<double>(j) / L);
        std::complex<double> prod = 1.0;
        for (std::size_t i = 0; i < N; ++i)
            prod *= alive[i] ? z + (1.0 - z) * ratios[i] : z;
        phi[j] = prod;
    }
    std::vector<double> out(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        std::complex<double> sum = 0.0;
        for (std::size_t j = 0; j <= N; ++j)
            sum += std::polar(1.0, -two_pi * static_cast<double>((n * j) % (N + 1)) / L) * phi[j];
        sum /= L;
        require(std::abs(sum.imag()) <= 1e-10, ErrorKind::Domain,
                "default_count_distribution: imaginary residue too large");
        out[n] = sum.real();
    }
    return out;
}

std::vector<double> default_count_homogeneous(int N, int defaulted, double ratio) {
    require(N >= 1 && defaulted >= 0 && defaulted <= N, ErrorKind::InvalidInput,
            "default_count_homogeneous: need 0 <= defaulted <= N");
    require(ratio >= 0.0 && ratio <= 1.0, ErrorKind::InvalidInput,
            "default_count_homogeneous: survival ratio outside [0, 1]");
    const int alive = N - defaulted;
    std::vector<double> out(static_cast<std::size_t>(N + 1), 0.0);
    for (int j = 0; j <= alive; ++j)
        out[static_cast<std::size_t>(defaulted + j)] =
            binom(alive, j) * std::pow(ratio, alive - j) * std::pow(1.0 - ratio, j);
    return out;
}

namespace {

void check_tranche(const TrancheSpec& s) {
    require(s.N >= 1 && s.defaulted >= 0 && s.defaulted <= s.N, ErrorKind::InvalidInput,
            "tranche: need 0 <= defaulted <= N");
    require(s.n_a >= 0 && s.n_a < s.n_d && s.n_d <= s.N, ErrorKind::InvalidInput,
            "tranche: need 0 <= n_a < n_d <= N");
    require(s.recovery >= 0.0 && s.recovery <= 1.0, ErrorKind::InvalidInput,
            "tranche: recovery must lie in [0, 1]");
}

double tranche_loss(const TrancheSpec& s, int k) {
    const int j = std::clamp(k - s.n_a, 0, s.n_d - s.n_a);
    return (1.0 - s.recovery) * j / s.N;
}

// Coefficients g_p of E[T_u] = sum_p g_p Y_u^p, for survival level y_t.
std::vector<Extended> loss_polynomial(const TrancheSpec& s, const Extended& y_t) {
    const int alive = s.N - s.defaulted;
    std::vector<Extended> g(static_cast<std::size_t>(alive + 1), Extended(0));
    Extended scale = 1;
    for (int i = 0; i < alive; ++i)
        scale *= y_t;
    for (int j = 0; j <= alive; ++j) {
        const double loss = tranche_loss(s, s.defaulted + j);
        if (loss == 0.0)
            continue;
        // C(alive, j) s^{alive-j} (y_t - s)^j
        for (int q = 0; q <= j; ++q) {
            Extended c = Extended(binom(alive, j)) * Extended(binom(j, q)) * Extended(loss);
            for (int e = 0; e < j - q; ++e)
                c *= y_t;
            if (q % 2 == 1)
                c = -c;
            g[static_cast<std::size_t>(alive - j + q)] += c / scale;
        }
    }
    return g;
}

}  // namespace

double expected_tranche_loss(const TrancheSpec& spec, double ratio) {
    check_tranche(spec);
    const std::vector<double> dist = default_count_homogeneous(spec.N, spec.defaulted, ratio);
    double out = 0.0;
    for (int k = 0; k <= spec.N; ++k)
        out += tranche_loss(spec, k) * dist[static_cast<std::size_t>(k)];
    return out;
}

TrancheLegs tranche_legs_homogeneous(const LhcParams& p, const State& s, double t,
                                     const TenorGrid& grid, const TrancheSpec& spec, double r,
                                     int prot_nodes, int prem_nodes, int degree_limit) {
    check_tranche(spec);
    check_grid(grid);
    check_state(s, p.m);
    require(t <= grid.t0, ErrorKind::InvalidInput, "tranche: valuation time after t0");
    const int alive = spec.N - spec.defaulted;
    require(alive <= degree_limit, ErrorKind::Capacity,
            "tranche: moment degree " + std::to_string(alive) + " exceeds limit " +
                std::to_string(degree_limit));
    const double width = (1.0 - spec.recovery) * (spec.n_d - spec.n_a) / spec.N;
    TrancheLegs legs;
    if (alive == 0) {
        const double loss = tranche_loss(spec, spec.defaulted);
        for (std::size_t j = 0; j < grid.dates.size(); ++j)
            legs.prem += std::exp(-r * (grid.dates[j] - t)) * grid.accrual(j) * (width - loss);
        return legs;
    }

    const MomentOperator op(p, alive, degree_limit);
    const MonomialBasis& basis = op.basis();
    const std::vector<Extended> g = loss_polynomial(spec, Extended(s.y));

    // Density of E[T_u]: E[g'(Y_u) dY_u/du] = -sum_p p g_p sum_i gamma_i E[Y^{p-1} X_i].
    ExtVector dens = ExtVector::Zero(static_cast<Eigen::Index>(basis.size()));
    ExtVector level = ExtVector::Zero(static_cast<Eigen::Index>(basis.size()));
    Exponents alpha(p.m + 1, 0);
    for (int q = 0; q <= alive; ++q) {
        const Extended gq = g[static_cast<std::size_t>(q)];
        alpha.assign(p.m + 1, 0);
        alpha[0] = q;
        level(static_cast<Eigen::Index>(basis.index(alpha))) += gq;
        if (q == 0)
            continue;
        for (int i = 0; i < p.m; ++i) {
            alpha.assign(p.m + 1, 0);
            alpha[0] = q - 1;
            alpha[i + 1] = 1;
            dens(static_cast<Eigen::Index>(basis.index(alpha))) -=
                Extended(q) * gq * Extended(p.gamma(i));
        }
    }

    auto expect = [&](const ExtVector& poly, double h) {
        const ExtVector mu = op.monomial_moments_ext(s, h);
        return static_cast<double>(poly.dot(mu));
    };

    const double tM = grid.maturity();
    legs.prot = integrate(
        [&](double u) { return std::exp(-r * (u - t)) * expect(dens, u - t); }, grid.t0, tM,
        prot_nodes);
    for (std::size_t j = 0; j < grid.dates.size(); ++j) {
        const double a = j == 0 ? grid.t0 : grid.dates[j - 1];
        const double b = grid.dates[j];
        const double nominal = integrate(
            [&](double u) { return width - expect(level, u - t); }, a, b, prem_nodes);
        legs.prem += std::exp(-r * (b - t)) * nominal;
    }
    return legs;
}

double tranche_price_homogeneous(const LhcParams& p, const State& s, double t,
                                 const TenorGrid& grid, const TrancheSpec& spec, double r,
                                 double k) {
    const TrancheLegs legs = tranche_legs_homogeneous(p, s, t, grid, spec, r);
    return legs.prot - k * legs.prem;
}

Matrix rates_credit_matrix(const RatesCreditModel& model) {
    const LhcParams& p1 = model.rates;
    const LhcParams& p2 = model.credit;
    require(p1.m == 1 && p2.m == 1, ErrorKind::InvalidInput,
            "rates_credit: both blocks must be one-factor");
    check_dimensions(p1);
    check_dimensions(p2);
    require(model.nu >= 0.0 && model.nu <= 1.0, ErrorKind::InvalidInput,
            "rates_credit: nu must lie in [0, 1]");
    const double g1 = p1.gamma(0), b1 = p1.b(0), be1 = p1.beta(0, 0), s1 = p1.sigma(0);
    const double g2 = p2.gamma(0), b2 = p2.b(0), be2 = p2.beta(0, 0);
    // Rows: y1^2, y1 y2, y1 x1, y1 x2, x1 y2, x1^2, x1 x2.
    Matrix a = Matrix::Zero(7, 7);
    a(0, 2) = -2.0 * g1;
    a(1, 3) = -g2;
    a(1, 4) = -g1;
    a(2, 0) = b1;
    a(2, 2) = be1;
    a(2, 5) = -g1;
    a(3, 1) = b2;
    a(3, 3) = be2;
    a(3, 6) = -g1;
    a(4, 1) = b1;
    a(4, 4) = be1;
    a(4, 6) = -g2;
    a(5, 2) = 2.0 * b1 + s1 * s1;
    a(5, 5) = 2.0 * be1 - s1 * s1;
    a(6, 3) = b1;
    a(6, 4) = b2;
    a(6, 6) = be1 + be2;
    return a;
}

Vector rates_credit_state(const State& rates, const State& credit) {
    check_state(rates, 1);
    check_state(credit, 1);
    const double y1 = rates.y, x1 = rates.x(0), y2 = credit.y, x2 = credit.x(0);
    Vector v(7);
    v << y1 * y1, y1 * y2, y1 * x1, y1 * x2, x1 * y2, x1 * x1, x1 * x2;
    return v;
}

LinearModel rates_credit_linear(const RatesCreditModel& model) {
    const Matrix a = rates_credit_matrix(model);
    LinearModel lm;
    lm.n = 2;
    lm.m = 5;
    lm.c = a.topLeftCorner(2, 2);
    lm.gamma_block = a.topRightCorner(2, 5);
    lm.b = a.bottomLeftCorner(5, 2);
    lm.beta = a.bottomRightCorner(5, 5);
    lm.a = Vector(2);
    lm.a << model.nu, 1.0 - model.nu;
    return lm;
}

double rates_credit_bond(const RatesCreditModel& model, const Vector& state7, double t,
                         double tM) {
    require(state7.size() == 7, ErrorKind::InvalidInput, "rates_credit_bond: need a 7-vector");
    const LinearModel lm = rates_credit_linear(model);
    return value(lm, psi_z(lm, t, tM, 0.0), state7);
}

}  // namespace linearcredit
