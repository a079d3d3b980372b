// SPDX-License-Identifier: Apache-2.0
//
// Multi-name constructions on independent LHC blocks, index spreads, the
// default-count distribution, homogeneous tranches and a two-block model with
// stochastic discounting.
#pragma once

#include "linearcredit/model.hpp"
#include "linearcredit/moments.hpp"
#include "linearcredit/pricing.hpp"

#include <vector>

namespace linearcredit {

enum class Construction { Linear, Polynomial };

/// Linear construction uses `weights` over the block survival levels;
/// polynomial construction uses `exponents`.
struct Firm {
    Vector weights;
    std::vector<int> exponents;
};

struct Portfolio {
    std::vector<LhcParams> blocks;
    std::vector<Firm> firms;
    double recovery = 0.4;
    Construction construction = Construction::Linear;

    [[nodiscard]] std::size_t size() const { return firms.size(); }
};

void check_portfolio(const Portfolio& pf);

/// Linear model on the stacked state (Y^1..Y^d, X^1..X^d) with survival
/// weights of the given firm.
LinearModel stacked_model(const Portfolio& pf, std::size_t firm);
Vector stacked_state(const std::vector<State>& states);

/// h^j = gamma^j^T X^j / Y^j.
Vector shadow_intensities(const Portfolio& pf, const std::vector<State>& states);
/// Linear: sum_j w_ij h_j with w_ij = a_ij Y^j / S^i. Polynomial: alpha^T h.
double firm_intensity(const Portfolio& pf, std::size_t firm, const std::vector<State>& states);
/// Weights w_i of the linear construction.
Vector intensity_weights(const Portfolio& pf, std::size_t firm, const std::vector<State>& states);

/// Survival ratio E[S_u] / S_t for a polynomial firm, by per-block moments.
double polynomial_survival(const Portfolio& pf, std::size_t firm,
                           const std::vector<State>& states, double h);

/// Index spread (rate). Firms flagged as defaulted do not contribute.
double cdis_spread(const Portfolio& pf, const std::vector<State>& states,
                   const std::vector<bool>& alive, double t, const TenorGrid& grid, double r);

/// P(N_u = n), n = 0..N, given survival ratios S_u^i / S_t^i of the alive
/// firms, by discrete Fourier inversion.
std::vector<double> default_count_distribution(const std::vector<double>& ratios,
                                               const std::vector<bool>& alive);

/// Homogeneous closed form: binomial in the common survival ratio.
std::vector<double> default_count_homogeneous(int N, int defaulted, double ratio);

struct TrancheSpec {
    int N = 1;
    int defaulted = 0;
    int n_a = 0;
    int n_d = 1;
    double recovery = 0.4;
};

struct TrancheLegs {
    double prot = 0.0;
    double prem = 0.0;
};

/// Expected tranche loss E[T_u] for a homogeneous portfolio as a function of
/// the survival ratio S_u / S_t.
double expected_tranche_loss(const TrancheSpec& spec, double ratio);

/// Protection and premium legs for a homogeneous portfolio of firms sharing
/// one LHC block. Discounting is relative to t.
TrancheLegs tranche_legs_homogeneous(const LhcParams& p, const State& s, double t,
                                     const TenorGrid& grid, const TrancheSpec& spec, double r,
                                     int prot_nodes = 64, int prem_nodes = 32,
                                     int degree_limit = 15);

double tranche_price_homogeneous(const LhcParams& p, const State& s, double t,
                                 const TenorGrid& grid, const TrancheSpec& spec, double r,
                                 double k);

/// Two independent one-factor blocks; block 1 drives the discount factor
/// D = Y^1 and the firm survives along S = nu Y^1 + (1 - nu) Y^2.
struct RatesCreditModel {
    LhcParams rates;
    LhcParams credit;
    double nu = 0.5;
};

/// Drift matrix on (y1^2, y1 y2, y1 x1, y1 x2, x1 y2, x1^2, x1 x2).
Matrix rates_credit_matrix(const RatesCreditModel& model);
/// Second-order state vector built from the two block states.
Vector rates_credit_state(const State& rates, const State& credit);
LinearModel rates_credit_linear(const RatesCreditModel& model);
/// E[D_T S_T] / (D_t S_t).
double rates_credit_bond(const RatesCreditModel& model, const Vector& state7, double t,
                         double tM);

}  // namespace linearcredit
