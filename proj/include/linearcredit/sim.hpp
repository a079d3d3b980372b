// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo engine: Euler scheme for LHC factors with boundary clamping,
// doubly stochastic default times, common jumps, the Gamma clock drift and
// oracle estimators for the closed-form prices.
#pragma once

#include "linearcredit/linmat.hpp"
#include "linearcredit/model.hpp"
#include "linearcredit/options.hpp"
#include "linearcredit/portfolio.hpp"
#include "linearcredit/pricing.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace linearcredit {

struct PathConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    /// Clamp diffusion arguments and post-step states into E.
    bool clamp = true;
    /// Keep every k-th grid point in stored ensembles.
    int record_every = 1;
    int threads = 1;
};

void check_config(const PathConfig& cfg);

/// Independent engine for (seed, path, stream), seeded through splitmix64.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream = 0);

/// One simulated path of one or more LHC blocks on a common time grid.
struct Path {
    std::vector<std::vector<double>> y;  // per block, per grid point
    std::vector<Matrix> x;               // per block, m x points
    /// jump[k] != 0 when a common jump hit at the end of step k.
    std::vector<char> jump;
    std::size_t clamped = 0;
    std::size_t increments = 0;
};

struct PathEnsemble {
    std::vector<double> times;
    std::vector<Path> paths;

    [[nodiscard]] std::size_t size() const { return paths.size(); }
    /// Fraction of factor increments that needed clamping.
    [[nodiscard]] double clamped_fraction() const;
};

/// Number of Euler steps and the matching grid on [0, horizon].
std::vector<double> time_grid(const PathConfig& cfg);

/// Fine-grid path `index` for a single block.
Path simulate_path(const LhcParams& p, const State& s0, const PathConfig& cfg,
                   std::size_t index);

PathEnsemble simulate_paths(const LhcParams& p, const State& s0, const PathConfig& cfg);

/// tau = inf{t : S_t <= u} with exponential interpolation of S within a step;
/// crossings in a step ending with a jump happen at the jump. +inf if none.
double first_crossing(const std::vector<double>& times, const std::vector<double>& s, double u,
                      const std::vector<char>* jumps = nullptr);

/// Survival path S^i = sum_j w_ij Y^j from the rows of `weights` (firms x blocks).
std::vector<double> firm_survival(const Path& path, const Matrix& weights, std::size_t firm);

/// One independent uniform threshold per firm per path. Result [path][firm].
std::vector<std::vector<double>> sample_defaults(const PathEnsemble& ens, const Matrix& weights,
                                                 std::uint64_t seed);

/// Common driver of the jump-diffusion: compound Poisson with Beta sizes.
struct JumpProcess {
    double rate = 0.0;
    double beta_a = 2.0;
    double beta_b = 2.0;

    [[nodiscard]] double mean() const { return rate * beta_a / (beta_a + beta_b); }
};

/// Block loadings on the common jump.
struct JumpSpec {
    double c = 0.0;
    Vector delta;
    Vector nu;
};

void check_jump(const LhcParams& p, const JumpSpec& jump, const JumpProcess& z);

/// Expected drift of (Y, X) under the jump-diffusion.
Matrix jump_drift_matrix(const LhcParams& p, const JumpSpec& jump, const JumpProcess& z);

/// Blocks driven by independent Brownian motions and one common jump process.
Path simulate_jump_path(const std::vector<LhcParams>& blocks, const std::vector<JumpSpec>& jumps,
                        const JumpProcess& z, const std::vector<State>& s0,
                        const PathConfig& cfg, std::size_t index);

PathEnsemble simulate_jump_paths(const std::vector<LhcParams>& blocks,
                                 const std::vector<JumpSpec>& jumps, const JumpProcess& z,
                                 const std::vector<State>& s0, const PathConfig& cfg);

enum class ClockKind { Gamma, Generic };

struct ClockSpec {
    ClockKind kind = ClockKind::Gamma;
    double gamma_z = 1.0;
    double lambda_z = 1.0;
    double b_z = 0.0;
    /// Levy density for the generic kind; defaults to the Gamma density.
    std::function<double(double)> levy_density;
};

/// b_Z A + int_0^inf (e^{A z} - Id) nu(dz).
Matrix clock_drift(const Matrix& a, const ClockSpec& clock);

struct NegcorConfig {
    double epsilon = 0.1;
    double kappa = 0.5;
    double sigma = 0.3;
    double x0 = 0.0;
    PathConfig paths;
};

struct NegcorResult {
    /// Mean over paths of sum_k d(lambda^1)_k d(lambda^2)_k.
    double covariation = 0.0;
    double se = 0.0;
    double max_lambda = 0.0;
    /// max over steps of |X_t| - e^{-epsilon t}.
    double max_band_excess = 0.0;
};

NegcorResult negcor_example(const NegcorConfig& cfg);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t paths = 0;
    double clamped_fraction = 0.0;
};

enum class McContract {
    BondZero,
    BondMaturity,
    BondDefault,
    DefaultPayment,
    DefaultTimePayment,
    CdsProtection,
    CdsPremium,
    CdsSpread,
    CdsOption,
    Ucva,
};

struct McContractSpec {
    McContract kind = McContract::BondZero;
    double t0 = 0.0;
    double tM = 1.0;
    double r = 0.0;
    double recovery = 0.4;
    double strike = 0.0;
    int frequency = 4;
    /// Exposure f(y, x) paid at default for UCVA.
    std::function<double(double, const Vector&)> exposure;
};

/// Pathwise estimate at t = 0. The horizon follows the contract.
McEstimate mc_price(const LhcParams& p, const State& s0, const McContractSpec& contract,
                    const PathConfig& cfg);

/// Several contracts priced on one set of paths; the horizon is the longest
/// one required.
std::vector<McEstimate> mc_price_many(const LhcParams& p, const State& s0,
                                      const std::vector<McContractSpec>& contracts,
                                      const PathConfig& cfg);

/// Sample moments of every monomial of degree <= degree at the horizon.
std::vector<McEstimate> mc_monomial_moments(const LhcParams& p, const State& s0, int degree,
                                            const PathConfig& cfg);

/// Tranche legs for N firms sharing one block, valued at 0.
struct McTranche {
    McEstimate prot;
    McEstimate prem;
};
McTranche mc_tranche_legs(const LhcParams& p, const State& s0, const TenorGrid& grid,
                          const TrancheSpec& spec, double r, const PathConfig& cfg);

/// CDIS option over all 2^N survival configurations at t0, with the factor
/// expectation by simulation. Linear construction only; N <= 12.
McEstimate cdis_option_exact(const Portfolio& pf, const std::vector<State>& states,
                             const std::vector<bool>& alive, double t, const CdsOptionSpec& spec,
                             const PathConfig& cfg);

/// Fixed-order pairwise sum.
double pairwise_sum(const double* v, std::size_t n);

}  // namespace linearcredit
