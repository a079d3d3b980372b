// SPDX-License-Identifier: Apache-2.0
//
// CDS quote panels, per-date factor filtering and calibration of cascade
// models by penalized Nelder-Mead.
#pragma once

#include "linearcredit/model.hpp"
#include "linearcredit/pricing.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace linearcredit {

struct Quote {
    double tenor = 0.0;      // years
    double spread_bp = 0.0;
};

struct QuoteDate {
    std::string date;  // ISO-8601
    std::vector<Quote> quotes;
};

struct QuotePanel {
    std::string firm;
    double recovery = 0.4;
    double r = 0.0;
    int frequency = 4;
    std::vector<QuoteDate> dates;
};

/// Days between two ISO dates divided by 365.25.
double year_fraction(const std::string& from, const std::string& to);
/// The date `days` after an ISO date.
std::string add_days(const std::string& date, int days);

void check_panel(const QuotePanel& panel);

/// Reads `date,tenor_years,spread_bp` rows (header required), grouping rows
/// by date. Dates must be ascending.
QuotePanel read_panel_csv(std::istream& in);
QuotePanel load_panel(const std::string& path);
void write_panel_csv(std::ostream& out, const QuotePanel& panel);

/// Sorted distinct tenors over all dates.
std::vector<double> panel_tenors(const QuotePanel& panel);

/// Spot CDS legs for each tenor, in the (1, z) basis. Time homogeneous, so
/// they serve every date.
struct TenorLegs {
    std::vector<double> tenors;
    std::vector<Vector> prot;
    std::vector<Vector> prem;

    [[nodiscard]] std::size_t index(double tenor) const;
};

TenorLegs tenor_legs(const LhcParams& p, const std::vector<double>& tenors, double r,
                     double recovery, int frequency = 4);

/// min 0.5 |G z + c|^2 subject to 0 <= z <= 1.
struct BoxLsqResult {
    Vector z;
    double objective = 0.0;
    /// Gradient G^T (G z + c); the KKT multipliers of the active bounds.
    Vector gradient;
    int iterations = 0;
    bool kkt = false;
    bool fallback = false;
};

BoxLsqResult box_lsq(const Matrix& G, const Vector& c, const Vector& start,
                     double kkt_tol = 1e-10);

struct FilterStep {
    bool skipped = false;
    Vector z;
    /// Mean of squared weighted pricing errors.
    double residual = 0.0;
    BoxLsqResult solve;
};

/// Factor z at one date: minimizes the mean of (psi_cds^T (1; z) / w_k)^2
/// with weights w_k = psi_prem^T (1; z_prev). Dates without quotes are skipped.
FilterStep filter_date(const TenorLegs& legs, const QuoteDate& quotes, const Vector& z_prev);
FilterStep filter_date(const LhccParams& params, const QuoteDate& quotes, const Vector& z_prev,
                       double r, double recovery, int frequency = 4);

struct FilterOutput {
    std::vector<std::string> dates;
    std::vector<double> times;
    Matrix z;  // dates x m
    std::vector<double> y;
    Matrix x;  // dates x m
    std::vector<double> residual;
    std::vector<bool> skipped;
};

/// Sequential filter with Y_0 = 1, Y_i = Y_{i-1} - gamma1 X_{1,i-1} dt and
/// X_i = Y_i z_i. The first date weights use z_prev = 1/2. A skipped date
/// repeats the previous z.
FilterOutput filter_panel(const LhccParams& params, const QuotePanel& panel);
FilterOutput filter_panel(const LhccParams& params, const QuotePanel& panel,
                          const TenorLegs& legs);

struct MaturityStats {
    double tenor = 0.0;
    std::size_t count = 0;
    double rmse = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Pricing errors in bp, model minus market.
struct RmseReport {
    MaturityStats all;
    std::vector<MaturityStats> by_maturity;
};

RmseReport rmse_report(const FilterOutput& filter, const QuotePanel& panel,
                       const LhccParams& params);
RmseReport rmse_report(const FilterOutput& filter, const QuotePanel& panel,
                       const TenorLegs& legs);
/// Rows RMSE, Median, Min, Max; columns all and one per maturity.
void write_report_csv(std::ostream& out, const RmseReport& report);
void write_factors_csv(std::ostream& out, const FilterOutput& filter);

struct CalibOptions {
    int m = 2;
    std::optional<double> fixed_gamma1;
    int starts = 16;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Nelder-Mead iterations per pass; a second pass restarts from the first.
    int max_iterations = 3000;
    /// Stop when the RMSE spread over the simplex falls below this (bp).
    double spread_tol = 1e-6;
    /// Volatility carried into the result; not fitted.
    double sigma = 0.5;
    double penalty = 1e6;
};

struct CalibStart {
    double objective = 0.0;
    int iterations = 0;
    bool feasible = false;
};

struct CalibResult {
    LhccParams params;
    double objective = 0.0;  // mean squared error in bp^2
    RmseReport report;
    FilterOutput filter;
    std::size_t best_start = 0;
    std::vector<CalibStart> starts;
};

/// Free parameters: gamma1 (unless fixed), kappa and theta. Iterates use
/// log gamma1, log kappa_i and a logistic share of 1 - gamma1/kappa_i for
/// theta_i; violations of the cascade constraint are penalized.
CalibResult calibrate(const QuotePanel& panel, const CalibOptions& opt);

/// Mean squared pricing error in bp^2 after filtering.
double calibration_mse(const LhccParams& params, const QuotePanel& panel);

/// Noiseless panel from a factor path simulated with daily Euler steps and
/// sampled every `step_days`. Dates start at `start`.
struct SyntheticSpec {
    std::size_t dates = 520;
    int step_days = 7;
    std::vector<double> tenors{1, 2, 3, 4, 5, 7, 10};
    double r = 0.0;
    double recovery = 0.4;
    int frequency = 4;
    std::string start = "2005-01-03";
    std::uint64_t seed = 1;
};

struct SyntheticPanel {
    QuotePanel panel;
    std::vector<double> y;
    Matrix x;
};

SyntheticPanel synthetic_panel(const LhccParams& params, const State& s0,
                               const SyntheticSpec& spec);

}  // namespace linearcredit
