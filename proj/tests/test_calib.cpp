// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "linearcredit/calib.hpp"
#include "linearcredit/errors.hpp"
#include "linearcredit/pricing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace linearcredit;

namespace {

LhccParams binding(LhccParams p) {
    p.theta = (1.0 - p.gamma1 / p.kappa.array()).matrix();
    return p;
}

LhccParams bombardier() { return binding(lc_test::table2()[0].params); }

State start_state(int m, double z = 0.3) { return State{1.0, Vector::Constant(m, z)}; }

SyntheticPanel short_panel(const LhccParams& p, std::size_t dates, std::uint64_t seed = 3) {
    SyntheticSpec spec;
    spec.dates = dates;
    spec.r = 0.0252;
    spec.seed = seed;
    return synthetic_panel(p, start_state(p.m), spec);
}

// Spread in bp through the pricing module at the normalized state (1, z).
double direct_spread_bp(const LhccParams& p, double tenor, const Vector& z, double r,
                        double recovery) {
    const State s{1.0, z};
    return 1e4 * cds_spread(to_linear(lhcc_embed(p)), stacked(s), 0.0, make_grid(0.0, tenor), r,
                            recovery);
}

double brute_force_min(const Matrix& G, const Vector& c, int n) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            Vector z(2);
            z << double(i) / n, double(j) / n;
            best = std::min(best, 0.5 * (G * z + c).squaredNorm());
        }
    return best;
}

}  // namespace

TEST(Dates, YearFraction) {
    EXPECT_DOUBLE_EQ(year_fraction("2005-01-03", "2006-01-03"), 365.0 / 365.25);
    EXPECT_DOUBLE_EQ(year_fraction("2008-02-28", "2008-03-01"), 2.0 / 365.25);
    EXPECT_EQ(add_days("2008-02-25", 7), "2008-03-03");
    EXPECT_EQ(add_days("2005-12-29", 7), "2006-01-05");
    EXPECT_THROW(year_fraction("2005-02-30", "2006-01-01"), Error);
    EXPECT_THROW(year_fraction("2005-1-3", "2006-01-01"), Error);
}

TEST(QuoteCsv, ParsesAndGroups) {
    std::istringstream in("date,tenor_years,spread_bp\n"
                          "2005-01-03,1,120.5\n2005-01-03,5,300\n"
                          "2005-01-10,1,121\n\n");
    const QuotePanel p = read_panel_csv(in);
    ASSERT_EQ(p.dates.size(), 2u);
    EXPECT_EQ(p.dates[0].quotes.size(), 2u);
    EXPECT_DOUBLE_EQ(p.dates[0].quotes[1].spread_bp, 300.0);
    EXPECT_EQ(panel_tenors(p), (std::vector<double>{1.0, 5.0}));

    std::ostringstream out;
    write_panel_csv(out, p);
    std::istringstream back(out.str());
    const QuotePanel q = read_panel_csv(back);
    EXPECT_EQ(q.dates.size(), 2u);
    EXPECT_DOUBLE_EQ(q.dates[0].quotes[0].spread_bp, 120.5);
}

TEST(QuoteCsv, Rejections) {
    const auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return read_panel_csv(in);
    };
    EXPECT_THROW(parse("2005-01-03,1,120\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-03,1\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-03,1,-1\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-03,0,10\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-03,1,10\n2005-01-03,1,11\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-10,1,10\n2005-01-03,1,11\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n2005-01-03,1,abc\n"), Error);
    EXPECT_THROW(parse("date,tenor_years,spread_bp\n"), Error);
}

TEST(BoxLsq, InteriorRecovery) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + trial % 4;
        const Matrix G = lc_test::random_matrix(rng, 7, 1.0).leftCols(m);
        Vector zs(m);
        for (int i = 0; i < m; ++i)
            zs(i) = u(rng);
        const Vector c = -G * zs;
        const BoxLsqResult r = box_lsq(G, c, Vector::Constant(m, 0.5));
        EXPECT_TRUE(r.kkt);
        EXPECT_LT((r.z - zs).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(BoxLsq, CornerWithMultipliers) {
    // The first quote wants z1 = 2, the second wants z2 = -0.5.
    Matrix G(2, 2);
    G << 1, 0, 0, 1;
    Vector c(2);
    c << -2.0, 0.5;
    const BoxLsqResult r = box_lsq(G, c, Vector::Constant(2, 0.5));
    EXPECT_TRUE(r.kkt);
    EXPECT_DOUBLE_EQ(r.z(0), 1.0);
    EXPECT_DOUBLE_EQ(r.z(1), 0.0);
    // Upper bound multiplier is -g, lower bound multiplier is g.
    EXPECT_GT(-r.gradient(0), 0.0);
    EXPECT_GT(r.gradient(1), 0.0);
}

TEST(BoxLsq, MatchesGridSearch) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix G = lc_test::random_matrix(rng, 3, 1.0).leftCols(2);
        Vector c(3);
        c << u(rng), u(rng), u(rng);
        Vector start(2);
        start << 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng);
        const BoxLsqResult r = box_lsq(G, c, start);
        EXPECT_TRUE(r.kkt);
        EXPECT_LE(r.objective, brute_force_min(G, c, 400) + 1e-12);
        EXPECT_LE(r.objective, 0.5 * (G * start + c).squaredNorm() + 1e-15);
        for (double a : {0.0, 1.0})
            for (double b : {0.0, 1.0}) {
                Vector corner(2);
                corner << a, b;
                EXPECT_LE(r.objective, 0.5 * (G * corner + c).squaredNorm() + 1e-15);
            }
    }
}

TEST(BoxLsq, RankDeficient) {
    Matrix G(3, 2);
    G << 1, 1, 2, 2, -1, -1;
    Vector c = -G * Vector::Constant(2, 0.4);
    const BoxLsqResult r = box_lsq(G, c, Vector::Constant(2, 0.9));
    EXPECT_TRUE(r.kkt);
    EXPECT_NEAR(r.objective, 0.0, 1e-24);
    EXPECT_NEAR(r.z.sum(), 0.8, 1e-12);
}

TEST(FilterDate, ExactlyIdentified) {
    const LhccParams p = lc_test::lhcc(0.2, {0.5}, {0.5});
    const double r = 0.01;
    const double recovery = 0.4;
    const double spread = direct_spread_bp(p, 5.0, Vector::Constant(1, 0.4), r, recovery);
    const QuoteDate d{"2005-01-03", {{5.0, spread}}};
    const FilterStep step = filter_date(p, d, Vector::Constant(1, 0.5), r, recovery);
    ASSERT_FALSE(step.skipped);
    // Affine equation psi_cds(0) + psi_cds(1) z = 0.
    const CdsLegs legs =
        cds_legs(to_linear(lhcc_embed(p)), 0.0, make_grid(0.0, 5.0), r, recovery);
    const Vector psi = legs.prot - spread * 1e-4 * legs.prem;
    EXPECT_NEAR(step.z(0), -psi(0) / psi(1), 1e-12);
    EXPECT_NEAR(step.z(0), 0.4, 1e-10);
    EXPECT_NEAR(step.residual, 0.0, 1e-24);
}

TEST(FilterDate, SyntheticInversion) {
    const LhccParams p = binding(lc_test::table2()[1].params);
    Vector zs(3);
    zs << 0.7, 0.35, 0.15;
    QuoteDate d{"2005-01-03", {}};
    for (double t : {1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0})
        d.quotes.push_back({t, direct_spread_bp(p, t, zs, 0.0252, 0.4)});
    const FilterStep step = filter_date(p, d, Vector::Constant(3, 0.5), 0.0252, 0.4);
    EXPECT_TRUE(step.solve.kkt);
    EXPECT_LT((step.z - zs).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FilterDate, SkipAndPreconditions) {
    const LhccParams p = bombardier();
    const FilterStep step = filter_date(p, QuoteDate{"2005-01-03", {}}, Vector::Constant(2, 0.2),
                                        0.0, 0.4);
    EXPECT_TRUE(step.skipped);
    EXPECT_DOUBLE_EQ(step.z(0), 0.2);
    EXPECT_THROW(filter_date(p, QuoteDate{"2005-01-03", {{1.0, 10.0}}}, Vector::Constant(2, 1.5),
                             0.0, 0.4),
                 Error);
}

TEST(FilterPanel, NoDecayWithoutGamma) {
    LhccParams p = bombardier();
    p.gamma1 = 0.0;
    p.theta = Vector::Constant(2, 0.5);
    const SyntheticPanel syn = short_panel(bombardier(), 30);
    const FilterOutput f = filter_panel(p, syn.panel);
    for (double y : f.y)
        EXPECT_DOUBLE_EQ(y, 1.0);
}

TEST(FilterPanel, ReconstructsSimulatedFactors) {
    const LhccParams p = bombardier();
    const SyntheticPanel syn = short_panel(p, 105);
    const FilterOutput f = filter_panel(p, syn.panel);
    const double dt = 7.0 / 365.25;
    for (std::size_t i = 0; i < f.y.size(); ++i) {
        EXPECT_NEAR(f.y[i], syn.y[i], 1e-3);
        EXPECT_LT((f.x.row(i) - syn.x.row(i)).cwiseAbs().maxCoeff(), 2e-3);
        EXPECT_LE(f.residual[i], 1e-20);
        EXPECT_GE(f.y[i], std::exp(-p.gamma1 * f.times[i]) - 10 * dt);
        if (i > 0)
            EXPECT_LE(f.y[i], f.y[i - 1]);
        EXPECT_TRUE((f.z.row(i).array() >= 0.0).all() && (f.z.row(i).array() <= 1.0).all());
    }
}

TEST(FilterPanel, SkippedDateFlagged) {
    const LhccParams p = bombardier();
    SyntheticPanel syn = short_panel(p, 6);
    syn.panel.dates[3].quotes.clear();
    const FilterOutput f = filter_panel(p, syn.panel);
    EXPECT_TRUE(f.skipped[3]);
    EXPECT_FALSE(f.skipped[4]);
    EXPECT_EQ(f.z.row(3), f.z.row(2));
    EXPECT_LT(f.y[3], f.y[2]);
}

TEST(Rmse, ZeroAndShift) {
    const LhccParams p = bombardier();
    const SyntheticPanel syn = short_panel(p, 20);
    const FilterOutput f = filter_panel(p, syn.panel);
    const RmseReport zero = rmse_report(f, syn.panel, p);
    EXPECT_LT(zero.all.rmse, 1e-9);
    EXPECT_LT(std::abs(zero.all.max) + std::abs(zero.all.min), 1e-9);

    QuotePanel shifted = syn.panel;
    for (auto& d : shifted.dates)
        for (auto& q : d.quotes)
            q.spread_bp += 2.0;
    const RmseReport rep = rmse_report(f, shifted, p);
    EXPECT_NEAR(rep.all.rmse, 2.0, 1e-9);
    EXPECT_NEAR(rep.all.median, -2.0, 1e-9);
    ASSERT_EQ(rep.by_maturity.size(), 7u);
    for (const auto& s : rep.by_maturity) {
        EXPECT_EQ(s.count, 20u);
        EXPECT_NEAR(s.rmse, 2.0, 1e-9);
    }
}

TEST(Rmse, Recomputation) {
    const LhccParams p = bombardier();
    const SyntheticPanel syn = short_panel(p, 12);
    QuotePanel noisy = syn.panel;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> e(0.0, 5.0);
    for (auto& d : noisy.dates) {
        d.quotes.resize(3 + static_cast<std::size_t>(rng() % 5));
        for (auto& q : d.quotes)
            q.spread_bp = std::max(0.0, q.spread_bp + e(rng));
    }
    const FilterOutput f = filter_panel(p, noisy);
    const RmseReport rep = rmse_report(f, noisy, p);
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < noisy.dates.size(); ++i)
        for (const auto& q : noisy.dates[i].quotes) {
            const double err = direct_spread_bp(p, q.tenor, f.z.row(i).transpose(), noisy.r,
                                                noisy.recovery) -
                               q.spread_bp;
            sq += err * err;
            ++n;
        }
    EXPECT_EQ(rep.all.count, n);
    EXPECT_NEAR(rep.all.rmse, std::sqrt(sq / n), 1e-9);
    EXPECT_NEAR(calibration_mse(p, noisy), sq / n, 1e-7);
}

TEST(Rmse, CsvLayout) {
    RmseReport rep;
    rep.all = {0.0, 3, 1.5, -0.5, -1.0, 2.0};
    rep.by_maturity = {{1.0, 1, 1.0, 0.0, 0.0, 0.0}, {5.0, 2, 2.0, 1.0, -1.0, 2.0}};
    std::ostringstream out;
    write_report_csv(out, rep);
    EXPECT_EQ(out.str(), "stat,all,1,5\n"
                         "RMSE,1.5000,1.0000,2.0000\n"
                         "Median,-0.5000,0.0000,1.0000\n"
                         "Min,-1.0000,0.0000,-1.0000\n"
                         "Max,2.0000,0.0000,2.0000\n");
}

TEST(Calibration, ObjectiveIgnoresQuoteOrder) {
    const LhccParams p = bombardier();
    QuotePanel panel = short_panel(p, 15).panel;
    for (auto& d : panel.dates)
        for (auto& q : d.quotes)
            q.spread_bp *= 1.1;
    const double base = calibration_mse(p, panel);
    std::mt19937_64 rng(4);
    for (auto& d : panel.dates)
        std::shuffle(d.quotes.begin(), d.quotes.end(), rng);
    EXPECT_NEAR(calibration_mse(p, panel), base, 1e-9 * base);
}

TEST(Calibration, SingleQuote) {
    QuotePanel panel;
    panel.dates = {QuoteDate{"2005-01-03", {{5.0, 180.0}}}};
    CalibOptions opt;
    opt.m = 1;
    opt.starts = 4;
    const CalibResult r = calibrate(panel, opt);
    EXPECT_LT(r.report.all.rmse, 1e-6);
    EXPECT_GE(lhcc_slack(r.params).minCoeff(), 0.0);
}

TEST(Calibration, ShortPanelFitAndFixedGamma) {
    // Two years of weekly data pin the spreads, not the factor scale.
    const LhccParams truth = bombardier();
    const SyntheticPanel syn = short_panel(truth, 104);
    CalibOptions opt;
    opt.starts = 4;
    opt.threads = 2;
    const CalibResult free = calibrate(syn.panel, opt);
    EXPECT_LT(free.report.all.rmse, 0.1);
    EXPECT_GE(lhcc_slack(free.params).minCoeff(), 0.0);
    EXPECT_LT(calibration_mse(free.params, syn.panel), 1e-2);

    opt.fixed_gamma1 = 2.0 * free.params.gamma1;
    const CalibResult fixed = calibrate(syn.panel, opt);
    EXPECT_DOUBLE_EQ(fixed.params.gamma1, 2.0 * free.params.gamma1);
    EXPECT_GE(fixed.objective, free.objective);
    EXPECT_GE(lhcc_slack(fixed.params).minCoeff(), 0.0);
}

TEST(Calibration, DeterministicAcrossThreads) {
    const SyntheticPanel syn = short_panel(bombardier(), 10);
    CalibOptions opt;
    opt.starts = 3;
    opt.max_iterations = 200;
    opt.threads = 1;
    const CalibResult a = calibrate(syn.panel, opt);
    opt.threads = 3;
    const CalibResult b = calibrate(syn.panel, opt);
    EXPECT_EQ(a.best_start, b.best_start);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_EQ(a.params.kappa, b.params.kappa);
}

TEST(Calibration, Preconditions) {
    QuotePanel empty;
    EXPECT_THROW(calibrate(empty, CalibOptions{}), Error);
    QuotePanel one;
    one.dates = {QuoteDate{"2005-01-03", {{5.0, 180.0}}}};
    CalibOptions opt;
    opt.starts = 0;
    EXPECT_THROW(calibrate(one, opt), Error);
}
