// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/calib.hpp"

#include "linearcredit/detail/parallel.hpp"
#include "linearcredit/errors.hpp"
#include "linearcredit/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace linearcredit {

namespace {

constexpr double kBp = 1e4;
constexpr double kDaysPerYear = 365.25;
constexpr double kFailedObjective = 1e12;

std::chrono::sys_days parse_date(const std::string& s) {
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    char tail = 0;
    const bool shaped = s.size() == 10 && s[4] == '-' && s[7] == '-' &&
                        std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &mo, &d, &tail) == 3;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                          std::chrono::day{d}};
    require(shaped && ymd.ok(), ErrorKind::InvalidInput, "invalid ISO date \"" + s + "\"");
    return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days t) {
    const std::chrono::year_month_day ymd{t};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == s.size() && !s.empty() && std::isfinite(v), ErrorKind::InvalidInput,
            where + ": not a number \"" + s + "\"");
    return v;
}

Vector one_z(const Vector& z) {
    Vector v(z.size() + 1);
    v(0) = 1.0;
    v.tail(z.size()) = z;
    return v;
}

double box_objective(const Matrix& G, const Vector& c, const Vector& z) {
    return 0.5 * (G * z + c).squaredNorm();
}

bool kkt_holds(const Vector& z, const Vector& g, double tol) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (z(i) < 0.0 || z(i) > 1.0)
            return false;
        if (z(i) == 0.0 && g(i) < -tol)
            return false;
        if (z(i) == 1.0 && g(i) > tol)
            return false;
        if (z(i) > 0.0 && z(i) < 1.0 && std::abs(g(i)) > tol)
            return false;
    }
    return true;
}

/// Least-squares minimizer over the free coordinates of one face.
Vector solve_face(const Matrix& G, const Vector& c, const std::vector<int>& face) {
    const auto m = G.cols();
    Vector z(m);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (face[static_cast<std::size_t>(i)] == 0)
            free.push_back(i);
        else
            z(i) = face[static_cast<std::size_t>(i)] == 1 ? 0.0 : 1.0;
    }
    if (free.empty())
        return z;
    Vector rhs = -c;
    for (Eigen::Index i = 0; i < m; ++i)
        if (face[static_cast<std::size_t>(i)] != 0)
            rhs -= G.col(i) * z(i);
    Matrix GF(G.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k)
        GF.col(static_cast<Eigen::Index>(k)) = G.col(free[k]);
    const Vector zf = Eigen::CompleteOrthogonalDecomposition<Matrix>(GF).solve(rhs);
    for (std::size_t k = 0; k < free.size(); ++k)
        z(free[k]) = zf(static_cast<Eigen::Index>(k));
    return z;
}

/// Exhaustive search over the 3^m faces of the box.
Vector enumerate_faces(const Matrix& G, const Vector& c, double tol) {
    const auto m = static_cast<std::size_t>(G.cols());
    std::vector<int> face(m, 0);
    Vector best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (;;) {
        Vector z = solve_face(G, c, face);
        bool inside = true;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (z(i) < -tol || z(i) > 1.0 + tol)
                inside = false;
            z(i) = std::clamp(z(i), 0.0, 1.0);
        }
        if (inside) {
            const double obj = box_objective(G, c, z);
            if (obj < best_obj) {
                best_obj = obj;
                best = z;
            }
        }
        std::size_t k = 0;
        while (k < m && face[k] == 2)
            face[k++] = 0;
        if (k == m)
            break;
        ++face[k];
    }
    return best;
}

struct Panel {
    std::vector<double> dt;  // dt[i] = t_i - t_{i-1}, dt[0] = 0
    std::vector<double> times;
    /// Per date, the leg index of each quote.
    std::vector<std::vector<std::size_t>> leg;
};

Panel index_panel(const QuotePanel& panel, const TenorLegs& legs) {
    Panel out;
    const auto n = panel.dates.size();
    out.dt.assign(n, 0.0);
    out.times.assign(n, 0.0);
    out.leg.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out.times[i] = year_fraction(panel.dates.front().date, panel.dates[i].date);
            out.dt[i] = out.times[i] - out.times[i - 1];
        }
        for (const auto& q : panel.dates[i].quotes)
            out.leg[i].push_back(legs.index(q.tenor));
    }
    return out;
}

/// Weighted system of one date: G z + c.
void build_system(const TenorLegs& legs, const QuoteDate& quotes,
                  const std::vector<std::size_t>& idx, const Vector& z_prev, Matrix& G,
                  Vector& c) {
    const auto k = static_cast<Eigen::Index>(quotes.quotes.size());
    const auto m = z_prev.size();
    G.resize(k, m);
    c.resize(k);
    const Vector w1 = one_z(z_prev);
    for (Eigen::Index j = 0; j < k; ++j) {
        const std::size_t l = idx[static_cast<std::size_t>(j)];
        const double s = quotes.quotes[static_cast<std::size_t>(j)].spread_bp / kBp;
        const double w = legs.prem[l].dot(w1);
        require(w > 0.0 && std::isfinite(w), ErrorKind::DegenerateAnnuity,
                "filter: nonpositive premium leg weight on " + quotes.date);
        const Vector psi = (legs.prot[l] - s * legs.prem[l]) / w;
        c(j) = psi(0);
        G.row(j) = psi.tail(m).transpose();
    }
}

FilterStep filter_indexed(const TenorLegs& legs, const QuoteDate& quotes,
                          const std::vector<std::size_t>& idx, const Vector& z_prev) {
    FilterStep step;
    if (quotes.quotes.empty()) {
        step.skipped = true;
        step.z = z_prev;
        return step;
    }
    Matrix G;
    Vector c;
    build_system(legs, quotes, idx, z_prev, G, c);
    step.solve = box_lsq(G, c, z_prev);
    step.z = step.solve.z;
    step.residual = 2.0 * step.solve.objective / static_cast<double>(c.size());
    return step;
}

double model_spread_bp(const TenorLegs& legs, std::size_t l, const Vector& w) {
    return kBp * legs.prot[l].dot(w) / legs.prem[l].dot(w);
}

MaturityStats stats(double tenor, std::vector<double> e) {
    MaturityStats s;
    s.tenor = tenor;
    s.count = e.size();
    if (e.empty())
        return s;
    double sq = 0.0;
    for (double v : e)
        sq += v * v;
    s.rmse = std::sqrt(sq / static_cast<double>(e.size()));
    std::sort(e.begin(), e.end());
    s.min = e.front();
    s.max = e.back();
    const std::size_t h = e.size() / 2;
    s.median = e.size() % 2 == 1 ? e[h] : 0.5 * (e[h - 1] + e[h]);
    return s;
}

void check_m(const QuotePanel& panel, const LhccParams& params) {
    check_dimensions(params);
    check_panel(panel);
    require(params.gamma1 >= 0.0, ErrorKind::InvalidInput, "filter: gamma1 must be nonnegative");
}

}  // namespace

double year_fraction(const std::string& from, const std::string& to) {
    const auto days = (parse_date(to) - parse_date(from)).count();
    return static_cast<double>(days) / kDaysPerYear;
}

std::string add_days(const std::string& date, int days) {
    return format_date(parse_date(date) + std::chrono::days{days});
}

void check_panel(const QuotePanel& panel) {
    require(!panel.dates.empty(), ErrorKind::InvalidInput, "panel: no dates");
    require(panel.recovery >= 0.0 && panel.recovery < 1.0, ErrorKind::InvalidInput,
            "panel: recovery must lie in [0, 1)");
    require(std::isfinite(panel.r), ErrorKind::InvalidInput, "panel: rate must be finite");
    require(panel.frequency >= 1, ErrorKind::InvalidInput, "panel: frequency must be positive");
    std::chrono::sys_days prev{};
    for (std::size_t i = 0; i < panel.dates.size(); ++i) {
        const auto& d = panel.dates[i];
        const auto t = parse_date(d.date);
        require(i == 0 || t > prev, ErrorKind::InvalidInput,
                "panel: dates must be strictly ascending at " + d.date);
        prev = t;
        for (std::size_t a = 0; a < d.quotes.size(); ++a) {
            const auto& q = d.quotes[a];
            require(std::isfinite(q.tenor) && q.tenor > 0.0, ErrorKind::InvalidInput,
                    "panel: tenors must be positive on " + d.date);
            require(std::isfinite(q.spread_bp) && q.spread_bp >= 0.0, ErrorKind::InvalidInput,
                    "panel: spreads must be nonnegative on " + d.date);
            for (std::size_t b = 0; b < a; ++b)
                require(d.quotes[b].tenor != q.tenor, ErrorKind::InvalidInput,
                        "panel: duplicate tenor on " + d.date);
        }
    }
}

QuotePanel read_panel_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::InvalidInput,
            "quotes: empty input");
    {
        std::stringstream h(trim(line));
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(h, col, ','))
            cols.push_back(trim(col));
        require(cols == std::vector<std::string>{"date", "tenor_years", "spread_bp"},
                ErrorKind::InvalidInput, "quotes: header must be date,tenor_years,spread_bp");
    }
    QuotePanel panel;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(ss, col, ','))
            cols.push_back(trim(col));
        const std::string where = "quotes row " + std::to_string(row);
        require(cols.size() == 3, ErrorKind::InvalidInput, where + ": expected 3 columns");
        parse_date(cols[0]);
        const Quote q{parse_number(cols[1], where), parse_number(cols[2], where)};
        if (panel.dates.empty() || panel.dates.back().date != cols[0])
            panel.dates.push_back(QuoteDate{cols[0], {}});
        panel.dates.back().quotes.push_back(q);
    }
    check_panel(panel);
    return panel;
}

QuotePanel load_panel(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::InvalidInput, "cannot open quotes file " + path);
    return read_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const QuotePanel& panel) {
    out << "date,tenor_years,spread_bp\n" << std::setprecision(17);
    for (const auto& d : panel.dates)
        for (const auto& q : d.quotes)
            out << d.date << ',' << q.tenor << ',' << q.spread_bp << '\n';
}

std::vector<double> panel_tenors(const QuotePanel& panel) {
    std::vector<double> t;
    for (const auto& d : panel.dates)
        for (const auto& q : d.quotes)
            t.push_back(q.tenor);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::size_t TenorLegs::index(double tenor) const {
    const auto it = std::lower_bound(tenors.begin(), tenors.end(), tenor);
    require(it != tenors.end() && *it == tenor, ErrorKind::InvalidInput,
            "filter: no legs for tenor " + std::to_string(tenor));
    return static_cast<std::size_t>(it - tenors.begin());
}

TenorLegs tenor_legs(const LhcParams& p, const std::vector<double>& tenors, double r,
                     double recovery, int frequency) {
    const LinearModel model = to_linear(p);
    TenorLegs out;
    out.tenors = tenors;
    std::sort(out.tenors.begin(), out.tenors.end());
    for (double T : out.tenors) {
        const CdsLegs legs = cds_legs(model, 0.0, make_grid(0.0, T, frequency), r, recovery);
        out.prot.push_back(legs.prot);
        out.prem.push_back(legs.prem);
    }
    return out;
}

BoxLsqResult box_lsq(const Matrix& G, const Vector& c, const Vector& start, double kkt_tol) {
    const auto m = G.cols();
    require(m >= 1 && c.size() == G.rows() && start.size() == m, ErrorKind::InvalidInput,
            "box_lsq: inconsistent dimensions");
    require(G.allFinite() && c.allFinite(), ErrorKind::InvalidInput,
            "box_lsq: nonfinite system");
    const double scale = G.norm();
    const double tol = kkt_tol * (1.0 + scale * (scale + c.norm()));

    BoxLsqResult res;
    Vector z = start.unaryExpr([](double v) { return std::clamp(v, 0.0, 1.0); });
    // 0 free, 1 at lower bound, 2 at upper bound
    std::vector<int> face(static_cast<std::size_t>(m), 0);
    const int max_iter = 20 * static_cast<int>(m) + 20;
    for (; res.iterations < max_iter; ++res.iterations) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < m; ++i)
            if (face[static_cast<std::size_t>(i)] == 0)
                free.push_back(i);
        if (!free.empty()) {
            const Vector r = G * z + c;
            Matrix GF(G.rows(), static_cast<Eigen::Index>(free.size()));
            for (std::size_t k = 0; k < free.size(); ++k)
                GF.col(static_cast<Eigen::Index>(k)) = G.col(free[k]);
            const Vector d = Eigen::CompleteOrthogonalDecomposition<Matrix>(GF).solve(-r);
            double alpha = 1.0;
            std::ptrdiff_t block = -1;
            for (std::size_t k = 0; k < free.size(); ++k) {
                const double zi = z(free[k]);
                const double di = d(static_cast<Eigen::Index>(k));
                double a = 1.0;
                if (zi + di < 0.0)
                    a = -zi / di;
                else if (zi + di > 1.0)
                    a = (1.0 - zi) / di;
                if (a < alpha) {
                    alpha = a;
                    block = static_cast<std::ptrdiff_t>(k);
                }
            }
            for (std::size_t k = 0; k < free.size(); ++k)
                z(free[k]) += alpha * d(static_cast<Eigen::Index>(k));
            if (block >= 0) {
                const Eigen::Index i = free[static_cast<std::size_t>(block)];
                const bool upper = d(block) > 0.0;
                z(i) = upper ? 1.0 : 0.0;
                face[static_cast<std::size_t>(i)] = upper ? 2 : 1;
                continue;
            }
        }
        const Vector g = G.transpose() * (G * z + c);
        Eigen::Index worst = -1;
        double violation = tol;
        for (Eigen::Index i = 0; i < m; ++i) {
            const int f = face[static_cast<std::size_t>(i)];
            const double v = f == 1 ? -g(i) : (f == 2 ? g(i) : 0.0);
            if (v > violation) {
                violation = v;
                worst = i;
            }
        }
        if (worst < 0)
            break;
        face[static_cast<std::size_t>(worst)] = 0;
    }
    for (Eigen::Index i = 0; i < m; ++i)
        z(i) = std::clamp(z(i), 0.0, 1.0);
    res.gradient = G.transpose() * (G * z + c);
    res.kkt = kkt_holds(z, res.gradient, tol);
    if (!res.kkt) {
        require(m <= 10, ErrorKind::Capacity, "box_lsq: face enumeration limited to m <= 10");
        z = enumerate_faces(G, c, 1e-12);
        res.fallback = true;
        res.gradient = G.transpose() * (G * z + c);
        res.kkt = kkt_holds(z, res.gradient, tol);
    }
    res.z = z;
    res.objective = box_objective(G, c, z);
    return res;
}

FilterStep filter_date(const TenorLegs& legs, const QuoteDate& quotes, const Vector& z_prev) {
    require(z_prev.size() >= 1 && (z_prev.array() >= 0.0).all() && (z_prev.array() <= 1.0).all(),
            ErrorKind::InvalidInput, "filter: z_prev must lie in [0, 1]^m");
    std::vector<std::size_t> idx;
    for (const auto& q : quotes.quotes)
        idx.push_back(legs.index(q.tenor));
    return filter_indexed(legs, quotes, idx, z_prev);
}

FilterStep filter_date(const LhccParams& params, const QuoteDate& quotes, const Vector& z_prev,
                       double r, double recovery, int frequency) {
    check_dimensions(params);
    require(z_prev.size() == params.m, ErrorKind::InvalidInput, "filter: z_prev has wrong size");
    std::vector<double> tenors;
    for (const auto& q : quotes.quotes)
        tenors.push_back(q.tenor);
    const TenorLegs legs = tenor_legs(lhcc_embed(params), tenors, r, recovery, frequency);
    return filter_date(legs, quotes, z_prev);
}

FilterOutput filter_panel(const LhccParams& params, const QuotePanel& panel) {
    check_m(panel, params);
    return filter_panel(params, panel,
                        tenor_legs(lhcc_embed(params), panel_tenors(panel), panel.r,
                                   panel.recovery, panel.frequency));
}

FilterOutput filter_panel(const LhccParams& params, const QuotePanel& panel,
                          const TenorLegs& legs) {
    check_m(panel, params);
    const int m = params.m;
    const auto n = panel.dates.size();
    const Panel ix = index_panel(panel, legs);
    FilterOutput out;
    out.times = ix.times;
    out.z.resize(static_cast<Eigen::Index>(n), m);
    out.x.resize(static_cast<Eigen::Index>(n), m);
    out.y.assign(n, 1.0);
    out.residual.assign(n, 0.0);
    out.skipped.assign(n, false);
    Vector z_prev = Vector::Constant(m, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
        out.dates.push_back(panel.dates[i].date);
        if (i > 0) {
            const auto p = static_cast<Eigen::Index>(i - 1);
            out.y[i] = out.y[i - 1] - params.gamma1 * out.x(p, 0) * ix.dt[i];
            require(out.y[i] > 0.0, ErrorKind::Domain,
                    "filter: survival level left (0, 1] at " + panel.dates[i].date);
        }
        const FilterStep step = filter_indexed(legs, panel.dates[i], ix.leg[i], z_prev);
        const auto r = static_cast<Eigen::Index>(i);
        out.z.row(r) = step.z.transpose();
        out.x.row(r) = out.y[i] * step.z.transpose();
        out.residual[i] = step.residual;
        out.skipped[i] = step.skipped;
        z_prev = step.z;
    }
    return out;
}

RmseReport rmse_report(const FilterOutput& filter, const QuotePanel& panel,
                       const LhccParams& params) {
    check_dimensions(params);
    return rmse_report(filter, panel,
                       tenor_legs(lhcc_embed(params), panel_tenors(panel), panel.r,
                                  panel.recovery, panel.frequency));
}

RmseReport rmse_report(const FilterOutput& filter, const QuotePanel& panel,
                       const TenorLegs& legs) {
    require(filter.dates.size() == panel.dates.size(), ErrorKind::InvalidInput,
            "rmse_report: filter and panel disagree on dates");
    std::map<double, std::vector<double>> by_tenor;
    std::vector<double> all;
    for (std::size_t i = 0; i < panel.dates.size(); ++i) {
        if (filter.skipped[i])
            continue;
        const Vector w = one_z(filter.z.row(static_cast<Eigen::Index>(i)).transpose());
        for (const auto& q : panel.dates[i].quotes) {
            const double e = model_spread_bp(legs, legs.index(q.tenor), w) - q.spread_bp;
            by_tenor[q.tenor].push_back(e);
            all.push_back(e);
        }
    }
    RmseReport rep;
    rep.all = stats(0.0, std::move(all));
    for (auto& [t, e] : by_tenor)
        rep.by_maturity.push_back(stats(t, std::move(e)));
    return rep;
}

void write_report_csv(std::ostream& out, const RmseReport& report) {
    out << "stat,all";
    for (const auto& s : report.by_maturity)
        out << ',' << s.tenor;
    out << '\n' << std::fixed << std::setprecision(4);
    const auto row = [&](const char* name, double MaturityStats::*f) {
        out << name << ',' << report.all.*f;
        for (const auto& s : report.by_maturity)
            out << ',' << s.*f;
        out << '\n';
    };
    row("RMSE", &MaturityStats::rmse);
    row("Median", &MaturityStats::median);
    row("Min", &MaturityStats::min);
    row("Max", &MaturityStats::max);
    out << std::defaultfloat;
}

void write_factors_csv(std::ostream& out, const FilterOutput& filter) {
    out << "date,y";
    for (Eigen::Index j = 0; j < filter.x.cols(); ++j)
        out << ",x" << j + 1;
    out << ",skipped\n" << std::setprecision(12);
    for (std::size_t i = 0; i < filter.dates.size(); ++i) {
        out << filter.dates[i] << ',' << filter.y[i];
        for (Eigen::Index j = 0; j < filter.x.cols(); ++j)
            out << ',' << filter.x(static_cast<Eigen::Index>(i), j);
        out << ',' << (filter.skipped[i] ? 1 : 0) << '\n';
    }
    out << std::defaultfloat;
}

namespace {

/// Mean squared pricing error in bp^2 with legs and indices prepared.
double mse_indexed(const TenorLegs& legs, const QuotePanel& panel, const Panel& ix, int m) {
    Vector z_prev = Vector::Constant(m, 0.5);
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < panel.dates.size(); ++i) {
        const FilterStep step = filter_indexed(legs, panel.dates[i], ix.leg[i], z_prev);
        if (!step.skipped) {
            const Vector w = one_z(step.z);
            for (std::size_t k = 0; k < panel.dates[i].quotes.size(); ++k) {
                const double e =
                    model_spread_bp(legs, ix.leg[i][k], w) - panel.dates[i].quotes[k].spread_bp;
                sq += e * e;
                ++count;
            }
        }
        z_prev = step.z;
    }
    require(count > 0, ErrorKind::InvalidInput, "calibration: panel has no quotes");
    return sq / static_cast<double>(count);
}

struct Objective {
    const QuotePanel* panel = nullptr;
    std::vector<double> tenors;
    int m = 0;
    std::optional<double> fixed_gamma1;
    double sigma = 0.5;
    double penalty = 1e6;

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(2 * m + (fixed_gamma1 ? 0 : 1)); }

    /// Parameters from an iterate, with the squared constraint violation.
    LhccParams params(const double* v, double& violation) const {
        std::size_t k = 0;
        LhccParams p;
        p.m = m;
        p.gamma1 = fixed_gamma1 ? *fixed_gamma1 : std::exp(std::clamp(v[k++], -30.0, 5.0));
        p.kappa.resize(m);
        p.theta.resize(m);
        p.sigma = Vector::Constant(m, sigma);
        for (int i = 0; i < m; ++i)
            p.kappa(i) = std::exp(std::clamp(v[k++], -30.0, 5.0));
        violation = 0.0;
        for (int i = 0; i < m; ++i) {
            const double bound = 1.0 - p.gamma1 / p.kappa(i);
            violation += std::pow(std::max(0.0, -bound), 2);
            p.theta(i) = std::max(0.0, bound) / (1.0 + std::exp(-v[k++]));
        }
        return p;
    }

    double operator()(const double* v) const {
        double violation = 0.0;
        const LhccParams p = params(v, violation);
        try {
            const TenorLegs legs = tenor_legs(lhcc_embed(p), tenors, panel->r, panel->recovery,
                                              panel->frequency);
            const Panel ix = index_panel(*panel, legs);
            const double f = mse_indexed(legs, *panel, ix, m) + penalty * violation;
            return std::isfinite(f) ? f : kFailedObjective;
        } catch (const Error&) {
            return kFailedObjective;
        }
    }
};

struct NmRun {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
};

/// Spread of the simplex in RMSE units (bp).
double rmse_spread(double fmin, double fmax) {
    return std::sqrt(std::max(fmax, 0.0)) - std::sqrt(std::max(fmin, 0.0));
}

/// Nelder-Mead with reflection 1, expansion 2, contraction 1/2 and shrink 1/2.
NmRun nelder_mead(const Objective& obj, const std::vector<double>& x0, double step,
                  const CalibOptions& opt) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        v[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i)
        f[i] = obj(v[i].data());
    std::vector<std::size_t> order(n + 1);
    std::vector<double> c(n), xr(n), xt(n);
    const auto point = [&](double t, const std::vector<double>& from, std::vector<double>& to) {
        for (std::size_t j = 0; j < n; ++j)
            to[j] = c[j] + t * (from[j] - c[j]);
    };
    NmRun run;
    for (; run.iterations < opt.max_iterations; ++run.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];
        if (rmse_spread(f[best], f[worst]) < opt.spread_tol)
            break;
        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                c[j] += v[order[i]][j] / static_cast<double>(n);
        point(-1.0, v[worst], xr);
        const double fr = obj(xr.data());
        if (fr < f[best]) {
            point(-2.0, v[worst], xt);
            const double fe = obj(xt.data());
            if (fe < fr) {
                v[worst] = xt;
                f[worst] = fe;
            } else {
                v[worst] = xr;
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[second]) {
            v[worst] = xr;
            f[worst] = fr;
            continue;
        }
        const bool outside = fr < f[worst];
        point(outside ? -0.5 : 0.5, v[worst], xt);
        const double fc = obj(xt.data());
        if (outside ? fc <= fr : fc < f[worst]) {
            v[worst] = xt;
            f[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                v[i][j] = v[best][j] + 0.5 * (v[i][j] - v[best][j]);
            f[i] = obj(v[i].data());
        }
    }
    const auto it = std::min_element(f.begin(), f.end());
    run.x = v[static_cast<std::size_t>(it - f.begin())];
    run.f = *it;
    return run;
}

/// A restart from the converged point guards against a collapsed simplex.
NmRun search(const Objective& obj, const std::vector<double>& x0, const CalibOptions& opt) {
    NmRun first = nelder_mead(obj, x0, 0.5, opt);
    NmRun second = nelder_mead(obj, first.x, 0.05, opt);
    second.iterations += first.iterations;
    if (first.f < second.f) {
        second.x = first.x;
        second.f = first.f;
    }
    return second;
}

std::vector<double> random_start(const Objective& obj, std::uint64_t seed, std::size_t start) {
    auto rng = path_rng(seed, start, 7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x;
    double g = 0.0;
    if (obj.fixed_gamma1) {
        g = *obj.fixed_gamma1;
    } else {
        g = std::exp(std::log(0.02) + u(rng) * std::log(50.0));
        x.push_back(std::log(g));
    }
    const double base = std::max(g, 1e-3);
    for (int i = 0; i < obj.m; ++i)
        x.push_back(std::log(base) + 0.1 + 2.4 * u(rng));
    for (int i = 0; i < obj.m; ++i)
        x.push_back(-1.0 + 4.0 * u(rng));
    return x;
}

}  // namespace

double calibration_mse(const LhccParams& params, const QuotePanel& panel) {
    check_m(panel, params);
    const TenorLegs legs = tenor_legs(lhcc_embed(params), panel_tenors(panel), panel.r,
                                      panel.recovery, panel.frequency);
    return mse_indexed(legs, panel, index_panel(panel, legs), params.m);
}

CalibResult calibrate(const QuotePanel& panel, const CalibOptions& opt) {
    check_panel(panel);
    require(opt.m >= 1, ErrorKind::InvalidInput, "calibrate: m must be at least 1");
    require(opt.starts >= 1, ErrorKind::InvalidInput, "calibrate: need at least one start");
    require(!opt.fixed_gamma1 || (std::isfinite(*opt.fixed_gamma1) && *opt.fixed_gamma1 >= 0.0),
            ErrorKind::InvalidInput, "calibrate: fixed gamma1 must be nonnegative");
    Objective obj;
    obj.panel = &panel;
    obj.tenors = panel_tenors(panel);
    obj.m = opt.m;
    obj.fixed_gamma1 = opt.fixed_gamma1;
    obj.sigma = opt.sigma;
    obj.penalty = opt.penalty;

    const auto starts = static_cast<std::size_t>(opt.starts);
    std::vector<NmRun> runs(starts);
    detail::parallel_for(starts, opt.threads, [&](std::size_t s, std::size_t) {
        runs[s] = search(obj, random_start(obj, opt.seed, s), opt);
    });

    CalibResult res;
    bool any = false;
    for (std::size_t s = 0; s < starts; ++s) {
        double violation = 0.0;
        obj.params(runs[s].x.data(), violation);
        CalibStart cs{runs[s].f, runs[s].iterations,
                      violation == 0.0 && runs[s].f < kFailedObjective};
        res.starts.push_back(cs);
        if (cs.feasible && (!any || runs[s].f < runs[res.best_start].f)) {
            res.best_start = s;
            any = true;
        }
    }
    require(any, ErrorKind::Calibration, "calibrate: no start reached a feasible parameter set");
    double violation = 0.0;
    res.params = obj.params(runs[res.best_start].x.data(), violation);
    res.objective = runs[res.best_start].f;
    const TenorLegs legs = tenor_legs(lhcc_embed(res.params), obj.tenors, panel.r,
                                      panel.recovery, panel.frequency);
    res.filter = filter_panel(res.params, panel, legs);
    res.report = rmse_report(res.filter, panel, legs);
    return res;
}

SyntheticPanel synthetic_panel(const LhccParams& params, const State& s0,
                               const SyntheticSpec& spec) {
    check_dimensions(params);
    check_state(s0, params.m);
    require(spec.dates >= 1 && spec.step_days >= 1 && !spec.tenors.empty(),
            ErrorKind::InvalidInput, "synthetic panel: need dates, a step and tenors");
    const LhcParams lhc = lhcc_embed(params);
    PathConfig cfg;
    cfg.dt = 1.0 / kDaysPerYear;
    cfg.horizon = static_cast<double>((spec.dates - 1) * static_cast<std::size_t>(spec.step_days)) *
                  cfg.dt;
    cfg.paths = 1;
    cfg.seed = spec.seed;
    Path path;
    if (spec.dates > 1) {
        path = simulate_path(lhc, s0, cfg, 0);
    } else {
        path.y = {{s0.y}};
        path.x = {Matrix(s0.x)};
    }
    const TenorLegs legs = tenor_legs(lhc, spec.tenors, spec.r, spec.recovery, spec.frequency);

    SyntheticPanel out;
    out.panel.firm = "synthetic";
    out.panel.recovery = spec.recovery;
    out.panel.r = spec.r;
    out.panel.frequency = spec.frequency;
    out.x.resize(static_cast<Eigen::Index>(spec.dates), params.m);
    for (std::size_t i = 0; i < spec.dates; ++i) {
        const auto k = static_cast<Eigen::Index>(i * static_cast<std::size_t>(spec.step_days));
        const double y = path.y[0][static_cast<std::size_t>(k)];
        const Vector x = path.x[0].col(k);
        out.y.push_back(y);
        out.x.row(static_cast<Eigen::Index>(i)) = x.transpose();
        const Vector w = one_z(x / y);
        QuoteDate d{add_days(spec.start, static_cast<int>(i) * spec.step_days), {}};
        for (std::size_t t = 0; t < legs.tenors.size(); ++t)
            d.quotes.push_back(Quote{legs.tenors[t], model_spread_bp(legs, t, w)});
        out.panel.dates.push_back(std::move(d));
    }
    return out;
}

}  // namespace linearcredit
