// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/sim.hpp"

#include "linearcredit/detail/parallel.hpp"

#include "linearcredit/errors.hpp"
#include "linearcredit/moments.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace linearcredit {

namespace {

constexpr std::uint64_t kBrownianStream = 1;
constexpr std::uint64_t kThresholdStream = 1u << 20;
constexpr std::uint64_t kJumpStream = 1u << 21;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Normal = boost::random::normal_distribution<double>;
using Uniform = boost::random::uniform_01<double>;

using detail::parallel_for;

McEstimate summarize(const std::vector<double>& v) {
    McEstimate e;
    e.paths = v.size();
    if (v.empty())
        return e;
    e.value = pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            sq[i] = (v[i] - e.value) * (v[i] - e.value);
        const double var = pairwise_sum(sq.data(), sq.size()) / static_cast<double>(v.size() - 1);
        e.se = std::sqrt(var / static_cast<double>(v.size()));
    }
    return e;
}

/// Euler step of one block. Returns the number of clamped coordinates.
struct BlockStepper {
    int m = 0;
    double dt = 0.0;
    double sqdt = 0.0;
    bool clamp = true;
    /// Pathwise decay of Y in excess of gamma^T X.
    double y_decay = 0.0;
    std::vector<double> gamma, b, beta, sigma;  // beta row-major

    BlockStepper(const LhcParams& p, double dt_, bool clamp_)
        : m(p.m), dt(dt_), sqdt(std::sqrt(dt_)), clamp(clamp_) {
        for (int i = 0; i < m; ++i) {
            gamma.push_back(p.gamma(i));
            b.push_back(p.b(i));
            sigma.push_back(p.sigma(i));
            for (int j = 0; j < m; ++j)
                beta.push_back(p.beta(i, j));
        }
    }

    std::size_t step(double& y, double* x, std::mt19937_64& rng, Normal& normal,
                     double* next) const {
        double gx = 0.0;
        for (int i = 0; i < m; ++i)
            gx += gamma[i] * x[i];
        for (int i = 0; i < m; ++i) {
            double drift = b[i] * y;
            const double* row = beta.data() + static_cast<std::size_t>(i) * m;
            for (int j = 0; j < m; ++j)
                drift += row[j] * x[j];
            const double xc = clamp ? std::min(std::max(x[i], 0.0), y) : x[i];
            const double var = xc * (y - xc);
            const double vol = var > 0.0 ? sigma[i] * std::sqrt(var) : 0.0;
            next[i] = x[i] + drift * dt + vol * sqdt * normal(rng);
        }
        const double y_new = y - (y_decay * y + gx) * dt;
        std::size_t clamped = 0;
        for (int i = 0; i < m; ++i) {
            double v = next[i];
            if (clamp && (v < 0.0 || v > y_new)) {
                v = std::min(std::max(v, 0.0), y_new);
                ++clamped;
            }
            x[i] = v;
        }
        y = y_new;
        return clamped;
    }
};

std::size_t step_count(const PathConfig& cfg) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.horizon / cfg.dt - 1e-9)));
}

void resize_path(Path& path, std::size_t blocks, const std::vector<int>& dims, std::size_t points) {
    path.y.resize(blocks);
    path.x.resize(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
        path.y[j].resize(points);
        path.x[j].resize(dims[j], static_cast<Eigen::Index>(points));
    }
    path.jump.assign(points, 0);
    path.clamped = 0;
    path.increments = 0;
}

/// Simulates blocks into `path` with optional common jumps.
void run_blocks(const std::vector<LhcParams>& blocks, const std::vector<JumpSpec>* jumps,
                const JumpProcess* z, const std::vector<State>& s0, const PathConfig& cfg,
                std::size_t index, Path& path) {
    const std::size_t steps = step_count(cfg);
    const double dt = cfg.horizon / static_cast<double>(steps);
    std::vector<int> dims;
    for (const auto& b : blocks)
        dims.push_back(b.m);
    resize_path(path, blocks.size(), dims, steps + 1);

    const double mean_jump = z ? z->mean() : 0.0;
    std::vector<BlockStepper> steppers;
    std::vector<std::mt19937_64> rngs;
    std::vector<Normal> normals(blocks.size());
    std::vector<double> ys(blocks.size());
    std::vector<Vector> xs(blocks.size());
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        BlockStepper st(blocks[j], dt, cfg.clamp);
        if (jumps)
            st.y_decay = (*jumps)[j].c * (1.0 - mean_jump);
        steppers.push_back(st);
        rngs.push_back(path_rng(cfg.seed, index, kBrownianStream + j));
        ys[j] = s0[j].y;
        xs[j] = s0[j].x;
        path.y[j][0] = ys[j];
        path.x[j].col(0) = xs[j];
    }
    std::mt19937_64 jump_rng = path_rng(cfg.seed, index, kJumpStream);
    boost::random::poisson_distribution<int> arrivals(z && z->rate > 0.0 ? z->rate * dt : 1.0);
    boost::random::beta_distribution<double> sizes(z ? z->beta_a : 1.0, z ? z->beta_b : 1.0);

    int max_m = 0;
    for (int d : dims)
        max_m = std::max(max_m, d);
    std::vector<double> next(static_cast<std::size_t>(max_m));
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            path.clamped += steppers[j].step(ys[j], xs[j].data(), rngs[j], normals[j], next.data());
            path.increments += static_cast<std::size_t>(dims[j]);
        }
        if (z && z->rate > 0.0) {
            const int count = arrivals(jump_rng);
            for (int q = 0; q < count; ++q) {
                const double dz = sizes(jump_rng);
                for (std::size_t j = 0; j < blocks.size(); ++j) {
                    const JumpSpec& js = (*jumps)[j];
                    const double hit = js.c * ys[j] + js.delta.dot(xs[j]);
                    ys[j] -= dz * hit;
                    xs[j].array() *= 1.0 - dz * js.nu.array();
                }
            }
            if (count > 0)
                path.jump[k] = 1;
        }
        for (std::size_t j = 0; j < blocks.size(); ++j) {
            path.y[j][k + 1] = ys[j];
            std::copy_n(xs[j].data(), dims[j], path.x[j].data() + (k + 1) * dims[j]);
        }
    }
}

PathEnsemble record(const std::vector<double>& fine, std::size_t n, int every,
                    const std::function<void(std::size_t, Path&)>& make, int threads) {
    PathEnsemble ens;
    const auto stride = static_cast<std::size_t>(std::max(1, every));
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < fine.size(); k += stride)
        keep.push_back(k);
    if (keep.back() != fine.size() - 1)
        keep.push_back(fine.size() - 1);
    for (std::size_t k : keep)
        ens.times.push_back(fine[k]);
    ens.paths.resize(n);
    parallel_for(n, threads, [&](std::size_t i, std::size_t) {
        Path full;
        make(i, full);
        if (stride == 1) {
            ens.paths[i] = std::move(full);
            return;
        }
        Path& out = ens.paths[i];
        out.y.resize(full.y.size());
        out.x.resize(full.x.size());
        out.jump.assign(keep.size(), 0);
        for (std::size_t j = 0; j < full.y.size(); ++j) {
            out.y[j].resize(keep.size());
            out.x[j].resize(full.x[j].rows(), static_cast<Eigen::Index>(keep.size()));
            for (std::size_t q = 0; q < keep.size(); ++q) {
                out.y[j][q] = full.y[j][keep[q]];
                out.x[j].col(static_cast<Eigen::Index>(q)) =
                    full.x[j].col(static_cast<Eigen::Index>(keep[q]));
            }
        }
        // A recorded interval carries a jump if any fine step in it does.
        for (std::size_t q = 0; q + 1 < keep.size(); ++q)
            for (std::size_t k = keep[q]; k < keep[q + 1]; ++k)
                if (full.jump[k])
                    out.jump[q] = 1;
        out.clamped = full.clamped;
        out.increments = full.increments;
    });
    return ens;
}

}  // namespace

void check_config(const PathConfig& cfg) {
    require(std::isfinite(cfg.dt) && cfg.dt > 0.0, ErrorKind::InvalidInput, "dt must be positive");
    require(std::isfinite(cfg.horizon) && cfg.horizon > 0.0, ErrorKind::InvalidInput,
            "horizon must be positive");
    require(cfg.paths >= 1, ErrorKind::InvalidInput, "path count must be at least 1");
    require(cfg.record_every >= 1, ErrorKind::InvalidInput, "record_every must be at least 1");
    require(cfg.threads >= 1, ErrorKind::InvalidInput, "thread count must be at least 1");
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state ^= path * 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = splitmix64(state);
    state ^= stream * 0x8cb92ba72f3d8dd7ULL;
    const std::uint64_t c = splitmix64(state);
    const std::uint64_t d = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
    return std::mt19937_64(seq);
}

double PathEnsemble::clamped_fraction() const {
    std::size_t c = 0, n = 0;
    for (const auto& p : paths) {
        c += p.clamped;
        n += p.increments;
    }
    return n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n);
}

std::vector<double> time_grid(const PathConfig& cfg) {
    check_config(cfg);
    const std::size_t steps = step_count(cfg);
    std::vector<double> t(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        t[k] = cfg.horizon * static_cast<double>(k) / static_cast<double>(steps);
    t[steps] = cfg.horizon;
    return t;
}

Path simulate_path(const LhcParams& p, const State& s0, const PathConfig& cfg,
                   std::size_t index) {
    check_config(cfg);
    check_dimensions(p);
    check_state(s0, p.m);
    Path path;
    run_blocks({p}, nullptr, nullptr, {s0}, cfg, index, path);
    return path;
}

PathEnsemble simulate_paths(const LhcParams& p, const State& s0, const PathConfig& cfg) {
    check_config(cfg);
    check_dimensions(p);
    check_state(s0, p.m);
    require(validate_lhc(p).valid, ErrorKind::Constraint,
            "simulate_paths: parameters violate the LHC conditions");
    const std::vector<LhcParams> blocks{p};
    const std::vector<State> states{s0};
    return record(time_grid(cfg), cfg.paths, cfg.record_every,
                  [&](std::size_t i, Path& out) {
                      run_blocks(blocks, nullptr, nullptr, states, cfg, i, out);
                  },
                  cfg.threads);
}

double first_crossing(const std::vector<double>& times, const std::vector<double>& s, double u,
                      const std::vector<char>* jumps) {
    const std::size_t n = s.size();
    if (n == 0)
        return std::numeric_limits<double>::infinity();
    if (s[0] <= u)
        return times[0];
    std::size_t k = 0;
    if (jumps == nullptr) {
        // S is nonincreasing without jumps: bisect for the first point at or below u.
        if (s[n - 1] > u)
            return std::numeric_limits<double>::infinity();
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (s[mid] <= u ? hi : lo) = mid;
        }
        k = lo;
    } else {
        while (k + 1 < n && s[k + 1] > u)
            ++k;
        if (k + 1 == n)
            return std::numeric_limits<double>::infinity();
        if ((*jumps)[k])
            return times[k + 1];
    }
    const double t0 = times[k], t1 = times[k + 1];
    const double s0 = s[k], s1 = s[k + 1];
    double frac;
    if (s1 > 0.0)
        frac = std::log(u / s0) / std::log(s1 / s0);
    else
        frac = (s0 - u) / (s0 - s1);
    return t0 + (t1 - t0) * std::clamp(frac, 0.0, 1.0);
}

std::vector<double> firm_survival(const Path& path, const Matrix& weights, std::size_t firm) {
    require(static_cast<std::size_t>(weights.cols()) == path.y.size(), ErrorKind::InvalidInput,
            "firm_survival: weights need one column per block");
    const std::size_t n = path.y.empty() ? 0 : path.y[0].size();
    std::vector<double> s(n, 0.0);
    for (std::size_t j = 0; j < path.y.size(); ++j) {
        const double w = weights(static_cast<Eigen::Index>(firm), static_cast<Eigen::Index>(j));
        if (w == 0.0)
            continue;
        for (std::size_t k = 0; k < n; ++k)
            s[k] += w * path.y[j][k];
    }
    return s;
}

std::vector<std::vector<double>> sample_defaults(const PathEnsemble& ens, const Matrix& weights,
                                                 std::uint64_t seed) {
    const auto firms = static_cast<std::size_t>(weights.rows());
    std::vector<std::vector<double>> out(ens.size(), std::vector<double>(firms));
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const Path& path = ens.paths[i];
        std::mt19937_64 rng = path_rng(seed, i, kThresholdStream);
        Uniform uniform;
        const bool has_jumps =
            std::any_of(path.jump.begin(), path.jump.end(), [](char c) { return c != 0; });
        for (std::size_t f = 0; f < firms; ++f) {
            const std::vector<double> s = firm_survival(path, weights, f);
            const double u = uniform(rng) * s.front();
            out[i][f] = first_crossing(ens.times, s, u, has_jumps ? &path.jump : nullptr);
        }
    }
    return out;
}

void check_jump(const LhcParams& p, const JumpSpec& jump, const JumpProcess& z) {
    check_dimensions(p);
    require(jump.delta.size() == p.m && jump.nu.size() == p.m, ErrorKind::InvalidInput,
            "jump loadings must have one entry per factor");
    require(z.rate >= 0.0 && z.beta_a > 0.0 && z.beta_b > 0.0, ErrorKind::InvalidInput,
            "jump process needs a nonnegative rate and positive Beta shapes");
    require(jump.c >= 0.0 && (jump.delta.array() >= 0.0).all() && (jump.nu.array() >= 0.0).all(),
            ErrorKind::Constraint, "jump loadings must be nonnegative");
    const double load = jump.c + jump.delta.sum();
    require(load < 1.0, ErrorKind::Constraint, "jump loadings need c + delta^T 1 < 1");
    for (int i = 0; i < p.m; ++i)
        require(jump.nu(i) >= load && jump.nu(i) <= 1.0, ErrorKind::Constraint,
                "jump loading nu_" + std::to_string(i + 1) + " outside [c + delta^T 1, 1]");
    const ValidationReport rep = validate_lhc(p);
    for (int i = 0; i < p.m; ++i)
        require(!(rep.zero_unattainable[static_cast<std::size_t>(i)] && jump.nu(i) >= 1.0),
                ErrorKind::Constraint,
                "jump loading nu_" + std::to_string(i + 1) + " must be below 1");
}

Matrix jump_drift_matrix(const LhcParams& p, const JumpSpec& jump, const JumpProcess& z) {
    check_jump(p, jump, z);
    const double e = z.mean();
    Matrix a = Matrix::Zero(p.m + 1, p.m + 1);
    a(0, 0) = -jump.c;
    a.block(0, 1, 1, p.m) = -(p.gamma + e * jump.delta).transpose();
    a.block(1, 0, p.m, 1) = p.b;
    a.block(1, 1, p.m, p.m) = p.beta;
    a.block(1, 1, p.m, p.m).diagonal() -= e * jump.nu;
    return a;
}

Path simulate_jump_path(const std::vector<LhcParams>& blocks, const std::vector<JumpSpec>& jumps,
                        const JumpProcess& z, const std::vector<State>& s0,
                        const PathConfig& cfg, std::size_t index) {
    check_config(cfg);
    require(blocks.size() == jumps.size() && blocks.size() == s0.size() && !blocks.empty(),
            ErrorKind::InvalidInput, "jump simulation needs one spec and state per block");
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        check_jump(blocks[j], jumps[j], z);
        check_state(s0[j], blocks[j].m);
    }
    Path path;
    run_blocks(blocks, &jumps, &z, s0, cfg, index, path);
    return path;
}

PathEnsemble simulate_jump_paths(const std::vector<LhcParams>& blocks,
                                 const std::vector<JumpSpec>& jumps, const JumpProcess& z,
                                 const std::vector<State>& s0, const PathConfig& cfg) {
    check_config(cfg);
    require(blocks.size() == jumps.size() && blocks.size() == s0.size() && !blocks.empty(),
            ErrorKind::InvalidInput, "jump simulation needs one spec and state per block");
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        check_jump(blocks[j], jumps[j], z);
        check_state(s0[j], blocks[j].m);
    }
    return record(time_grid(cfg), cfg.paths, cfg.record_every,
                  [&](std::size_t i, Path& out) { run_blocks(blocks, &jumps, &z, s0, cfg, i, out); },
                  cfg.threads);
}

Matrix clock_drift(const Matrix& a, const ClockSpec& clock) {
    require(a.rows() == a.cols(), ErrorKind::InvalidInput, "clock_drift: matrix must be square");
    require(clock.gamma_z > 0.0 && clock.lambda_z > 0.0 && clock.b_z >= 0.0,
            ErrorKind::InvalidInput, "clock parameters must be positive");
    const Eigen::Index n = a.rows();
    if (n == 0)
        return a;
    const double tol = 1e-10 * std::max(1.0, a.norm());
    const Eigen::EigenSolver<Matrix> es(a, false);
    require(es.info() == Eigen::Success, ErrorKind::Domain, "clock_drift: eigenvalues failed");
    require((es.eigenvalues().real().array() <= tol).all(), ErrorKind::Domain,
            "clock_drift: eigenvalues must have nonpositive real parts");

    const Matrix id = Matrix::Identity(n, n);
    if (clock.kind == ClockKind::Gamma) {
        const Matrix arg = id - a / clock.lambda_z;
        return clock.b_z * a - clock.gamma_z * Matrix(arg.log());
    }

    const auto density = clock.levy_density
                             ? clock.levy_density
                             : std::function<double(double)>([&clock](double z) {
                                   return clock.gamma_z / z * std::exp(-clock.lambda_z * z);
                               });
    // e^{Az} - I = A z phi_1(A z) keeps accuracy near z = 0.
    const auto integrand = [&](double z) {
        Matrix big = Matrix::Zero(2 * n, 2 * n);
        big.topLeftCorner(n, n) = a * z;
        big.topRightCorner(n, n) = id;
        const Matrix e = expm(big);
        return Matrix(a * e.topRightCorner(n, n) * (z * density(z)));
    };
    Matrix out = clock.b_z * a;
    boost::math::quadrature::exp_sinh<double> quad;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) += quad.integrate([&](double z) { return integrand(z)(i, j); }, 1e-12);
    return out;
}

NegcorResult negcor_example(const NegcorConfig& cfg) {
    check_config(cfg.paths);
    require(cfg.epsilon > 0.0 && cfg.kappa > cfg.epsilon, ErrorKind::InvalidInput,
            "negcor: requires kappa > epsilon > 0");
    require(cfg.sigma >= 0.0, ErrorKind::InvalidInput, "negcor: sigma must be nonnegative");
    require(std::abs(cfg.x0) <= 1.0, ErrorKind::InvalidInput, "negcor: X_0 must lie in [-1, 1]");
    const PathConfig& pc = cfg.paths;
    const std::size_t steps = step_count(pc);
    const double dt = pc.horizon / static_cast<double>(steps);
    const double eps = cfg.epsilon;

    std::vector<double> cov(pc.paths), lam_max(pc.paths), excess(pc.paths);
    parallel_for(pc.paths, pc.threads, [&](std::size_t path, std::size_t) {
        std::mt19937_64 rng = path_rng(pc.seed, path, kBrownianStream);
        Normal normal;
        double y1 = 1.0, y2 = 1.0, x = cfg.x0;
        double l1 = 0.5 * eps * (1.0 + x / y1), l2 = 0.5 * eps * (1.0 - x / y2);
        double qv = 0.0, lmax = std::max(l1, l2), ex = std::abs(x) - 1.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = dt * static_cast<double>(k);
            const double band = std::exp(-eps * t);
            const double xc = std::clamp(x, -band, band);
            const double vol = cfg.sigma * std::sqrt(std::max(0.0, (band - xc) * (band + xc)));
            const double x_new = x - cfg.kappa * x * dt + vol * std::sqrt(dt) * normal(rng);
            y1 += -0.5 * eps * (y1 + x) * dt;
            y2 += -0.5 * eps * (y2 - x) * dt;
            const double bound = std::min({std::exp(-eps * (t + dt)), y1, y2});
            x = std::clamp(x_new, -bound, bound);
            const double n1 = 0.5 * eps * (1.0 + x / y1);
            const double n2 = 0.5 * eps * (1.0 - x / y2);
            qv += (n1 - l1) * (n2 - l2);
            l1 = n1;
            l2 = n2;
            lmax = std::max({lmax, l1, l2});
            ex = std::max(ex, std::abs(x) - std::exp(-eps * (t + dt)));
        }
        cov[path] = qv;
        lam_max[path] = lmax;
        excess[path] = ex;
    });
    const McEstimate e = summarize(cov);
    NegcorResult out;
    out.covariation = e.value;
    out.se = e.se;
    out.max_lambda = *std::max_element(lam_max.begin(), lam_max.end());
    out.max_band_excess = *std::max_element(excess.begin(), excess.end());
    return out;
}

namespace {

/// Linear interpolation of the block-0 state at time u.
State state_at(const Path& path, const std::vector<double>& times, double u) {
    const auto it = std::upper_bound(times.begin(), times.end(), u);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    k = std::min(k, times.size() - 2);
    const double w = std::clamp((u - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0);
    State s;
    s.y = (1.0 - w) * path.y[0][k] + w * path.y[0][k + 1];
    s.x = (1.0 - w) * path.x[0].col(static_cast<Eigen::Index>(k)) +
          w * path.x[0].col(static_cast<Eigen::Index>(k + 1));
    return s;
}

double single_payoff(const McContractSpec& c, const TenorGrid* grid, const Vector* psi,
                     const Path& path, const std::vector<double>& times, double tau,
                     double* second) {
    const double r = c.r;
    const double d = c.recovery;
    const bool default_by_T = tau <= c.tM;
    switch (c.kind) {
    case McContract::BondZero:
        return default_by_T ? 0.0 : std::exp(-r * c.tM);
    case McContract::BondMaturity:
        return std::exp(-r * c.tM) * (default_by_T ? d : 1.0);
    case McContract::BondDefault:
        return default_by_T ? d * std::exp(-r * tau) : std::exp(-r * c.tM);
    case McContract::DefaultPayment:
        return default_by_T ? std::exp(-r * tau) : 0.0;
    case McContract::DefaultTimePayment:
        return default_by_T ? tau * std::exp(-r * tau) : 0.0;
    case McContract::CdsProtection:
    case McContract::CdsPremium:
    case McContract::CdsSpread: {
        const double prot =
            (tau > grid->t0 && default_by_T) ? (1.0 - d) * std::exp(-r * tau) : 0.0;
        double prem = 0.0;
        for (std::size_t j = 0; j < grid->dates.size(); ++j) {
            const double a = j == 0 ? grid->t0 : grid->dates[j - 1];
            const double b = grid->dates[j];
            if (tau > b)
                prem += grid->accrual(j) * std::exp(-r * b);
            else if (tau > a)
                prem += (tau - a) * std::exp(-r * tau);
        }
        if (c.kind == McContract::CdsProtection)
            return prot;
        if (c.kind == McContract::CdsPremium)
            return prem;
        *second = prem;
        return prot;
    }
    case McContract::CdsOption: {
        if (tau <= c.t0)
            return 0.0;
        const State s = state_at(path, times, c.t0);
        Vector v(s.x.size() + 1);
        v << s.y, s.x;
        return std::exp(-r * c.t0) * std::max(psi->dot(v) / s.y, 0.0);
    }
    case McContract::Ucva: {
        if (!default_by_T)
            return 0.0;
        const State s = state_at(path, times, tau);
        return std::exp(-r * tau) * c.exposure(s.y, s.x);
    }
    }
    return 0.0;
}

}  // namespace

std::vector<McEstimate> mc_price_many(const LhcParams& p, const State& s0,
                                      const std::vector<McContractSpec>& contracts,
                                      const PathConfig& cfg) {
    check_dimensions(p);
    check_state(s0, p.m);
    require(!contracts.empty(), ErrorKind::InvalidInput, "mc_price: no contracts");
    const std::size_t nc = contracts.size();
    std::vector<TenorGrid> grids(nc);
    std::vector<Vector> psis(nc);
    double horizon = 0.0;
    for (std::size_t q = 0; q < nc; ++q) {
        const McContractSpec& c = contracts[q];
        require(c.tM > 0.0 && c.t0 >= 0.0, ErrorKind::InvalidInput,
                "mc_price: contract times must be positive");
        require(c.kind != McContract::Ucva || static_cast<bool>(c.exposure),
                ErrorKind::InvalidInput, "mc_price: UCVA needs an exposure");
        const bool cds = c.kind == McContract::CdsProtection || c.kind == McContract::CdsPremium ||
                         c.kind == McContract::CdsSpread || c.kind == McContract::CdsOption;
        if (cds) {
            require(c.t0 < c.tM, ErrorKind::InvalidInput,
                    "mc_price: CDS start must precede maturity");
            grids[q] = make_grid(c.t0, c.tM, c.frequency);
        }
        if (c.kind == McContract::CdsOption) {
            require(c.t0 > 0.0, ErrorKind::InvalidInput, "mc_price: option expiry must be positive");
            psis[q] = psi_cds(cds_legs(to_linear(p), c.t0, grids[q], c.r, c.recovery), c.strike);
            horizon = std::max(horizon, c.t0);
        } else {
            horizon = std::max(horizon, c.tM);
        }
    }
    PathConfig pc = cfg;
    pc.horizon = horizon;
    check_config(pc);

    const std::vector<double> times = time_grid(pc);
    const std::vector<LhcParams> blocks{p};
    const std::vector<State> states{s0};
    const int workers = std::max(1, pc.threads);
    std::vector<Path> buffers(static_cast<std::size_t>(workers));
    std::vector<std::vector<double>> first(nc, std::vector<double>(pc.paths));
    std::vector<std::vector<double>> second(nc, std::vector<double>(pc.paths, 0.0));
    std::vector<std::size_t> clamped(pc.paths), increments(pc.paths);
    parallel_for(pc.paths, workers, [&](std::size_t i, std::size_t w) {
        Path& path = buffers[w];
        run_blocks(blocks, nullptr, nullptr, states, pc, i, path);
        std::mt19937_64 rng = path_rng(pc.seed, i, kThresholdStream);
        const double u = Uniform()(rng) * s0.y;
        const double tau = first_crossing(times, path.y[0], u);
        for (std::size_t q = 0; q < nc; ++q)
            first[q][i] = single_payoff(contracts[q], &grids[q], &psis[q], path, times, tau,
                                        &second[q][i]);
        clamped[i] = path.clamped;
        increments[i] = path.increments;
    });

    std::size_t c = 0, n = 0;
    for (std::size_t i = 0; i < pc.paths; ++i) {
        c += clamped[i];
        n += increments[i];
    }
    const double frac = n == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(n);
    std::vector<McEstimate> out;
    for (std::size_t q = 0; q < nc; ++q) {
        McEstimate e;
        if (contracts[q].kind == McContract::CdsSpread) {
            const McEstimate prot = summarize(first[q]);
            const McEstimate prem = summarize(second[q]);
            require(prem.value > 0.0, ErrorKind::DegenerateAnnuity,
                    "mc_price: premium leg is zero");
            const double spread = prot.value / prem.value;
            std::vector<double> resid(pc.paths);
            for (std::size_t i = 0; i < pc.paths; ++i)
                resid[i] = (first[q][i] - spread * second[q][i]) / prem.value;
            e = summarize(resid);
            e.value = spread;
        } else {
            e = summarize(first[q]);
        }
        e.clamped_fraction = frac;
        out.push_back(e);
    }
    return out;
}

McEstimate mc_price(const LhcParams& p, const State& s0, const McContractSpec& contract,
                    const PathConfig& cfg) {
    return mc_price_many(p, s0, {contract}, cfg).front();
}

std::vector<McEstimate> mc_monomial_moments(const LhcParams& p, const State& s0, int degree,
                                            const PathConfig& cfg) {
    check_dimensions(p);
    check_state(s0, p.m);
    check_config(cfg);
    require(degree >= 0, ErrorKind::InvalidInput, "moment degree must be nonnegative");
    const MonomialBasis basis(p.m, degree);
    const std::vector<LhcParams> blocks{p};
    const std::vector<State> states{s0};
    std::vector<std::vector<double>> values(basis.size(), std::vector<double>(cfg.paths));
    std::vector<Path> buffers(static_cast<std::size_t>(cfg.threads));
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i, std::size_t w) {
        Path& path = buffers[w];
        run_blocks(blocks, nullptr, nullptr, states, cfg, i, path);
        State end;
        end.y = path.y[0].back();
        end.x = path.x[0].col(path.x[0].cols() - 1);
        const Vector h = basis.evaluate(end);
        for (std::size_t k = 0; k < basis.size(); ++k)
            values[k][i] = h(static_cast<Eigen::Index>(k));
    });
    std::vector<McEstimate> out;
    for (const auto& v : values)
        out.push_back(summarize(v));
    return out;
}

McTranche mc_tranche_legs(const LhcParams& p, const State& s0, const TenorGrid& grid,
                          const TrancheSpec& spec, double r, const PathConfig& cfg) {
    check_dimensions(p);
    check_state(s0, p.m);
    check_grid(grid);
    require(spec.N >= 1 && spec.defaulted >= 0 && spec.defaulted <= spec.N &&
                spec.n_a >= 0 && spec.n_a < spec.n_d && spec.n_d <= spec.N,
            ErrorKind::InvalidInput, "mc_tranche_legs: invalid tranche");
    PathConfig pc = cfg;
    pc.horizon = grid.maturity();
    check_config(pc);
    const std::vector<double> times = time_grid(pc);
    const std::vector<LhcParams> blocks{p};
    const std::vector<State> states{s0};
    const int alive = spec.N - spec.defaulted;
    const double unit = (1.0 - spec.recovery) / spec.N;
    const double width = unit * (spec.n_d - spec.n_a);
    const auto loss = [&](int k) { return unit * std::clamp(k - spec.n_a, 0, spec.n_d - spec.n_a); };

    std::vector<double> prot(pc.paths), prem(pc.paths);
    std::vector<Path> buffers(static_cast<std::size_t>(pc.threads));
    parallel_for(pc.paths, pc.threads, [&](std::size_t i, std::size_t w) {
        Path& path = buffers[w];
        run_blocks(blocks, nullptr, nullptr, states, pc, i, path);
        std::mt19937_64 rng = path_rng(pc.seed, i, kThresholdStream);
        Uniform uniform;
        std::vector<double> tau(static_cast<std::size_t>(alive));
        for (auto& t : tau)
            t = first_crossing(times, path.y[0], uniform(rng) * s0.y);
        std::sort(tau.begin(), tau.end());

        double pv = 0.0;
        for (int q = 0; q < alive; ++q) {
            const double t = tau[static_cast<std::size_t>(q)];
            if (t > grid.t0 && t <= grid.maturity())
                pv += std::exp(-r * t) *
                      (loss(spec.defaulted + q + 1) - loss(spec.defaulted + q));
        }
        prot[i] = pv;

        // Tranche loss is piecewise constant between default times.
        double pr = 0.0;
        for (std::size_t j = 0; j < grid.dates.size(); ++j) {
            const double a = j == 0 ? grid.t0 : grid.dates[j - 1];
            const double b = grid.dates[j];
            double nominal = 0.0;
            double cursor = a;
            int k = spec.defaulted +
                    static_cast<int>(std::upper_bound(tau.begin(), tau.end(), a) - tau.begin());
            for (int q = k - spec.defaulted; q < alive && tau[static_cast<std::size_t>(q)] < b; ++q) {
                const double t = tau[static_cast<std::size_t>(q)];
                nominal += (t - cursor) * (width - loss(k));
                cursor = t;
                ++k;
            }
            nominal += (b - cursor) * (width - loss(k));
            pr += std::exp(-r * b) * nominal;
        }
        prem[i] = pr;
    });
    return {summarize(prot), summarize(prem)};
}

McEstimate cdis_option_exact(const Portfolio& pf, const std::vector<State>& states,
                             const std::vector<bool>& alive, double t, const CdsOptionSpec& spec,
                             const PathConfig& cfg) {
    check_portfolio(pf);
    const std::size_t N = pf.size();
    require(N <= 12, ErrorKind::Capacity,
            "cdis_option_exact: " + std::to_string(N) + " firms exceed the limit of 12");
    require(pf.construction == Construction::Linear, ErrorKind::Unsupported,
            "cdis_option_exact: requires the linear construction");
    require(states.size() == pf.blocks.size() && alive.size() == N, ErrorKind::InvalidInput,
            "cdis_option_exact: state or alive flags mismatch");
    require(t <= spec.t0, ErrorKind::Domain, "valuation time after option expiry");
    for (std::size_t j = 0; j < states.size(); ++j)
        check_state(states[j], pf.blocks[j].m);

    const TenorGrid grid = make_grid(spec.t0, spec.tM, spec.frequency);
    std::vector<Vector> psi(N);
    std::vector<Vector> weights(N);
    for (std::size_t i = 0; i < N; ++i) {
        const LinearModel lm = stacked_model(pf, i);
        psi[i] = psi_cds(cds_legs(lm, spec.t0, grid, spec.r, spec.recovery), spec.strike);
        weights[i] = lm.a;
    }
    const Vector v_t = stacked_state(states);
    const auto d = static_cast<Eigen::Index>(states.size());
    std::vector<double> s_t(N);
    for (std::size_t i = 0; i < N; ++i)
        s_t[i] = weights[i].dot(v_t.head(d));
    const double disc = std::exp(-spec.r * (spec.t0 - t));
    const double h = spec.t0 - t;

    PathConfig pc = cfg;
    pc.horizon = h > 0.0 ? h : cfg.dt;
    check_config(pc);
    std::vector<double> payoff(pc.paths);
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < N; ++i)
        if (alive[i])
            live.push_back(i);

    std::vector<Path> buffers(static_cast<std::size_t>(pc.threads));
    parallel_for(pc.paths, pc.threads, [&](std::size_t path_index, std::size_t w) {
        std::vector<State> end = states;
        if (h > 0.0) {
            Path& path = buffers[w];
            run_blocks(pf.blocks, nullptr, nullptr, states, pc, path_index, path);
            for (std::size_t j = 0; j < end.size(); ++j) {
                end[j].y = path.y[j].back();
                end[j].x = path.x[j].col(path.x[j].cols() - 1);
            }
        }
        const Vector v = stacked_state(end);
        std::vector<double> prob(live.size()), value(live.size());
        for (std::size_t q = 0; q < live.size(); ++q) {
            const std::size_t i = live[q];
            const double s = weights[i].dot(v.head(d));
            prob[q] = s / s_t[i];
            value[q] = psi[i].dot(v) / s;
        }
        double sum = 0.0;
        const std::size_t configs = std::size_t{1} << live.size();
        for (std::size_t mask = 0; mask < configs; ++mask) {
            double weight = 1.0, cds = 0.0;
            std::size_t survivors = 0;
            for (std::size_t q = 0; q < live.size(); ++q) {
                if (mask >> q & 1U) {
                    weight *= prob[q];
                    cds += value[q];
                    ++survivors;
                } else {
                    weight *= 1.0 - prob[q];
                }
            }
            if (weight == 0.0)
                continue;
            const double losses = (1.0 - spec.recovery) * static_cast<double>(N - survivors);
            sum += weight * std::max(cds + losses, 0.0);
        }
        payoff[path_index] = disc * sum / static_cast<double>(N);
    });
    return summarize(payoff);
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 64) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace linearcredit
