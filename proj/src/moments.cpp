// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/moments.hpp"

#include "linearcredit/detail/taylor.hpp"
#include "linearcredit/errors.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <numeric>

namespace linearcredit {

namespace {

using ExtMatrix = Eigen::Matrix<Extended, Eigen::Dynamic, Eigen::Dynamic>;
using ExtSparse = Eigen::SparseMatrix<Extended>;

// Number of compositions of r into `parts` nonnegative parts.
std::size_t compositions(int r, int parts) {
    if (parts <= 0)
        return r == 0 ? 1 : 0;
    return static_cast<std::size_t>(
        boost::math::binomial_coefficient<double>(r + parts - 1, parts - 1) + 0.5);
}

void enumerate_degree(int m, int d, Exponents& cur, int pos, int remaining,
                      std::vector<Exponents>& out) {
    if (pos == m) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[pos] = v;
        enumerate_degree(m, d, cur, pos + 1, remaining - v, out);
    }
}

}  // namespace

std::size_t basis_dimension(int m, int n) {
    require(m >= 0 && n >= 0, ErrorKind::InvalidInput, "basis_dimension: negative size");
    return static_cast<std::size_t>(
        boost::math::binomial_coefficient<double>(n + 1 + m, n) + 0.5);
}

std::vector<Exponents> enumerate_basis(int m, int n) {
    require(m >= 0 && n >= 0, ErrorKind::InvalidInput, "enumerate_basis: negative size");
    std::vector<Exponents> out;
    out.reserve(basis_dimension(m, n));
    Exponents cur(m + 1, 0);
    for (int d = 0; d <= n; ++d)
        enumerate_degree(m, d, cur, 0, d, out);
    return out;
}

MonomialBasis::MonomialBasis(int m, int degree)
    : m_(m), degree_(degree), exps_(enumerate_basis(m, degree)) {
    offsets_.resize(degree + 2, 0);
    for (int d = 0; d <= degree; ++d)
        offsets_[d + 1] = offsets_[d] + compositions(d, m + 1);
    succ_.assign(exps_.size() * (m + 1), npos);
    for (std::size_t k = 0; k < exps_.size(); ++k) {
        if (total_degree(k) == degree_)
            continue;
        Exponents a = exps_[k];
        for (int v = 0; v <= m; ++v) {
            ++a[v];
            succ_[k * (m + 1) + v] = index(a);
            --a[v];
        }
    }
}

int MonomialBasis::total_degree(std::size_t k) const {
    return std::accumulate(exps_[k].begin(), exps_[k].end(), 0);
}

std::size_t MonomialBasis::index(const Exponents& alpha) const {
    require(static_cast<int>(alpha.size()) == m_ + 1, ErrorKind::InvalidInput,
            "basis index: exponent length mismatch");
    int d = 0;
    for (int v : alpha) {
        require(v >= 0, ErrorKind::InvalidInput, "basis index: negative exponent");
        d += v;
    }
    require(d <= degree_, ErrorKind::InvalidInput, "basis index: degree above basis degree");
    std::size_t pos = offsets_[d];
    int r = d;
    for (int k = 0; k < m_; ++k) {
        for (int v = r; v > alpha[k]; --v)
            pos += compositions(r - v, m_ - k);
        r -= alpha[k];
    }
    return pos;
}

Vector MonomialBasis::evaluate(const State& s) const {
    Vector out(size());
    for (std::size_t k = 0; k < size(); ++k) {
        double v = std::pow(s.y, exps_[k][0]);
        for (int i = 0; i < m_; ++i)
            v *= std::pow(s.x(i), exps_[k][i + 1]);
        out(k) = v;
    }
    return out;
}

ExtVector MonomialBasis::evaluate_ext(const State& s) const {
    ExtVector out(size());
    const Extended y(s.y);
    for (std::size_t k = 0; k < size(); ++k) {
        Extended v(1);
        for (int e = 0; e < exps_[k][0]; ++e)
            v *= y;
        for (int i = 0; i < m_; ++i) {
            const Extended xi(s.x(i));
            for (int e = 0; e < exps_[k][i + 1]; ++e)
                v *= xi;
        }
        out(k) = v;
    }
    return out;
}

template <typename Scalar>
void generator_column(const LhcParams& p, const MonomialBasis& basis, std::size_t k,
                      std::vector<std::pair<std::size_t, Scalar>>& out) {
    out.clear();
    const int m = basis.m();
    Exponents a = basis[k];
    auto add = [&](const Exponents& e, const Scalar& v) {
        if (v != Scalar(0))
            out.emplace_back(basis.index(e), v);
    };
    const int a0 = a[0];
    // d/dy (y^a0) * (-gamma^T x)
    if (a0 > 0) {
        for (int j = 0; j < m; ++j) {
            Exponents e = a;
            e[0] -= 1;
            e[j + 1] += 1;
            add(e, -Scalar(a0) * Scalar(p.gamma(j)));
        }
    }
    for (int i = 0; i < m; ++i) {
        const int ai = a[i + 1];
        if (ai == 0)
            continue;
        // d/dx_i * (b_i y + sum_j beta_ij x_j)
        {
            Exponents e = a;
            e[i + 1] -= 1;
            e[0] += 1;
            add(e, Scalar(ai) * Scalar(p.b(i)));
        }
        for (int j = 0; j < m; ++j) {
            Exponents e = a;
            e[i + 1] -= 1;
            e[j + 1] += 1;
            add(e, Scalar(ai) * Scalar(p.beta(i, j)));
        }
        // 1/2 sigma_i^2 x_i (y - x_i) d^2/dx_i^2
        if (ai >= 2) {
            const Scalar sig(p.sigma(i));
            const Scalar c = Scalar(ai) * Scalar(ai - 1) * sig * sig / Scalar(2);
            Exponents e = a;
            e[i + 1] -= 1;
            e[0] += 1;
            add(e, c);
            add(a, -c);
        }
    }
}

template void generator_column<double>(const LhcParams&, const MonomialBasis&, std::size_t,
                                       std::vector<std::pair<std::size_t, double>>&);
template void generator_column<Extended>(const LhcParams&, const MonomialBasis&, std::size_t,
                                         std::vector<std::pair<std::size_t, Extended>>&);

template <typename Vec>
Vec times_linear(const MonomialBasis& basis, const Vec& p, const Vec& lin) {
    const int m = basis.m();
    require(p.size() == static_cast<Eigen::Index>(basis.size()) && lin.size() == m + 1,
            ErrorKind::InvalidInput, "times_linear: dimension mismatch");
    Vec out = Vec::Zero(p.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto pk = p(static_cast<Eigen::Index>(k));
        if (pk == 0)
            continue;
        for (int v = 0; v <= m; ++v) {
            if (lin(v) == 0)
                continue;
            const std::size_t j = basis.successor(k, v);
            require(j != MonomialBasis::npos, ErrorKind::Capacity,
                    "times_linear: product exceeds basis degree " + std::to_string(basis.degree()));
            out(static_cast<Eigen::Index>(j)) += pk * lin(v);
        }
    }
    return out;
}

template Vector times_linear<Vector>(const MonomialBasis&, const Vector&, const Vector&);
template ExtVector times_linear<ExtVector>(const MonomialBasis&, const ExtVector&,
                                           const ExtVector&);

Vector monomial_vector(const MonomialBasis& basis, const Exponents& alpha) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    v(static_cast<Eigen::Index>(basis.index(alpha))) = 1.0;
    return v;
}

namespace {

template <typename Scalar>
Eigen::SparseMatrix<Scalar> block_generator(const LhcParams& p, const MonomialBasis& basis,
                                            int d) {
    const std::size_t begin = basis.block_begin(d);
    const std::size_t n = basis.block_size(d);
    std::vector<Eigen::Triplet<Scalar>> trips;
    std::vector<std::pair<std::size_t, Scalar>> col;
    for (std::size_t k = 0; k < n; ++k) {
        generator_column<Scalar>(p, basis, begin + k, col);
        for (const auto& [row, v] : col)
            trips.emplace_back(static_cast<int>(row - begin), static_cast<int>(k), v);
    }
    Eigen::SparseMatrix<Scalar> g(static_cast<int>(n), static_cast<int>(n));
    g.setFromTriplets(trips.begin(), trips.end());
    return g;
}

}  // namespace

MomentOperator::MomentOperator(const LhcParams& p, int degree, int degree_limit)
    : params_(p), basis_(p.m, std::max(0, degree)) {
    check_dimensions(p);
    require(degree >= 0, ErrorKind::InvalidInput, "moment operator: negative degree");
    require(degree <= degree_limit, ErrorKind::Capacity,
            "moment operator: degree " + std::to_string(degree) + " exceeds limit " +
                std::to_string(degree_limit));
    const auto n = static_cast<int>(basis_.size());
    std::vector<Eigen::Triplet<double>> trips;
    blocks_.reserve(degree + 1);
    for (int d = 0; d <= degree; ++d) {
        blocks_.push_back(block_generator<double>(p, basis_, d));
        const auto off = static_cast<int>(basis_.block_begin(d));
        const SparseMatrix& b = blocks_.back();
        for (int k = 0; k < b.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(b, k); it; ++it)
                trips.emplace_back(off + static_cast<int>(it.row()), off + static_cast<int>(it.col()),
                                   it.value());
    }
    g_.resize(n, n);
    g_.setFromTriplets(trips.begin(), trips.end());
}

Vector MomentOperator::propagate(const Vector& p, double h) const {
    require(p.size() == static_cast<Eigen::Index>(size()), ErrorKind::InvalidInput,
            "moment: coefficient vector has wrong dimension");
    require(h >= 0.0 && std::isfinite(h), ErrorKind::InvalidInput,
            "moment: horizon must be finite and nonnegative");
    Vector out(p.size());
    for (int d = 0; d <= degree(); ++d) {
        const auto off = static_cast<Eigen::Index>(basis_.block_begin(d));
        const auto n = static_cast<Eigen::Index>(basis_.block_size(d));
        const Vector pd = p.segment(off, n);
        if (pd.isZero(0.0)) {
            out.segment(off, n).setZero();
            continue;
        }
        if (static_cast<std::size_t>(n) <= kDenseBlockLimit)
            out.segment(off, n) = expm(Matrix(blocks_[d]) * h) * pd;
        else
            out.segment(off, n) = expm_action(blocks_[d], h, pd);
    }
    return out;
}

double MomentOperator::moment(const State& s, const Vector& target, double h) const {
    check_state(s, m());
    return basis_.evaluate(s).dot(propagate(target, h));
}

Vector MomentOperator::monomial_moments(const State& s, double h, int max_degree) const {
    check_state(s, m());
    require(h >= 0.0 && std::isfinite(h), ErrorKind::InvalidInput,
            "moment: horizon must be finite and nonnegative");
    if (max_degree < 0)
        max_degree = degree();
    require(max_degree <= degree(), ErrorKind::InvalidInput,
            "moment: requested degree above operator degree");
    const Vector hs = basis_.evaluate(s);
    const auto total = static_cast<Eigen::Index>(basis_.block_begin(max_degree + 1));
    Vector out(total);
    for (int d = 0; d <= max_degree; ++d) {
        const auto off = static_cast<Eigen::Index>(basis_.block_begin(d));
        const auto n = static_cast<Eigen::Index>(basis_.block_size(d));
        const SparseMatrix gt = blocks_[d].transpose();
        if (static_cast<std::size_t>(n) <= kDenseBlockLimit)
            out.segment(off, n) = expm(Matrix(gt) * h) * hs.segment(off, n);
        else
            out.segment(off, n) = expm_action(gt, h, hs.segment(off, n));
    }
    return out;
}

ExtVector MomentOperator::monomial_moments_ext(const State& s, double h, int max_degree) const {
    check_state(s, m());
    require(h >= 0.0 && std::isfinite(h), ErrorKind::InvalidInput,
            "moment: horizon must be finite and nonnegative");
    if (max_degree < 0)
        max_degree = degree();
    require(max_degree <= degree(), ErrorKind::InvalidInput,
            "moment: requested degree above operator degree");
    const ExtVector hs = basis_.evaluate_ext(s);
    const auto total = static_cast<Eigen::Index>(basis_.block_begin(max_degree + 1));
    ExtVector out(total);
    for (int d = 0; d <= max_degree; ++d) {
        const auto off = static_cast<Eigen::Index>(basis_.block_begin(d));
        const auto n = static_cast<Eigen::Index>(basis_.block_size(d));
        const ExtSparse gt = block_generator<Extended>(params_, basis_, d).transpose();
        const ExtVector hd = hs.segment(off, n);
        if (static_cast<std::size_t>(n) <= kDenseBlockLimit) {
            const ExtMatrix e = detail::taylor_expm<Extended>(ExtMatrix(gt), h);
            out.segment(off, n) = e * hd;
        } else {
            out.segment(off, n) = detail::taylor_action(gt, h, hd);
        }
    }
    return out;
}

}  // namespace linearcredit
