// SPDX-License-Identifier: Apache-2.0
//
// Monomial basis of Pol_n(E) and the matrix representation of the LHC
// generator. Conditional moments follow from the block exponential of G.
#pragma once

#include "linearcredit/linmat.hpp"
#include "linearcredit/model.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include <cstddef>
#include <vector>

namespace linearcredit {

/// Quadruple precision scalar for moment combinations with large cancellation.
using Extended = boost::multiprecision::float128;
using ExtVector = Eigen::Matrix<Extended, Eigen::Dynamic, 1>;

inline constexpr int kDefaultDegreeLimit = 50;
/// Degree blocks above this size use the exponential action instead of expm.
inline constexpr std::size_t kDenseBlockLimit = 512;

/// Exponent vector (alpha_0 for y, alpha_1..alpha_m for x).
using Exponents = std::vector<int>;

/// C(n + 1 + m, n)
std::size_t basis_dimension(int m, int n);

/// Graded ordering: by total degree, then descending lexicographic within a
/// degree, so the list starts 1, y, x_1, ..., x_m, y^2, y x_1, ...
class MonomialBasis {
public:
    MonomialBasis(int m, int degree);

    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] std::size_t size() const { return exps_.size(); }
    [[nodiscard]] const Exponents& operator[](std::size_t k) const { return exps_[k]; }
    [[nodiscard]] std::size_t index(const Exponents& alpha) const;
    [[nodiscard]] std::size_t block_begin(int d) const { return offsets_[d]; }
    [[nodiscard]] std::size_t block_size(int d) const { return offsets_[d + 1] - offsets_[d]; }
    /// Position of alpha + e_var, or npos when that exceeds the degree.
    [[nodiscard]] std::size_t successor(std::size_t k, int var) const {
        return succ_[k * (m_ + 1) + var];
    }
    [[nodiscard]] int total_degree(std::size_t k) const;

    /// H_n(y, x).
    [[nodiscard]] Vector evaluate(const State& s) const;
    [[nodiscard]] ExtVector evaluate_ext(const State& s) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    int m_;
    int degree_;
    std::vector<Exponents> exps_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> succ_;
};

std::vector<Exponents> enumerate_basis(int m, int n);

class MomentOperator {
public:
    MomentOperator(const LhcParams& p, int degree, int degree_limit = kDefaultDegreeLimit);

    [[nodiscard]] const LhcParams& params() const { return params_; }
    [[nodiscard]] int degree() const { return basis_.degree(); }
    [[nodiscard]] int m() const { return basis_.m(); }
    [[nodiscard]] std::size_t size() const { return basis_.size(); }
    [[nodiscard]] const MonomialBasis& basis() const { return basis_; }

    /// Column pi(alpha) holds the coordinates of G h_alpha.
    [[nodiscard]] const SparseMatrix& generator() const { return g_; }

    /// e^{G h} p.
    [[nodiscard]] Vector propagate(const Vector& p, double h) const;

    /// H_n(y, x)^T e^{G h} p.
    [[nodiscard]] double moment(const State& s, const Vector& target, double h) const;

    /// E[h_alpha(Y_h, X_h) | (y, x)] for every alpha of degree <= max_degree
    /// (default: the operator degree).
    [[nodiscard]] Vector monomial_moments(const State& s, double h, int max_degree = -1) const;
    [[nodiscard]] ExtVector monomial_moments_ext(const State& s, double h,
                                                 int max_degree = -1) const;

private:
    LhcParams params_;
    MonomialBasis basis_;
    SparseMatrix g_;
    std::vector<SparseMatrix> blocks_;
};

/// Coefficients of p * (l_0 y + l_1 x_1 + ... + l_m x_m) in the basis.
/// Throws Capacity when p has terms of the top basis degree.
template <typename Vec>
Vec times_linear(const MonomialBasis& basis, const Vec& p, const Vec& lin);

/// Coordinates of the single monomial alpha.
Vector monomial_vector(const MonomialBasis& basis, const Exponents& alpha);

/// Coefficients of G h_alpha, assembled in the requested scalar type.
template <typename Scalar>
void generator_column(const LhcParams& p, const MonomialBasis& basis, std::size_t k,
                      std::vector<std::pair<std::size_t, Scalar>>& out);

}  // namespace linearcredit
