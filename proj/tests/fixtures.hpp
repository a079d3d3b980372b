// SPDX-License-Identifier: Apache-2.0
// Shared parameter sets for the test suites.
#pragma once

#include "linearcredit/model.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace lc_test {

using namespace linearcredit;

// One-factor model with gamma = 0.25 and intensity roots l1 = 0.05, l2 = 1.
inline LhcParams one_factor(double sigma = 0.75) {
    const double gamma = 0.25;
    const double l1 = 0.05;
    const double l2 = 1.0;
    LhcParams p;
    p.m = 1;
    p.gamma = Vector::Constant(1, gamma);
    p.b = Vector::Constant(1, l1 * l2 / gamma);
    p.beta = Matrix::Constant(1, 1, -(l1 + l2));
    p.sigma = Vector::Constant(1, sigma);
    return p;
}

inline State one_factor_state(double x0 = 0.2) {
    return State{1.0, Vector::Constant(1, x0)};
}

// Constant intensity gamma: x stays equal to y.
inline LhcParams constant_intensity(double gamma) {
    LhcParams p;
    p.m = 1;
    p.gamma = Vector::Constant(1, gamma);
    p.b = Vector::Zero(1);
    p.beta = Matrix::Constant(1, 1, -gamma);
    p.sigma = Vector::Zero(1);
    return p;
}

inline LhccParams lhcc(double gamma1, std::vector<double> kappa, std::vector<double> theta,
                       double sigma = 0.5) {
    LhccParams p;
    p.m = static_cast<int>(kappa.size());
    p.gamma1 = gamma1;
    p.kappa = Eigen::Map<Vector>(kappa.data(), p.m);
    p.theta = Eigen::Map<Vector>(theta.data(), p.m);
    p.sigma = Vector::Constant(p.m, sigma);
    return p;
}

struct NamedLhcc {
    std::string name;
    LhccParams params;
};

// Fitted cascade parameters for the high yield and investment grade names.
inline std::vector<NamedLhcc> table2() {
    return {
        {"B2", lhcc(0.205, {0.546, 0.421}, {0.624, 0.512})},
        {"B3", lhcc(0.201, {1.263, 0.668, 0.385}, {0.841, 0.699, 0.478})},
        {"B3*", lhcc(0.400, {1.316, 0.884, 0.668}, {0.696, 0.548, 0.401})},
        {"D2", lhcc(0.056, {0.167, 0.165}, {0.666, 0.662})},
        {"D3", lhcc(0.064, {0.258, 0.229, 0.091}, {0.753, 0.721, 0.298})},
        {"D3*", lhcc(0.130, {0.294, 0.280, 0.212}, {0.558, 0.536, 0.387})},
    };
}

// Published values are rounded; pull theta back onto the constraint where needed.
inline LhccParams feasible(LhccParams p) {
    for (int i = 0; i < p.m; ++i)
        p.theta(i) = std::min(p.theta(i), std::max(0.0, 1.0 - p.gamma1 / p.kappa(i)));
    return p;
}

inline LhcParams table2_lhc(std::size_t k) { return lhcc_to_lhc(feasible(table2()[k].params)); }

inline Matrix random_matrix(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = scale * u(rng);
    return a;
}

}  // namespace lc_test
