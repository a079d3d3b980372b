// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace linearcredit {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule, cached per n. Thread safe.
const GaussRule& gauss_legendre(int n);

/// n-point rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

template <typename F>
double integrate(F&& f, double a, double b, int n) {
    const GaussRule& r = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
        sum += r.weights[k] * f(mid + half * r.nodes[k]);
    return half * sum;
}

}  // namespace linearcredit
