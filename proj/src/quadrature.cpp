// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/quadrature.hpp"

#include "linearcredit/errors.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <mutex>

namespace linearcredit {

namespace {

GaussRule build_rule(int n) {
    // Boost returns the nonnegative zeros in ascending order.
    const std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
    GaussRule r;
    auto weight = [n](double x) {
        const double d = boost::math::legendre_p_prime(n, x);
        return 2.0 / ((1.0 - x * x) * d * d);
    };
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
        if (*it == 0.0)
            continue;
        r.nodes.push_back(-*it);
        r.weights.push_back(weight(*it));
    }
    for (double x : pos) {
        r.nodes.push_back(x);
        r.weights.push_back(weight(x));
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    require(n >= 1, ErrorKind::InvalidInput, "gauss_legendre: need at least one node");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

GaussRule gauss_legendre(int n, double a, double b) {
    GaussRule r = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        r.nodes[k] = mid + half * r.nodes[k];
        r.weights[k] *= half;
    }
    return r;
}

}  // namespace linearcredit
