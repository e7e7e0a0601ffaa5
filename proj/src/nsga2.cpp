// SPDX-License-Identifier: Apache-2.0
#include "ris/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ris/geometry.hpp"

namespace ris::nsga2 {

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly = true;
    }
    return strictly;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Costs> &costs, std::vector<int> &rank) {
    const std::size_t n = costs.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> counter(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    rank.assign(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(costs[p], costs[q])) dominated[p].push_back(q);
            else if (dominates(costs[q], costs[p])) ++counter[p];
        }
        if (counter[p] == 0) fronts[0].push_back(p);
    }
    for (std::size_t f = 0; !fronts[f].empty(); ++f) {
        std::vector<std::size_t> next;
        for (auto p : fronts[f]) {
            for (auto q : dominated[p]) {
                if (--counter[q] == 0) {
                    rank[q] = static_cast<int>(f + 1);
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Costs> &costs, std::span<const std::size_t> front) {
    const std::size_t m = front.size();
    std::vector<double> dist(m, 0.0);
    if (m == 0) return dist;
    if (m <= 2) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        return dist;
    }
    const std::size_t objectives = costs[front[0]].size();
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < objectives; ++k) {
        for (std::size_t i = 0; i < m; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return costs[front[a]][k] < costs[front[b]][k]; });
        const double lo = costs[front[order.front()]][k];
        const double hi = costs[front[order.back()]][k];
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        const double span = hi - lo;
        if (!(span > 0.0) || !std::isfinite(span)) continue;
        for (std::size_t i = 1; i + 1 < m; ++i) {
            dist[order[i]] += (costs[front[order[i + 1]]][k] - costs[front[order[i - 1]]][k]) / span;
        }
    }
    return dist;
}

void sbx_phase(double &a, double &b, double eta, Rng &rng) {
    const double p1 = a;
    const double p2 = a + wrap_symmetric(b - a);
    const double u = rng.uniform();
    const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
    a = wrap_phase(0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2));
    b = wrap_phase(0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2));
}

double mutate_phase(double phi, double eta, Rng &rng) {
    const double u = rng.uniform();
    const double delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0
                                 : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
    return wrap_phase(phi + delta * std::numbers::pi);
}

}  // namespace ris::nsga2
