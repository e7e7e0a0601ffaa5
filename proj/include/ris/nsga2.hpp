// SPDX-License-Identifier: Apache-2.0
#pragma once

// NSGA-II building blocks over minimization cost vectors, plus real-coded
// variation operators on the phase circle.

#include <cstddef>
#include <span>
#include <vector>

#include "ris/random.hpp"

namespace ris::nsga2 {

using Costs = std::vector<double>;

/// a dominates b: no worse in every cost and strictly better in at least one.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fast non-dominated sort. Returns fronts (indices, ascending within a front);
/// rank[i] is the front index of i.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Costs> &costs,
                                                         std::vector<int> &rank);

/// Crowding distance of every member of `front`, in front order. Boundary
/// members get +infinity.
std::vector<double> crowding_distance(const std::vector<Costs> &costs, std::span<const std::size_t> front);

/// Crowded comparison: lower rank wins, then larger crowding distance.
inline bool crowded_less(int rank_a, double crowd_a, int rank_b, double crowd_b) {
    return rank_a < rank_b || (rank_a == rank_b && crowd_a > crowd_b);
}

/// Simulated binary crossover of two phases (radians). The second parent is
/// first unwrapped to the copy nearest the first; children are wrapped to [0, 2pi).
void sbx_phase(double &a, double &b, double eta, Rng &rng);

/// Polynomial mutation of a phase with maximum excursion pi; result wrapped.
double mutate_phase(double phi, double eta, Rng &rng);

}  // namespace ris::nsga2
