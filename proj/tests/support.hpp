// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "ris/config.hpp"
#include "ris/field.hpp"
#include "ris/scene.hpp"

namespace ristest {

using ris::cplx;

/// Small scene for fast tests: side x side panel, light sampling.
inline ris::RunConfig small_config(int side = 12, int nf = 200, int no = 300) {
    auto cfg = ris::desk_profile();
    cfg.scene.grid_side = side;
    cfg.scene.focus_samples = nf;
    cfg.scene.outer_samples = no;
    return cfg;
}

inline std::shared_ptr<const ris::Scene> make_scene(const ris::SceneConfig &sc) {
    return std::make_shared<const ris::Scene>(ris::build_scene(sc));
}

inline ris::PhaseConfig random_phases(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, ris::kTwoPi);
    std::vector<double> phi(n);
    for (auto &x : phi) x = u(rng);
    return ris::PhaseConfig(std::move(phi));
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_rel_err(const std::vector<cplx> &a, const std::vector<cplx> &b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

}  // namespace ristest
