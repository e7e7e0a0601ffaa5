// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ris/field.hpp"

namespace ris {

/// Element sensitivities of the focus objective and the diagonal (and, for
/// N <= cap, the full matrix) of H = sum_j c_j c_j^T. The per-point vectors
/// c_j are streamed, never stored.
struct SensitivityReport {
    std::vector<double> per_element;    // C_n = dE_F / dphi_n
    std::vector<double> diag_h;         // H_nn
    std::vector<double> dense_h;        // row-major N x N, empty above the cap
    std::vector<std::uint8_t> frozen;   // 1 = frozen
    std::size_t focus_points = 0;
    std::size_t flagged_points = 0;     // |E| below threshold, excluded

    std::size_t size() const { return per_element.size(); }
    bool has_dense() const { return !dense_h.empty(); }
};

inline constexpr double kMagnitudeFloor = 1e-15;

/// dE(r)/dphi_n = j Gamma_n E_inc,n G(r, p_n), with E_inc held fixed.
cplx field_phase_derivative(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                            const Vec3 &point, std::size_t n);

struct MagnitudeDerivative {
    double value = 0.0;
    bool degenerate = false;  // |E| below kMagnitudeFloor; value is 0
};

/// d|E|/dphi = Re{ conj(E)/|E| * dE/dphi }.
MagnitudeDerivative magnitude_derivative(cplx field, cplx derivative);

struct Gradient {
    std::vector<double> values;
    std::size_t flagged = 0;
};

/// sum_j weight * Re{ conj(E_j)/|E_j| * j Gamma_n E_inc,n G_jn } for every n.
Gradient weighted_magnitude_gradient(const kernels::GreenOperator &green, std::span<const cplx> field_values,
                                     double weight, std::span<const cplx> gamma, std::span<const cplx> incident);

/// Gradient of the focus mean |E| with respect to every phase.
Gradient objective_gradient(const Scene &scene, const PhaseConfig &config, const IncidentField &incident);
Gradient objective_gradient(const FieldModel &model, const Evaluation &eval);
/// Gradient of the outer mean |E| (same machinery on the outer samples).
Gradient outer_gradient(const FieldModel &model, const Evaluation &eval);

/// Full report (C, diag H, dense H when N <= dense_cap).
SensitivityReport correlation_matrix(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                                     std::size_t dense_cap = 4096);
SensitivityReport analyze(const FieldModel &model, const Evaluation &eval, std::size_t dense_cap = 4096);

/// Active indices sorted by ascending diag(H), ties by ascending index.
std::vector<std::size_t> rank_influence(std::span<const double> diag_h, std::span<const std::uint8_t> active_mask);

/// Binary export: magic "RISH", u16 version, u32 N, u32 N_F, u32 flags
/// (bit 0: dense H present), then little-endian float64 C[N], diagH[N],
/// and optionally H[N*N].
void write_sensitivity(const std::string &path, const SensitivityReport &report);
SensitivityReport read_sensitivity(const std::string &path);

}  // namespace ris
