// SPDX-License-Identifier: Apache-2.0
#include "ris/sensitivity.hpp"

#include <algorithm>
#include <numeric>

#include "binary_io.hpp"

namespace ris {

namespace {

constexpr cplx kJ{0.0, 1.0};
constexpr std::uint16_t kRishVersion = 1;

// s_n = j Gamma_n E_inc,n
std::vector<cplx> derivative_sources(std::span<const cplx> gamma, std::span<const cplx> incident) {
    std::vector<cplx> s(gamma.size());
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = kJ * gamma[n] * incident[n];
    return s;
}

// Unit phasors E/|E|, zero (and counted) below the magnitude floor.
std::vector<cplx> unit_phasors(std::span<const cplx> values, std::size_t &flagged) {
    std::vector<cplx> u(values.size());
    flagged = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double mag = std::abs(values[j]);
        if (mag < kMagnitudeFloor) {
            ++flagged;
            continue;
        }
        u[j] = values[j] / mag;
    }
    return u;
}

SensitivityReport build_report(const kernels::GreenOperator &green, std::span<const cplx> focus_values,
                               double weight, std::span<const cplx> gamma, std::span<const cplx> incident,
                               std::size_t dense_cap) {
    const std::size_t N = gamma.size();
    SensitivityReport rep;
    auto grad = weighted_magnitude_gradient(green, focus_values, weight, gamma, incident);
    rep.per_element = std::move(grad.values);
    rep.flagged_points = grad.flagged;
    rep.focus_points = focus_values.size();
    rep.diag_h.assign(N, 0.0);
    if (N <= dense_cap) rep.dense_h.assign(N * N, 0.0);
    rep.frozen.assign(N, 0);
    std::size_t flagged = 0;
    const auto u = unit_phasors(focus_values, flagged);
    const auto s = derivative_sources(gamma, incident);
    kernels::correlation_fold(green, u, s, rep.diag_h, rep.dense_h);
    return rep;
}

}  // namespace

cplx field_phase_derivative(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                            const Vec3 &point, std::size_t n) {
    const double r = distance(point, scene.panel.element_centers.at(n));
    if (r < kernels::kMinDistance) throw NumericalError("observation point coincides with an element center");
    return kJ * std::polar(1.0, config[n]) * incident.total.at(n) * green(scene.tx.wavenumber, r);
}

MagnitudeDerivative magnitude_derivative(cplx field, cplx derivative) {
    const double mag = std::abs(field);
    if (mag < kMagnitudeFloor) return {0.0, true};
    return {(std::conj(field) / mag * derivative).real(), false};
}

Gradient weighted_magnitude_gradient(const kernels::GreenOperator &green, std::span<const cplx> field_values,
                                     double weight, std::span<const cplx> gamma, std::span<const cplx> incident) {
    Gradient g;
    auto v = unit_phasors(field_values, g.flagged);
    for (auto &x : v) x = weight * std::conj(x);
    std::vector<cplx> back(gamma.size());
    green.apply_adjoint(v, back);
    g.values.resize(gamma.size());
    for (std::size_t n = 0; n < gamma.size(); ++n) g.values[n] = (kJ * gamma[n] * incident[n] * back[n]).real();
    return g;
}

Gradient objective_gradient(const Scene &scene, const PhaseConfig &config, const IncidentField &incident) {
    const kernels::GreenOperator green(scene.samples.focus_points, scene.panel.element_centers, scene.tx.wavenumber,
                                       0);
    const auto gamma = config.reflection();
    std::vector<cplx> amp(gamma.size());
    for (std::size_t n = 0; n < amp.size(); ++n) amp[n] = gamma[n] * incident.total[n];
    std::vector<cplx> values(green.rows());
    green.apply(amp, values);
    return weighted_magnitude_gradient(green, values, scene.samples.focus_weight(), gamma, incident.total);
}

Gradient objective_gradient(const FieldModel &model, const Evaluation &eval) {
    return weighted_magnitude_gradient(model.focus_green(), eval.focus_values, model.scene().samples.focus_weight(),
                                       eval.gamma, eval.incident);
}

Gradient outer_gradient(const FieldModel &model, const Evaluation &eval) {
    if (eval.outer_values.size() != model.outer_green().rows()) {
        throw NumericalError("outer gradient needs an evaluation of the outer samples");
    }
    return weighted_magnitude_gradient(model.outer_green(), eval.outer_values, model.scene().samples.outer_weight(),
                                       eval.gamma, eval.incident);
}

SensitivityReport correlation_matrix(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                                     std::size_t dense_cap) {
    const kernels::GreenOperator green(scene.samples.focus_points, scene.panel.element_centers, scene.tx.wavenumber,
                                       0);
    const auto gamma = config.reflection();
    std::vector<cplx> amp(gamma.size());
    for (std::size_t n = 0; n < amp.size(); ++n) amp[n] = gamma[n] * incident.total[n];
    std::vector<cplx> values(green.rows());
    green.apply(amp, values);
    return build_report(green, values, scene.samples.focus_weight(), gamma, incident.total, dense_cap);
}

SensitivityReport analyze(const FieldModel &model, const Evaluation &eval, std::size_t dense_cap) {
    return build_report(model.focus_green(), eval.focus_values, model.scene().samples.focus_weight(), eval.gamma,
                        eval.incident, dense_cap);
}

std::vector<std::size_t> rank_influence(std::span<const double> diag_h, std::span<const std::uint8_t> active_mask) {
    if (diag_h.size() != active_mask.size()) throw NumericalError("rank_influence: length mismatch");
    std::vector<std::size_t> idx;
    for (std::size_t n = 0; n < diag_h.size(); ++n)
        if (active_mask[n]) idx.push_back(n);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return diag_h[a] < diag_h[b]; });
    return idx;
}

void write_sensitivity(const std::string &path, const SensitivityReport &report) {
    detail::ByteWriter w;
    w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t *>("RISH"), 4));
    w.put(kRishVersion);
    w.put(static_cast<std::uint32_t>(report.size()));
    w.put(static_cast<std::uint32_t>(report.focus_points));
    w.put(static_cast<std::uint32_t>(report.has_dense() ? 1u : 0u));
    w.put_f64s(report.per_element);
    w.put_f64s(report.diag_h);
    if (report.has_dense()) w.put_f64s(report.dense_h);
    detail::write_file_bytes(path, w.view());
}

SensitivityReport read_sensitivity(const std::string &path) {
    const auto bytes = detail::read_file_bytes(path);
    detail::ByteReader<IoError> r(bytes);
    const auto magic = r.get_bytes(4);
    if (!std::equal(magic.begin(), magic.end(), "RISH")) throw IoError("not a sensitivity file (bad magic)");
    if (r.get<std::uint16_t>() != kRishVersion) throw IoError("unsupported sensitivity file version");
    SensitivityReport rep;
    const auto n = r.get<std::uint32_t>();
    rep.focus_points = r.get<std::uint32_t>();
    const auto flags = r.get<std::uint32_t>();
    rep.per_element = r.get_f64s(n);
    rep.diag_h = r.get_f64s(n);
    if (flags & 1u) rep.dense_h = r.get_f64s(static_cast<std::size_t>(n) * n);
    rep.frozen.assign(n, 0);
    return rep;
}

}  // namespace ris
