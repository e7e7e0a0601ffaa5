// SPDX-License-Identifier: Apache-2.0
#include "ris/field.hpp"

#include <cmath>
#include <limits>

namespace ris {

namespace {

double l2(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto &x : v) s += std::norm(x);
    return std::sqrt(s);
}

std::vector<cplx> source_amplitudes(std::span<const cplx> gamma, std::span<const cplx> incident) {
    std::vector<cplx> amp(gamma.size());
    for (std::size_t n = 0; n < gamma.size(); ++n) amp[n] = gamma[n] * incident[n];
    return amp;
}

}  // namespace

PhaseConfig::PhaseConfig(std::vector<double> phases) : phases_(std::move(phases)) {
    for (auto &phi : phases_) {
        if (!std::isfinite(phi)) throw NumericalError("phase configuration contains a non-finite entry");
        phi = wrap_phase(phi);
    }
}

std::vector<cplx> PhaseConfig::reflection() const {
    std::vector<cplx> g(phases_.size());
    for (std::size_t n = 0; n < phases_.size(); ++n) g[n] = std::polar(1.0, phases_[n]);
    return g;
}

std::vector<cplx> direct_field(const Scene &scene) {
    const auto &tx = scene.tx;
    const auto &panel = scene.panel;
    const Vec3 outward = -panel.inward_normal;
    std::vector<cplx> out(panel.size());
    for (std::size_t n = 0; n < panel.size(); ++n) {
        const Vec3 d = panel.element_centers[n] - tx.position;
        const double r = norm(d);
        if (r < 1e-9) throw NumericalError("transmitter coincides with a panel element");
        const Vec3 dh = d * (1.0 / r);
        const double cos_in = dot(dh, outward);
        if (cos_in <= 0.0) {
            out[n] = {};
            continue;
        }
        const double pattern = std::pow(std::abs(dot(dh, tx.boresight)), tx.pattern_exponent);
        const double element = std::pow(cos_in, panel.cosine_exponent);
        out[n] = green(tx.wavenumber, r) * (pattern * element);
    }
    return out;
}

std::vector<WallContribution> secondary_field(const Scene &scene) {
    const auto &panel = scene.panel;
    const double k = scene.tx.wavenumber;
    std::vector<WallContribution> out;
    for (const auto &wall : scene.room.walls) {
        if (wall.ris_mounted || wall.reflectivity <= 0.0) continue;
        const Vec3 image = mirror_transmitter(scene, wall);
        WallContribution wc{wall.id, std::vector<cplx>(panel.size())};
        for (std::size_t n = 0; n < panel.size(); ++n) {
            const Vec3 d = panel.element_centers[n] - image;
            const double r = norm(d);
            const double cosine = std::pow(std::abs(dot(d * (1.0 / r), wall.normal)), panel.cosine_exponent);
            wc.values[n] = green(k, r) * (wall.reflectivity * cosine);
        }
        out.push_back(std::move(wc));
    }
    return out;
}

CouplingOperator::CouplingOperator(const RisPanel &panel, double wavenumber, const CouplingSpec &spec)
    : spec_(spec) {
    const std::size_t N = panel.size();
    offsets_.reserve(N + 1);
    offsets_.push_back(0);
    const int side = panel.grid_side;
    const double unit = spec.length_unit * kTwoPi / wavenumber;
    static constexpr int kMoore[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
    static constexpr int kVonNeumann[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
    const bool moore = spec.neighborhood == Neighborhood::Moore8;
    const int count = moore ? 8 : 4;
    for (std::size_t n = 0; n < N; ++n) {
        if (spec.alpha != 0.0) {
            const int row = panel.row(n);
            const int col = panel.col(n);
            for (int i = 0; i < count; ++i) {
                const int dr = moore ? kMoore[i][0] : kVonNeumann[i][0];
                const int dc = moore ? kMoore[i][1] : kVonNeumann[i][1];
                const int r2 = row + dr;
                const int c2 = col + dc;
                if (r2 < 0 || r2 >= side || c2 < 0 || c2 >= side) continue;
                const std::size_t m = static_cast<std::size_t>(r2) * side + static_cast<std::size_t>(c2);
                const double r = distance(panel.element_centers[n], panel.element_centers[m]);
                links_.push_back({m, spec.alpha * std::polar(unit / r, wavenumber * r)});
            }
        }
        offsets_.push_back(links_.size());
    }
}

void CouplingOperator::apply(std::span<const cplx> gamma, std::span<const cplx> e, std::span<cplx> out) const {
    for (std::size_t n = 0; n < size(); ++n) {
        cplx acc{};
        for (const auto &link : neighbors(n)) acc += link.kernel * gamma[link.m] * e[link.m];
        out[n] = acc;
    }
}

CouplingOperator::Solution CouplingOperator::solve(std::span<const cplx> b, std::span<const cplx> gamma) const {
    Solution sol;
    sol.field.assign(b.begin(), b.end());
    if (links_.empty()) {
        sol.iterations = 1;
        return sol;
    }
    std::vector<cplx> coupled(b.size());
    if (spec_.single_bounce) {
        apply(gamma, b, coupled);
        for (std::size_t n = 0; n < b.size(); ++n) sol.field[n] = b[n] + coupled[n];
        sol.iterations = 1;
        const double base = l2(b);
        sol.residual = base > 0.0 ? l2(coupled) / base : 0.0;
        return sol;
    }

    std::vector<cplx> next(b.size());
    for (int t = 1; t <= spec_.max_iterations; ++t) {
        apply(gamma, sol.field, coupled);
        double diff = 0.0;
        double prev = 0.0;
        for (std::size_t n = 0; n < b.size(); ++n) {
            next[n] = b[n] + coupled[n];
            diff += std::norm(next[n] - sol.field[n]);
            prev += std::norm(sol.field[n]);
        }
        sol.field.swap(next);
        sol.iterations = t;
        sol.residual = prev > 0.0 ? std::sqrt(diff / prev) : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (sol.residual < spec_.tolerance) return sol;
        if (!std::isfinite(sol.residual) || sol.residual > 1e12) break;
    }
    sol.converged = false;
    return sol;
}

IncidentField solve_incident(const Scene &scene, const PhaseConfig &config, const CouplingSpec &coupling) {
    if (config.size() != scene.element_count()) {
        throw NumericalError("phase configuration length does not match the element count");
    }
    IncidentField inc;
    inc.direct = direct_field(scene);
    inc.secondary = secondary_field(scene);
    std::vector<cplx> b = inc.direct;
    for (const auto &wc : inc.secondary)
        for (std::size_t n = 0; n < b.size(); ++n) b[n] += wc.values[n];

    const CouplingOperator op(scene.panel, scene.tx.wavenumber, coupling);
    auto sol = op.solve(b, config.reflection());
    inc.total = std::move(sol.field);
    inc.coupled.resize(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) inc.coupled[n] = inc.total[n] - b[n];
    inc.iterations = sol.iterations;
    inc.residual = sol.residual;
    if (!sol.converged) {
        throw CouplingNotConverged("coupling solve did not converge (residual " + std::to_string(sol.residual) +
                                       " after " + std::to_string(sol.iterations) + " iterations)",
                                   std::move(inc));
    }
    return inc;
}

FieldMap total_field(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                     std::span<const Vec3> points) {
    const auto &sources = scene.panel.element_centers;
    if (!points.empty() && kernels::min_separation(points, sources) < kernels::kMinDistance) {
        throw NumericalError("observation point coincides with an element center");
    }
    FieldMap map;
    map.points.assign(points.begin(), points.end());
    map.values.resize(points.size());
    const auto amp = source_amplitudes(config.reflection(), incident.total);
    kernels::radiate(points, sources, amp, scene.tx.wavenumber, map.values);
    return map;
}

EnergyReport energy_report(const Scene &scene, std::span<const cplx> focus_values,
                           std::span<const cplx> outer_values) {
    const auto &samples = scene.samples;
    if (focus_values.size() != samples.focus_points.size() || outer_values.size() != samples.outer_points.size()) {
        throw NumericalError("energy report needs the field at exactly the scene's sampling points");
    }
    double energy[3] = {0.0, 0.0, 0.0};
    double focus_sum = 0.0;
    for (const auto &v : focus_values) {
        energy[0] += std::norm(v);
        focus_sum += std::abs(v);
    }
    double outer_sum = 0.0;
    for (std::size_t j = 0; j < outer_values.size(); ++j) {
        energy[static_cast<int>(samples.outer_label(j))] += std::norm(outer_values[j]);
        outer_sum += std::abs(outer_values[j]);
    }
    const double total = energy[0] + energy[1] + energy[2];
    if (!(total > 0.0)) throw NumericalError("total scattered energy is zero");
    EnergyReport r;
    r.eta_focus = energy[0] / total;
    r.eta_dir_out = energy[1] / total;
    r.eta_unexp = energy[2] / total;
    r.mean_focus = focus_sum * samples.focus_weight();
    r.mean_outer = outer_sum * samples.outer_weight();
    r.focal_energy = energy[0];
    return r;
}

EnergyReport energy_report(const Scene &scene, const FieldMap &map) {
    const std::size_t nf = scene.samples.focus_points.size();
    if (map.values.size() != nf + scene.samples.outer_points.size()) {
        throw NumericalError("energy report needs the field at exactly the scene's sampling points");
    }
    const std::span<const cplx> all(map.values);
    return energy_report(scene, all.first(nf), all.subspan(nf));
}

double gain_db(const EnergyReport &before, const EnergyReport &after) {
    if (!(before.focal_energy > 0.0)) throw NumericalError("gain_db: baseline focal energy is zero");
    return 10.0 * std::log10(after.focal_energy / before.focal_energy);
}

double weighted_mean_magnitude(std::span<const cplx> values, double weight) {
    double s = 0.0;
    for (const auto &v : values) s += std::abs(v);
    return s * weight;
}

FieldModel::FieldModel(std::shared_ptr<const Scene> scene, const CouplingSpec &coupling,
                       std::size_t cache_limit_bytes)
    : scene_(std::move(scene)),
      direct_(direct_field(*scene_)),
      secondary_(secondary_field(*scene_)),
      excitation_(direct_),
      coupling_(scene_->panel, scene_->tx.wavenumber, coupling),
      focus_green_(scene_->samples.focus_points, scene_->panel.element_centers, scene_->tx.wavenumber,
                   cache_limit_bytes),
      outer_green_(scene_->samples.outer_points, scene_->panel.element_centers, scene_->tx.wavenumber,
                   cache_limit_bytes) {
    for (const auto &wc : secondary_)
        for (std::size_t n = 0; n < excitation_.size(); ++n) excitation_[n] += wc.values[n];
}

IncidentField FieldModel::incident(const PhaseConfig &config) const {
    if (config.size() != size()) throw NumericalError("phase configuration length does not match the element count");
    IncidentField inc;
    inc.direct = direct_;
    inc.secondary = secondary_;
    auto sol = coupling_.solve(excitation_, config.reflection());
    inc.total = std::move(sol.field);
    inc.coupled.resize(size());
    for (std::size_t n = 0; n < size(); ++n) inc.coupled[n] = inc.total[n] - excitation_[n];
    inc.iterations = sol.iterations;
    inc.residual = sol.residual;
    if (!sol.converged) {
        throw CouplingNotConverged("coupling solve did not converge (residual " + std::to_string(sol.residual) + ")",
                                   std::move(inc));
    }
    return inc;
}

Evaluation FieldModel::evaluate(const PhaseConfig &config, Targets targets) const {
    if (config.size() != size()) throw NumericalError("phase configuration length does not match the element count");
    Evaluation ev;
    ev.gamma = config.reflection();
    auto sol = coupling_.solve(excitation_, ev.gamma);
    ev.coupling_iterations = sol.iterations;
    ev.coupling_residual = sol.residual;
    if (!sol.converged) {
        IncidentField last;
        last.total = std::move(sol.field);
        last.iterations = sol.iterations;
        last.residual = sol.residual;
        throw CouplingNotConverged("coupling solve did not converge (residual " + std::to_string(sol.residual) + ")",
                                   std::move(last));
    }
    ev.incident = std::move(sol.field);
    const auto amp = source_amplitudes(ev.gamma, ev.incident);
    const auto &samples = scene_->samples;
    ev.focus_values.resize(samples.focus_points.size());
    focus_green_.apply(amp, ev.focus_values);
    ev.mean_focus = weighted_mean_magnitude(ev.focus_values, samples.focus_weight());
    if (targets == Targets::Both) {
        ev.outer_values.resize(samples.outer_points.size());
        outer_green_.apply(amp, ev.outer_values);
        ev.mean_outer = weighted_mean_magnitude(ev.outer_values, samples.outer_weight());
    }
    return ev;
}

EnergyReport FieldModel::report(const Evaluation &eval) const {
    return energy_report(*scene_, eval.focus_values, eval.outer_values);
}

}  // namespace ris
