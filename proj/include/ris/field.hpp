// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ris/config.hpp"
#include "ris/errors.hpp"
#include "ris/kernels.hpp"
#include "ris/scene.hpp"

namespace ris {

/// Unit-cell phases phi_n in [0, 2pi); reflection coefficients Gamma_n = e^{i phi_n}.
class PhaseConfig {
  public:
    PhaseConfig() = default;
    /// Wraps every entry into [0, 2pi). Throws NumericalError on non-finite input.
    explicit PhaseConfig(std::vector<double> phases);
    static PhaseConfig zeros(std::size_t n) { return PhaseConfig(std::vector<double>(n, 0.0)); }

    std::size_t size() const { return phases_.size(); }
    double operator[](std::size_t n) const { return phases_[n]; }
    std::span<const double> phases() const { return phases_; }
    void set(std::size_t n, double phi) { phases_[n] = wrap_phase(phi); }

    std::vector<cplx> reflection() const;

    friend bool operator==(const PhaseConfig &, const PhaseConfig &) = default;

  private:
    std::vector<double> phases_;
};

struct WallContribution {
    WallId wall{};
    std::vector<cplx> values;
};

struct IncidentField {
    std::vector<cplx> direct;                  // E_dir
    std::vector<WallContribution> secondary;   // E_sec per reflective wall
    std::vector<cplx> coupled;                 // E_cpl = E_inc - E_dir - sum E_sec
    std::vector<cplx> total;                   // E_inc
    int iterations = 0;
    double residual = 0.0;
};

/// Fixed-point coupling solve stopped at max_iterations above tolerance (or
/// diverged). Carries the last iterate.
class CouplingNotConverged : public NumericalError {
  public:
    CouplingNotConverged(const std::string &what, IncidentField last)
        : NumericalError(what), last_(std::move(last)) {}
    const IncidentField &last_iterate() const noexcept { return last_; }

  private:
    IncidentField last_;
};

struct FieldMap {
    std::vector<Vec3> points;
    std::vector<cplx> values;
    double normalization = 1.0;  // E_n in V/m
};

struct EnergyReport {
    double eta_focus = 0.0;
    double eta_dir_out = 0.0;
    double eta_unexp = 0.0;
    double mean_focus = 0.0;    // weighted mean |E| over focus samples
    double mean_outer = 0.0;    // weighted mean |E| over outer samples
    double focal_energy = 0.0;  // sum of |E|^2 over focus samples

    friend bool operator==(const EnergyReport &, const EnergyReport &) = default;
};

std::vector<cplx> direct_field(const Scene &scene);
std::vector<WallContribution> secondary_field(const Scene &scene);

/// Mutual-coupling operator (A(Gamma) E)_n = alpha * sum_{m in N_n} Gamma_m K_nm E_m
/// over the grid neighbourhood, K_nm = e^{ik r_nm} / (r_nm / (length_unit * lambda)).
class CouplingOperator {
  public:
    struct Link {
        std::size_t m;
        cplx kernel;  // alpha * K_nm
    };

    struct Solution {
        std::vector<cplx> field;
        int iterations = 0;
        double residual = 0.0;
        bool converged = true;
    };

    CouplingOperator(const RisPanel &panel, double wavenumber, const CouplingSpec &spec);

    std::size_t size() const { return offsets_.size() - 1; }
    std::span<const Link> neighbors(std::size_t n) const {
        return std::span(links_).subspan(offsets_[n], offsets_[n + 1] - offsets_[n]);
    }
    const CouplingSpec &spec() const { return spec_; }

    /// out = A(gamma) e
    void apply(std::span<const cplx> gamma, std::span<const cplx> e, std::span<cplx> out) const;

    /// Fixed-point iteration E <- b + A(gamma) E from E = b. Never throws;
    /// check `converged`.
    Solution solve(std::span<const cplx> b, std::span<const cplx> gamma) const;

  private:
    CouplingSpec spec_;
    std::vector<std::size_t> offsets_;
    std::vector<Link> links_;
};

/// Throws CouplingNotConverged.
IncidentField solve_incident(const Scene &scene, const PhaseConfig &config, const CouplingSpec &coupling);

/// Coherent sum over all elements at each point. Throws NumericalError if a
/// point lies within 1e-6 m of an element center.
FieldMap total_field(const Scene &scene, const PhaseConfig &config, const IncidentField &incident,
                     std::span<const Vec3> points);

/// `map` must hold the focus points followed by the outer points of the scene.
EnergyReport energy_report(const Scene &scene, const FieldMap &map);
EnergyReport energy_report(const Scene &scene, std::span<const cplx> focus_values,
                           std::span<const cplx> outer_values);

/// 10 log10(after.focal_energy / before.focal_energy).
double gain_db(const EnergyReport &before, const EnergyReport &after);

/// Field values and objectives of one configuration under the full model.
struct Evaluation {
    std::vector<cplx> gamma;
    std::vector<cplx> incident;  // E_inc
    std::vector<cplx> focus_values;
    std::vector<cplx> outer_values;  // empty when only the focus set was requested
    double mean_focus = 0.0;
    double mean_outer = 0.0;
    int coupling_iterations = 0;
    double coupling_residual = 0.0;
};

/// Precomputed state for repeated evaluation on one scene: the excitation
/// b = E_dir + sum E_sec, the coupling operator and the Green's operators of
/// both sampling sets.
class FieldModel {
  public:
    enum class Targets { FocusOnly, Both };

    FieldModel(std::shared_ptr<const Scene> scene, const CouplingSpec &coupling,
               std::size_t cache_limit_bytes = std::size_t{1} << 30);

    const Scene &scene() const { return *scene_; }
    std::shared_ptr<const Scene> scene_ptr() const { return scene_; }
    const CouplingSpec &coupling() const { return coupling_.spec(); }
    const CouplingOperator &coupling_operator() const { return coupling_; }
    std::size_t size() const { return excitation_.size(); }
    std::span<const cplx> excitation() const { return excitation_; }
    const kernels::GreenOperator &focus_green() const { return focus_green_; }
    const kernels::GreenOperator &outer_green() const { return outer_green_; }

    /// Full incident-field record. Throws CouplingNotConverged.
    IncidentField incident(const PhaseConfig &config) const;

    /// Throws CouplingNotConverged.
    Evaluation evaluate(const PhaseConfig &config, Targets targets = Targets::Both) const;

    EnergyReport report(const Evaluation &eval) const;

  private:
    std::shared_ptr<const Scene> scene_;
    std::vector<cplx> direct_;
    std::vector<WallContribution> secondary_;
    std::vector<cplx> excitation_;
    CouplingOperator coupling_;
    kernels::GreenOperator focus_green_;
    kernels::GreenOperator outer_green_;
};

/// Weighted mean of |values|.
double weighted_mean_magnitude(std::span<const cplx> values, double weight);

}  // namespace ris
