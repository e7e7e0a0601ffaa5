// SPDX-License-Identifier: Apache-2.0
#pragma once

// Four-stage compilation of one phase configuration: geometric-optics start,
// coordinate refinement, NSGA-II exploration with progressive freezing, and
// a final gradient ascent.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ris/codebook.hpp"
#include "ris/config.hpp"
#include "ris/field.hpp"
#include "ris/sensitivity.hpp"

namespace ris {

struct StageRecord {
    std::string name;
    PhaseConfig config;
    EnergyReport report;
    double gain_db = 0.0;  // focal energy vs the previous stage
    int iterations = 0;    // element trials, generations or ascent steps
    long evaluations = 0;  // full-model evaluations
    double wall_clock_s = 0.0;
    std::vector<std::string> flags;
    /// Objective after each accepted update, starting with the input value.
    std::vector<double> objective_history;
};

struct StageTrace {
    bool minimize_outer = true;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;
};

struct ParetoMember {
    PhaseConfig config;
    double mean_focus = 0.0;
    double mean_outer = 0.0;
    int rank = 0;
    double crowding = 0.0;
    bool flagged = false;
};

struct ParetoFront {
    std::vector<ParetoMember> members;
    std::vector<std::size_t> rank0() const;
};

/// A stage failed; carries the records of the stages that finished.
class StageFailure : public NumericalError {
  public:
    StageFailure(const std::string &what, StageTrace partial)
        : NumericalError(what), partial_(std::move(partial)) {}
    const StageTrace &partial_trace() const noexcept { return partial_; }

  private:
    StageTrace partial_;
};

/// Path-length phases toward the focus center(s); centers assigned round-robin.
PhaseConfig go_init(const Scene &scene);

struct Stage1Result {
    PhaseConfig config;
    SensitivityReport report;
    StageRecord record;
    int accepted = 0;
    int sweeps = 0;
};

Stage1Result stage1_refine(const FieldModel &model, const PhaseConfig &start, const MatchParams &params);

struct Stage2Result {
    ParetoFront front;
    PhaseConfig knee;
    std::vector<std::uint8_t> frozen;
    std::vector<int> checkpoints;          // generations after which freezing ran
    std::vector<std::size_t> frozen_after;  // cumulative frozen count per checkpoint
    StageRecord record;
};

/// `report.frozen` marks elements frozen on entry (kept at the seed's phases).
Stage2Result nsga2_run(const FieldModel &model, const PhaseConfig &seed, const SensitivityReport &report,
                       const Nsga2Params &nsga, const MatchParams &params);

/// Generations after which elements are frozen: ceil(k * period * G) for k = 1, 2, ...
/// while k * period < 1.
std::vector<int> freeze_schedule(int generations, double period_fraction);

/// Index into front.members of the knee among rank-0 members.
std::size_t select_knee(const ParetoFront &front);

struct Stage3Result {
    PhaseConfig config;
    StageRecord record;
};

Stage3Result stage3_ascent(const FieldModel &model, const PhaseConfig &start, const MatchParams &params);

struct CompileResult {
    CodebookEntry entry;
    StageTrace trace;
};

/// Optional hooks for progress reporting.
struct CompileObserver {
    virtual ~CompileObserver() = default;
    virtual void stage_done(const StageRecord &) {}
    virtual void front_done(const std::string & /*stage*/, const ParetoFront &) {}
};

/// Throws ConfigError for invalid input and StageFailure when a stage fails.
CompileResult compile(const RunConfig &config, CompileObserver *observer = nullptr);

struct AblationResult {
    CompileResult with_min;
    CompileResult without_min;
};

/// Both arms from one shared GO / Stage 1 prefix.
AblationResult compile_ablation(const RunConfig &config, CompileObserver *observer = nullptr);

/// Unix time for codebook entries: SOURCE_DATE_EPOCH if set, else 0 unless
/// `wall_clock` is requested.
std::int64_t entry_timestamp(bool wall_clock);

}  // namespace ris
