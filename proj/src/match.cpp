// SPDX-License-Identifier: Apache-2.0
#include "ris/match.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <numeric>
#include <set>

#include "ris/nsga2.hpp"
#include "ris/random.hpp"
#include "ris/scene.hpp"

namespace ris {

namespace {

using Clock = std::chrono::steady_clock;
using Targets = FieldModel::Targets;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

StageRecord make_record(const FieldModel &model, std::string name, const PhaseConfig &config) {
    StageRecord rec;
    rec.name = std::move(name);
    rec.config = config;
    rec.report = model.report(model.evaluate(config, Targets::Both));
    return rec;
}

std::string count_flag(const char *what, long n) { return std::string(what) + ":" + std::to_string(n); }

struct Candidate {
    std::vector<double> genes;  // full phase vector
    double focus = 0.0;
    double outer = 0.0;
    bool flagged = false;
    int rank = 0;
    double crowding = 0.0;
};

constexpr double kWorstOuter = 1e300;

void evaluate_all(const FieldModel &model, std::vector<Candidate> &pop, std::size_t from, long &evaluations,
                  long &flagged) {
    const auto count = static_cast<std::ptrdiff_t>(pop.size() - from);
    long bad = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : bad)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        auto &c = pop[from + static_cast<std::size_t>(i)];
        try {
            const auto eval = model.evaluate(PhaseConfig(c.genes), Targets::Both);
            c.focus = eval.mean_focus;
            c.outer = eval.mean_outer;
            c.flagged = false;
        } catch (const NumericalError &) {
            c.focus = 0.0;
            c.outer = kWorstOuter;
            c.flagged = true;
            ++bad;
        }
    }
    evaluations += count;
    flagged += bad;
}

std::vector<nsga2::Costs> costs_of(const std::vector<Candidate> &pop, bool minimize_outer) {
    std::vector<nsga2::Costs> costs;
    costs.reserve(pop.size());
    for (const auto &c : pop) {
        if (minimize_outer) costs.push_back({-c.focus, c.outer});
        else costs.push_back({-c.focus});
    }
    return costs;
}

void assign_rank_crowding(std::vector<Candidate> &pop, bool minimize_outer) {
    const auto costs = costs_of(pop, minimize_outer);
    std::vector<int> rank;
    const auto fronts = nsga2::non_dominated_sort(costs, rank);
    for (const auto &f : fronts) {
        const auto d = nsga2::crowding_distance(costs, f);
        for (std::size_t i = 0; i < f.size(); ++i) {
            pop[f[i]].rank = rank[f[i]];
            pop[f[i]].crowding = d[i];
        }
    }
}

// Environmental selection of P survivors from parents + offspring.
std::vector<Candidate> survivors(std::vector<Candidate> combined, std::size_t P, bool minimize_outer) {
    const auto costs = costs_of(combined, minimize_outer);
    std::vector<int> rank;
    const auto fronts = nsga2::non_dominated_sort(costs, rank);
    std::vector<Candidate> next;
    next.reserve(P);
    for (const auto &f : fronts) {
        const auto d = nsga2::crowding_distance(costs, f);
        if (next.size() + f.size() <= P) {
            for (std::size_t i = 0; i < f.size(); ++i) next.push_back(std::move(combined[f[i]]));
        } else {
            std::vector<std::size_t> order(f.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
            for (std::size_t i = 0; next.size() < P; ++i) next.push_back(std::move(combined[f[order[i]]]));
        }
        if (next.size() == P) break;
    }
    assign_rank_crowding(next, minimize_outer);
    return next;
}

ParetoFront front_of(const std::vector<Candidate> &pop) {
    ParetoFront front;
    front.members.reserve(pop.size());
    for (const auto &c : pop) front.members.push_back({PhaseConfig(c.genes), c.focus, c.outer, c.rank, c.crowding, c.flagged});
    return front;
}

// Knee over a population without materializing PhaseConfigs.
std::size_t knee_index(const std::vector<Candidate> &pop) {
    ParetoFront f;
    f.members.reserve(pop.size());
    for (const auto &c : pop) f.members.push_back({PhaseConfig{}, c.focus, c.outer, c.rank, c.crowding, c.flagged});
    return select_knee(f);
}

}  // namespace

std::vector<std::size_t> ParetoFront::rank0() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i].rank == 0) idx.push_back(i);
    return idx;
}

PhaseConfig go_init(const Scene &scene) {
    const auto &centers = scene.focus.centers;
    const double k = scene.tx.wavenumber;
    std::vector<double> phi(scene.element_count());
    for (std::size_t n = 0; n < phi.size(); ++n) {
        const Vec3 &p = scene.panel.element_centers[n];
        const Vec3 &c = centers[n % centers.size()];
        phi[n] = -k * (distance(p, scene.tx.position) + distance(p, c));
    }
    return PhaseConfig(std::move(phi));
}

// Changes below this relative size are treated as rounding noise.
constexpr double kRoundoff = 1e-12;

Stage1Result stage1_refine(const FieldModel &model, const PhaseConfig &start, const MatchParams &params) {
    const auto t0 = Clock::now();
    Stage1Result out;
    PhaseConfig cfg = start;
    double F = model.evaluate(cfg, Targets::FocusOnly).mean_focus;
    long evaluations = 1;
    long failed = 0;
    std::vector<double> history{F};
    const std::size_t N = cfg.size();
    int trials = 0;
    bool budget_hit = false;
    for (;;) {
        const double F_sweep = F;
        ++out.sweeps;
        for (std::size_t n = 0; n < N; ++n) {
            if (trials >= params.max_iterations) {
                budget_hit = true;
                break;
            }
            ++trials;
            const double phi = cfg[n];
            double best_F = F;
            double best_phi = phi;
            for (double step : {params.delta_phi_stage1, -params.delta_phi_stage1}) {
                cfg.set(n, phi + step);
                ++evaluations;
                try {
                    const double f = model.evaluate(cfg, Targets::FocusOnly).mean_focus;
                    if (f > best_F + kRoundoff * std::abs(best_F)) {
                        best_F = f;
                        best_phi = cfg[n];
                    }
                } catch (const CouplingNotConverged &) {
                    ++failed;
                }
            }
            cfg.set(n, best_phi);
            if (best_F > F) {
                F = best_F;
                ++out.accepted;
                history.push_back(F);
            }
        }
        if (budget_hit) break;
        if (!(F_sweep > 0.0) || (F - F_sweep) / F_sweep < params.eps_local) break;
    }
    const auto eval = model.evaluate(cfg, Targets::Both);
    out.report = analyze(model, eval, params.dense_h_cap);
    out.config = cfg;
    out.record.name = "Stage 1";
    out.record.config = cfg;
    out.record.report = model.report(eval);
    out.record.iterations = trials;
    out.record.evaluations = evaluations + 1;
    out.record.objective_history = std::move(history);
    out.record.flags.push_back(count_flag("accepted_updates", out.accepted));
    out.record.flags.push_back(count_flag("sweeps", out.sweeps));
    if (budget_hit) out.record.flags.emplace_back("iteration_budget_reached");
    if (failed > 0) out.record.flags.push_back(count_flag("coupling_not_converged", failed));
    out.record.wall_clock_s = seconds_since(t0);
    return out;
}

std::vector<int> freeze_schedule(int generations, double period_fraction) {
    std::set<int> gens;
    if (period_fraction > 0.0) {
        for (int k = 1; k * period_fraction < 1.0 - 1e-12; ++k) {
            const int g = static_cast<int>(std::ceil(k * period_fraction * generations - 1e-9));
            if (g >= 1 && g <= generations) gens.insert(g);
        }
    }
    return {gens.begin(), gens.end()};
}

std::size_t select_knee(const ParetoFront &front) {
    const auto idx = front.rank0();
    if (idx.empty()) throw NumericalError("select_knee: empty front");
    double f_lo = std::numeric_limits<double>::infinity(), f_hi = -f_lo;
    double o_lo = f_lo, o_hi = -f_lo;
    for (auto i : idx) {
        f_lo = std::min(f_lo, front.members[i].mean_focus);
        f_hi = std::max(f_hi, front.members[i].mean_focus);
        o_lo = std::min(o_lo, front.members[i].mean_outer);
        o_hi = std::max(o_hi, front.members[i].mean_outer);
    }
    const auto norm = [](double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; };
    std::size_t best = idx.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto i : idx) {
        const auto &m = front.members[i];
        const double score = norm(m.mean_focus, f_lo, f_hi) - norm(m.mean_outer, o_lo, o_hi);
        const auto &b = front.members[best];
        if (score > best_score || (score == best_score && m.mean_focus > b.mean_focus)) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

Stage2Result nsga2_run(const FieldModel &model, const PhaseConfig &seed, const SensitivityReport &report,
                       const Nsga2Params &nsga, const MatchParams &params) {
    const auto t0 = Clock::now();
    if (nsga.population < 4 || nsga.population % 2 != 0) {
        throw ConfigError("nsga2.population", "population must be even and at least 4");
    }
    if (nsga.generations < 1) throw ConfigError("nsga2.generations", "at least one generation is required");
    const std::size_t N = seed.size();
    const std::size_t P = static_cast<std::size_t>(nsga.population);
    const bool two_obj = params.minimize_outer;

    Stage2Result out;
    out.frozen = report.frozen.empty() ? std::vector<std::uint8_t>(N, 0) : report.frozen;
    if (out.frozen.size() != N) throw NumericalError("nsga2_run: frozen mask length mismatch");
    auto active = [&] {
        std::vector<std::size_t> a;
        for (std::size_t n = 0; n < N; ++n)
            if (!out.frozen[n]) a.push_back(n);
        return a;
    };
    std::vector<std::size_t> genes = active();

    Rng rng(params.rng_seed);
    long evaluations = 0;
    long flagged = 0;

    std::vector<Candidate> pop(P);
    pop[0].genes.assign(seed.phases().begin(), seed.phases().end());
    for (std::size_t i = 1; i < P; ++i) {
        pop[i].genes = pop[0].genes;
        for (auto n : genes) pop[i].genes[n] = wrap_phase(pop[i].genes[n] + params.delta_phi_stage1 * rng.normal());
    }
    evaluate_all(model, pop, 0, evaluations, flagged);
    assign_rank_crowding(pop, two_obj);

    out.checkpoints = freeze_schedule(nsga.generations, params.freeze_period_fraction);
    auto tournament = [&] {
        const std::size_t a = rng.index(P);
        const std::size_t b = rng.index(P);
        return nsga2::crowded_less(pop[b].rank, pop[b].crowding, pop[a].rank, pop[a].crowding) ? b : a;
    };

    for (int g = 1; g <= nsga.generations; ++g) {
        std::vector<Candidate> combined = pop;
        combined.reserve(2 * P);
        for (std::size_t k = 0; k < P / 2; ++k) {
            const std::size_t a = tournament();
            const std::size_t b = tournament();
            Candidate c1{pop[a].genes}, c2{pop[b].genes};
            if (rng.uniform() < nsga.crossover_probability) {
                for (auto n : genes)
                    if (rng.uniform() < 0.5) nsga2::sbx_phase(c1.genes[n], c2.genes[n], nsga.crossover_index, rng);
            }
            for (auto *c : {&c1, &c2}) {
                for (auto n : genes)
                    if (rng.uniform() < nsga.mutation_probability)
                        c->genes[n] = nsga2::mutate_phase(c->genes[n], nsga.mutation_index, rng);
            }
            combined.push_back(std::move(c1));
            combined.push_back(std::move(c2));
        }
        evaluate_all(model, combined, P, evaluations, flagged);
        pop = survivors(std::move(combined), P, two_obj);

        if (std::binary_search(out.checkpoints.begin(), out.checkpoints.end(), g) && !genes.empty()) {
            const auto &knee = pop[knee_index(pop)];
            const PhaseConfig knee_cfg(knee.genes);
            const auto eval = model.evaluate(knee_cfg, Targets::Both);
            ++evaluations;
            const auto rep = analyze(model, eval, 0);
            const auto order = rank_influence(rep.diag_h, [&] {
                std::vector<std::uint8_t> mask(N);
                for (std::size_t n = 0; n < N; ++n) mask[n] = !out.frozen[n];
                return mask;
            }());
            const auto count = static_cast<std::size_t>(
                std::ceil(params.freeze_fraction * static_cast<double>(genes.size()) - 1e-9));
            for (std::size_t i = 0; i < std::min(count, order.size()); ++i) {
                const std::size_t n = order[i];
                out.frozen[n] = 1;
                const double phi = knee_cfg[n];
                for (auto &c : pop) c.genes[n] = phi;
            }
            genes = active();
            evaluate_all(model, pop, 0, evaluations, flagged);
            assign_rank_crowding(pop, two_obj);
            out.frozen_after.push_back(N - genes.size());
        }
    }

    out.front = front_of(pop);
    out.knee = out.front.members[select_knee(out.front)].config;
    out.record = make_record(model, "Stage 2", out.knee);
    out.record.iterations = nsga.generations;
    out.record.evaluations = evaluations + 1;
    out.record.flags.push_back(two_obj ? "objectives:focus+outer" : "objectives:focus");
    out.record.flags.push_back(count_flag("frozen", static_cast<long>(N - genes.size())));
    if (flagged > 0) out.record.flags.push_back(count_flag("flagged_candidates", flagged));
    out.record.wall_clock_s = seconds_since(t0);
    return out;
}

Stage3Result stage3_ascent(const FieldModel &model, const PhaseConfig &start, const MatchParams &params) {
    const auto t0 = Clock::now();
    const bool with_outer = params.minimize_outer;
    const auto targets = with_outer ? Targets::Both : Targets::FocusOnly;
    const double mu = params.outer_weight;
    auto objective = [&](const Evaluation &e) { return e.mean_focus - (with_outer ? mu * e.mean_outer : 0.0); };

    Stage3Result out;
    PhaseConfig cfg = start;
    Evaluation eval = model.evaluate(cfg, targets);
    long evaluations = 1;
    double J = objective(eval);
    std::vector<double> history{J};
    std::vector<std::string> flags;
    constexpr int kMaxHalvings = 30;
    int it = 0;
    while (it < params.max_iterations) {
        ++it;
        auto g = objective_gradient(model, eval).values;
        if (with_outer) {
            const auto go = outer_gradient(model, eval).values;
            for (std::size_t n = 0; n < g.size(); ++n) g[n] -= mu * go[n];
        }
        double gmax = 0.0;
        for (double x : g) gmax = std::max(gmax, std::abs(x));
        if (!(gmax > kRoundoff * std::max(std::abs(J), 1.0))) {
            flags.emplace_back("zero_gradient");
            break;
        }
        double step = params.delta_phi_stage3;
        bool accepted = false;
        for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
            std::vector<double> phi(cfg.phases().begin(), cfg.phases().end());
            for (std::size_t n = 0; n < phi.size(); ++n) phi[n] += step * g[n] / gmax;
            PhaseConfig trial(std::move(phi));
            ++evaluations;
            try {
                auto e = model.evaluate(trial, targets);
                const double Jt = objective(e);
                if (Jt >= J) {
                    const double rel = J != 0.0 ? (Jt - J) / std::abs(J) : (Jt > J ? 1.0 : 0.0);
                    cfg = std::move(trial);
                    eval = std::move(e);
                    J = Jt;
                    history.push_back(J);
                    accepted = true;
                    if (rel < params.eps_final) flags.emplace_back("converged");
                    break;
                }
            } catch (const CouplingNotConverged &) {
                // treated as a decrease
            }
        }
        if (!accepted) {
            flags.emplace_back("converged_no_improvement_at_min_step");
            break;
        }
        if (!flags.empty() && flags.back() == "converged") break;
    }
    if (it >= params.max_iterations && (flags.empty() || flags.back() != "converged"))
        flags.emplace_back("iteration_budget_reached");
    out.config = cfg;
    out.record = make_record(model, "Stage 3", cfg);
    out.record.iterations = it;
    out.record.evaluations = evaluations + 1;
    out.record.objective_history = std::move(history);
    out.record.flags = std::move(flags);
    out.record.flags.push_back(with_outer ? "objective:focus-outer" : "objective:focus");
    out.record.wall_clock_s = seconds_since(t0);
    return out;
}

std::int64_t entry_timestamp(bool wall_clock) {
    if (const char *env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        char *end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return wall_clock ? static_cast<std::int64_t>(std::time(nullptr)) : 0;
}

namespace {

struct Prefix {
    std::shared_ptr<const Scene> scene;
    std::unique_ptr<FieldModel> model;
    StageTrace trace;
    Stage1Result s1;
};

void push(StageTrace &trace, StageRecord rec, CompileObserver *observer) {
    if (!trace.stages.empty()) rec.gain_db = gain_db(trace.stages.back().report, rec.report);
    trace.stages.push_back(std::move(rec));
    if (observer) observer->stage_done(trace.stages.back());
}

template <typename F>
auto run_stage(const char *name, StageTrace &trace, F &&f) -> decltype(f()) {
    try {
        return f();
    } catch (const NumericalError &e) {
        throw StageFailure(std::string(name) + " failed: " + e.what(), trace);
    }
}

Prefix run_prefix(const RunConfig &config, CompileObserver *observer) {
    validate_parameters(config);
    Prefix p;
    p.scene = std::make_shared<const Scene>(build_scene(config.scene));
    p.model = std::make_unique<FieldModel>(p.scene, config.coupling);
    p.trace.minimize_outer = config.match.minimize_outer;
    p.trace.seed = config.match.rng_seed;
    const auto &model = *p.model;
    run_stage("GO", p.trace, [&] {
        const auto t0 = Clock::now();
        auto rec = make_record(model, "GO", go_init(*p.scene));
        rec.evaluations = 1;
        rec.wall_clock_s = seconds_since(t0);
        push(p.trace, std::move(rec), observer);
        return 0;
    });
    p.s1 = run_stage("Stage 1", p.trace, [&] {
        return stage1_refine(model, p.trace.stages.back().config, config.match);
    });
    push(p.trace, p.s1.record, observer);
    return p;
}

CompileResult finish(const RunConfig &config, const Prefix &p, StageTrace trace, CompileObserver *observer,
                     const std::string &suffix) {
    const auto &model = *p.model;
    auto s2 = run_stage("Stage 2", trace, [&] {
        return nsga2_run(model, p.s1.config, p.s1.report, config.nsga, config.match);
    });
    s2.record.name += suffix;
    if (observer) observer->front_done(s2.record.name, s2.front);
    push(trace, std::move(s2.record), observer);
    auto s3 = run_stage("Stage 3", trace, [&] { return stage3_ascent(model, s2.knee, config.match); });
    s3.record.name += suffix;
    push(trace, std::move(s3.record), observer);

    CompileResult out;
    auto &e = out.entry;
    e.key = canonical_key(config.scene);
    e.phases.assign(s3.config.phases().begin(), s3.config.phases().end());
    e.scene_hash = scene_hash(config);
    e.seed = config.match.rng_seed;
    e.metrics = trace.stages.back().report;
    e.created_at = entry_timestamp(false);
    for (const auto &s : trace.stages)
        e.stage_summary.push_back({s.name, s.report.eta_focus, s.report.eta_dir_out, s.report.eta_unexp});
    out.trace = std::move(trace);
    return out;
}

}  // namespace

CompileResult compile(const RunConfig &config, CompileObserver *observer) {
    auto p = run_prefix(config, observer);
    StageTrace trace = p.trace;
    return finish(config, p, std::move(trace), observer, "");
}

AblationResult compile_ablation(const RunConfig &config, CompileObserver *observer) {
    auto p = run_prefix(config, observer);
    AblationResult out;
    RunConfig with = config;
    with.match.minimize_outer = true;
    RunConfig without = config;
    without.match.minimize_outer = false;
    StageTrace t_with = p.trace;
    t_with.minimize_outer = true;
    out.with_min = finish(with, p, std::move(t_with), observer, " (w)");
    StageTrace t_without = p.trace;
    t_without.minimize_outer = false;
    out.without_min = finish(without, p, std::move(t_without), observer, " (w/o)");
    return out;
}

}  // namespace ris
