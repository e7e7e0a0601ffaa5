// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ris/match.hpp"
#include "ris/random.hpp"
#include "support.hpp"

using namespace ris;

namespace {

RunConfig tiny() {
    auto cfg = ristest::small_config(8, 60, 90);
    cfg.nsga.population = 8;
    cfg.nsga.generations = 4;
    cfg.match.max_iterations = 300;
    return cfg;
}

// One element, one focus point, no coupling: |E| does not depend on the phase.
FieldModel flat_model(bool with_walls = true) {
    auto cfg = ristest::small_config(1, 1, 10);
    cfg.scene.tx_position = {1.0, 0.75, 0.75};
    if (!with_walls) cfg.scene.wall_reflectivity = {0, 0, 0, 0, 0, 0};
    CouplingSpec cs;
    cs.alpha = 0.0;
    return FieldModel(ristest::make_scene(cfg.scene), cs);
}

bool monotone(const std::vector<double> &v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1]) return false;
    return true;
}

ParetoFront synthetic(const std::vector<std::pair<double, double>> &fo) {
    ParetoFront f;
    for (const auto &[F, O] : fo) f.members.push_back({PhaseConfig{}, F, O, 0, 0.0, false});
    return f;
}

}  // namespace

TEST_CASE("geometric-optics start") {
    auto sc = ristest::small_config(6, 20, 30).scene;
    sc.tx_position = {1.0, 0.75, 0.75};
    sc.focus_centers = {{0.5, 0.75, 0.75}};
    const auto s = build_geometry(sc);
    const auto phi = go_init(s);
    const double k = s.tx.wavenumber;
    for (std::size_t n = 0; n < s.element_count(); ++n) {
        const Vec3 &p = s.panel.element_centers[n];
        const double expect = wrap_phase(-k * (distance(p, sc.tx_position) + distance(p, sc.focus_centers[0])));
        CHECK(phi[n] == doctest::Approx(expect).epsilon(1e-12));
        // both points lie on the panel axis, so mirrored elements are equidistant
        const std::size_t mirror = static_cast<std::size_t>(s.panel.row(n) * 6 + (5 - s.panel.col(n)));
        CHECK(std::abs(wrap_symmetric(phi[n] - phi[mirror])) < 1e-9);
    }

    // A path-length difference of exactly one wavelength leaves the phase unchanged.
    const double lambda = s.tx.wavelength;
    CHECK(std::abs(wrap_symmetric(wrap_phase(-k * 0.7) - wrap_phase(-k * (0.7 + lambda)))) < 1e-9);

    sc.focus_centers = {{0.5, 0.5, 0.5}, {1.0, 1.0, 1.0}};
    const auto s2 = build_geometry(sc);
    const auto phi2 = go_init(s2);
    for (std::size_t n = 0; n < s2.element_count(); ++n) {
        const Vec3 &p = s2.panel.element_centers[n];
        const Vec3 &c = sc.focus_centers[n % 2];
        CHECK(phi2[n] == doctest::Approx(wrap_phase(-k * (distance(p, sc.tx_position) + distance(p, c)))).epsilon(1e-12));
    }
}

TEST_CASE("stage 1 at a stationary point returns its input") {
    const auto m = flat_model();
    const PhaseConfig start(std::vector<double>{1.0});
    const auto r = stage1_refine(m, start, MatchParams{});
    CHECK(r.config == start);
    CHECK(r.sweeps == 1);
    CHECK(r.accepted == 0);
    CHECK(r.record.objective_history.size() == 1);
}

TEST_CASE("stage 1 improves monotonically") {
    const auto cfg = tiny();
    const FieldModel m(ristest::make_scene(cfg.scene), cfg.coupling);
    const auto go = go_init(m.scene());
    const auto r = stage1_refine(m, go, cfg.match);
    CHECK(monotone(r.record.objective_history));
    CHECK(r.record.iterations <= cfg.match.max_iterations);
    CHECK(r.accepted > 0);
    CHECK(r.record.objective_history.back() > r.record.objective_history.front());
    CHECK(r.report.size() == 64);
    CHECK(r.record.report.mean_focus == doctest::Approx(r.record.objective_history.back()).epsilon(1e-12));
}

TEST_CASE("freezing schedule") {
    CHECK(freeze_schedule(75, 0.25) == std::vector<int>{19, 38, 57});
    CHECK(freeze_schedule(20, 0.25) == std::vector<int>{5, 10, 15});
    CHECK(freeze_schedule(4, 0.25) == std::vector<int>{1, 2, 3});
    CHECK(freeze_schedule(1, 0.25) == std::vector<int>{1});
    CHECK(freeze_schedule(10, 1.0).empty());
}

TEST_CASE("knee selection") {
    CHECK(select_knee(synthetic({{3.0, 1.0}})) == 0);
    CHECK(select_knee(synthetic({{1.0, 0.0}, {0.0, 1.0}})) == 0);
    // equal scores: higher focus wins, then lower index
    CHECK(select_knee(synthetic({{1.0, 1.0}, {0.0, 0.0}})) == 0);
    CHECK(select_knee(synthetic({{0.0, 0.0}, {1.0, 1.0}})) == 1);
    CHECK(select_knee(synthetic({{2.0, 2.0}, {2.0, 2.0}})) == 0);
    // dominated members are ignored
    auto f = synthetic({{0.0, 1.0}, {5.0, -5.0}});
    f.members[1].rank = 1;
    CHECK(select_knee(f) == 0);

    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::pair<double, double>> fo(20);
        for (auto &p : fo) p = {std::floor(rng.uniform() * 8), std::floor(rng.uniform() * 8)};
        const auto front = synthetic(fo);
        // exhaustive scalarization scan
        double flo = 1e9, fhi = -1e9, olo = 1e9, ohi = -1e9;
        for (auto &[F, O] : fo) {
            flo = std::min(flo, F), fhi = std::max(fhi, F), olo = std::min(olo, O), ohi = std::max(ohi, O);
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < fo.size(); ++i) {
            auto score = [&](std::size_t j) {
                return (fhi > flo ? (fo[j].first - flo) / (fhi - flo) : 0.0) -
                       (ohi > olo ? (fo[j].second - olo) / (ohi - olo) : 0.0);
            };
            if (score(i) > score(best) || (score(i) == score(best) && fo[i].first > fo[best].first)) best = i;
        }
        CHECK(select_knee(front) == best);
    }
    CHECK_THROWS_AS(select_knee(ParetoFront{}), NumericalError);
}

TEST_CASE("NSGA-II stage") {
    const auto cfg = tiny();
    const FieldModel m(ristest::make_scene(cfg.scene), cfg.coupling);
    const auto s1 = stage1_refine(m, go_init(m.scene()), cfg.match);
    auto report = s1.report;
    report.frozen[3] = 1;  // frozen on entry
    report.frozen[40] = 1;
    const auto r = nsga2_run(m, s1.config, report, cfg.nsga, cfg.match);

    SUBCASE("rank-0 members are pairwise non-dominated") {
        const auto idx = r.front.rank0();
        REQUIRE_FALSE(idx.empty());
        for (auto i : idx)
            for (auto j : idx) {
                const auto &a = r.front.members[i];
                const auto &b = r.front.members[j];
                const bool dom = a.mean_focus >= b.mean_focus && a.mean_outer <= b.mean_outer &&
                                 (a.mean_focus > b.mean_focus || a.mean_outer < b.mean_outer);
                CHECK_FALSE(dom);
            }
        for (auto i : idx) CHECK((std::isinf(r.front.members[i].crowding) || std::isfinite(r.front.members[i].crowding)));
    }
    SUBCASE("freezing follows the schedule") {
        CHECK(r.checkpoints == std::vector<int>{1, 2, 3});
        std::size_t expect = 2, active = 62;
        std::vector<std::size_t> after;
        for (int k = 0; k < 3; ++k) {
            const auto count = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(active)));
            expect += count;
            active -= count;
            after.push_back(expect);
        }
        CHECK(r.frozen_after == after);
        std::size_t frozen = 0;
        for (auto f : r.frozen) frozen += f;
        CHECK(frozen == expect);
        CHECK(r.frozen[3] == 1);
        CHECK(r.frozen[40] == 1);
    }
    SUBCASE("frozen phases are identical across the population") {
        for (std::size_t n = 0; n < 64; ++n) {
            if (!r.frozen[n]) continue;
            for (const auto &mbr : r.front.members) CHECK(mbr.config[n] == r.knee[n]);
        }
        CHECK(r.knee[3] == s1.config[3]);
        CHECK(r.knee[40] == s1.config[40]);
    }
    SUBCASE("deterministic for a fixed seed") {
        const auto again = nsga2_run(m, s1.config, report, cfg.nsga, cfg.match);
        CHECK(again.knee == r.knee);
        REQUIRE(again.front.members.size() == r.front.members.size());
        for (std::size_t i = 0; i < r.front.members.size(); ++i) {
            CHECK(again.front.members[i].config == r.front.members[i].config);
            CHECK(again.front.members[i].mean_focus == r.front.members[i].mean_focus);
        }
    }
    SUBCASE("invalid population") {
        auto bad = cfg.nsga;
        bad.population = 2;
        CHECK_THROWS_AS(nsga2_run(m, s1.config, report, bad, cfg.match), ConfigError);
    }
}

TEST_CASE("stage 3") {
    SUBCASE("zero gradient: one iteration, input returned") {
        const auto m = flat_model();
        MatchParams p;
        p.minimize_outer = false;
        const PhaseConfig start(std::vector<double>{2.0});
        const auto r = stage3_ascent(m, start, p);
        CHECK(r.config == start);
        CHECK(r.record.flags.front() == "zero_gradient");
        CHECK(r.record.iterations == 1);
    }
    SUBCASE("objective history is monotone") {
        const auto cfg = tiny();
        const FieldModel m(ristest::make_scene(cfg.scene), cfg.coupling);
        for (bool outer : {true, false}) {
            auto p = cfg.match;
            p.minimize_outer = outer;
            const auto r = stage3_ascent(m, go_init(m.scene()), p);
            CHECK(monotone(r.record.objective_history));
            CHECK(r.record.objective_history.back() > r.record.objective_history.front());
        }
    }
}

TEST_CASE("compile") {
    const auto cfg = tiny();
    const auto a = compile(cfg);
    const auto b = compile(cfg);
    CHECK(a.entry == b.entry);
    REQUIRE(a.trace.stages.size() == 4);
    CHECK(a.trace.stages[0].name == "GO");
    CHECK(a.trace.stages[3].name == "Stage 3");
    CHECK(a.entry.phases.size() == 64);
    CHECK(a.entry.scene_hash == scene_hash(cfg));
    CHECK(a.entry.stage_summary.size() == 4);
    CHECK(a.entry.metrics == a.trace.stages[3].report);
    for (const auto &s : a.trace.stages)
        CHECK(s.report.eta_focus + s.report.eta_dir_out + s.report.eta_unexp == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.trace.stages[i].report == b.trace.stages[i].report);
        CHECK(a.trace.stages[i].objective_history == b.trace.stages[i].objective_history);
    }

    auto without = cfg;
    without.match.minimize_outer = false;
    const auto c = compile(without);
    CHECK(a.trace.minimize_outer);
    CHECK_FALSE(c.trace.minimize_outer);

    const auto abl = compile_ablation(cfg);
    CHECK(abl.with_min.entry.phases == a.entry.phases);
    CHECK(abl.without_min.entry.phases == c.entry.phases);
    CHECK(abl.with_min.trace.stages[2].name == "Stage 2 (w)");
    CHECK(abl.without_min.trace.stages[3].name == "Stage 3 (w/o)");
}

TEST_CASE("a failing stage reports the partial trace") {
    auto cfg = tiny();
    cfg.coupling.alpha = 0.9;
    cfg.coupling.max_iterations = 1;
    cfg.coupling.tolerance = 1e-14;
    try {
        compile(cfg);
        FAIL("expected StageFailure");
    } catch (const StageFailure &e) {
        CHECK(e.partial_trace().stages.empty());
        CHECK(std::string(e.what()).find("GO") != std::string::npos);
    }
}
