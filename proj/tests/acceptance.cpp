// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail N[,M...]] [--only N[,M...]]
// Exit status is 0 when the set of failing criteria equals the expected set.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "ris/codebook.hpp"
#include "ris/match.hpp"
#include "ris/sensitivity.hpp"
#include "support.hpp"

using namespace ris;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3};

std::set<int> parse_list(const std::string &s) {
    std::set<int> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.insert(std::stoi(tok));
    return out;
}

RunConfig panel12(double alpha) {
    auto cfg = desk_profile();
    cfg.scene.grid_side = 12;
    cfg.coupling.alpha = alpha;
    return cfg;
}

FieldModel model_of(const RunConfig &cfg) { return FieldModel(ristest::make_scene(cfg.scene), cfg.coupling); }

double focus_mean(const FieldModel &m, std::vector<double> phi) {
    return m.evaluate(PhaseConfig(std::move(phi)), FieldModel::Targets::FocusOnly).mean_focus;
}

// --- 1 ----------------------------------------------------------------------
bool energy_partition() {
    const auto cfg = desk_profile();
    const auto m = model_of(cfg);
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto r = m.report(m.evaluate(ristest::random_phases(m.size(), rng)));
        worst = std::max(worst, std::abs(r.eta_focus + r.eta_dir_out + r.eta_unexp - 1.0));
    }
    std::printf("    max |sum - 1| = %.3e over 100 configs\n", worst);
    return worst < 1e-9;
}

// --- 2 ----------------------------------------------------------------------
bool brute_force_field() {
    const auto cfg = panel12(0.15);
    const auto scene = build_scene(cfg.scene);
    std::mt19937_64 rng(202);
    const auto phi = ristest::random_phases(scene.element_count(), rng);
    const auto inc = solve_incident(scene, phi, cfg.coupling);
    std::uniform_real_distribution<double> u(0.02, scene.room.side - 0.02);
    std::vector<Vec3> pts(500);
    for (auto &p : pts) p = {u(rng), u(rng), u(rng)};
    const auto map = total_field(scene, phi, inc, pts);

    const auto &src = scene.panel.element_centers;
    const long double k = scene.tx.wavenumber;
    double worst = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        std::complex<long double> acc{};
        for (std::size_t n = 0; n < src.size(); ++n) {
            const long double dx = pts[j].x - src[n].x, dy = pts[j].y - src[n].y, dz = pts[j].z - src[n].z;
            const long double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            const std::complex<long double> g(std::cos(k * r) / r, std::sin(k * r) / r);
            const std::complex<long double> gamma(std::cos((long double)phi[n]), std::sin((long double)phi[n]));
            acc += gamma * std::complex<long double>(inc.total[n].real(), inc.total[n].imag()) * g;
        }
        const cplx ref(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
        worst = std::max(worst, ristest::rel_err(map.values[j], ref));
    }
    std::printf("    max relative error %.3e at 500 points\n", worst);
    return worst < 1e-12;
}

// --- 3 ----------------------------------------------------------------------
bool coupling_solver() {
    bool ok = true;
    std::mt19937_64 rng(303);
    for (double alpha : {0.05, 0.15, 0.3}) {
        auto cfg = panel12(alpha);
        cfg.coupling.max_iterations = 500;
        cfg.coupling.tolerance = 1e-14;
        const auto scene = build_scene(cfg.scene);
        const auto phi = ristest::random_phases(scene.element_count(), rng);
        const auto inc = solve_incident(scene, phi, cfg.coupling);
        const CouplingOperator op(scene.panel, scene.tx.wavenumber, cfg.coupling);
        const auto gamma = phi.reflection();
        const auto N = static_cast<Eigen::Index>(scene.element_count());
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(N, N);
        Eigen::VectorXcd b(N);
        for (Eigen::Index n = 0; n < N; ++n) {
            b(n) = inc.total[n] - inc.coupled[n];
            for (const auto &l : op.neighbors(static_cast<std::size_t>(n)))
                M(n, static_cast<Eigen::Index>(l.m)) -= l.kernel * gamma[l.m];
        }
        const Eigen::VectorXcd E = M.partialPivLu().solve(b);
        double num = 0.0, den = 0.0;
        for (Eigen::Index n = 0; n < N; ++n) {
            num += std::norm(inc.total[n] - E(n));
            den += std::norm(E(n));
        }
        const double err = std::sqrt(num / den);
        std::printf("    alpha %.2f: %d iterations, relative error %.3e\n", alpha, inc.iterations, err);
        ok = ok && err < 1e-8;
    }
    return ok;
}

// --- 4 ----------------------------------------------------------------------
bool gradient_fidelity() {
    bool ok = true;
    {
        const auto m = model_of(panel12(0.0));
        std::mt19937_64 rng(404);
        const double h = 1e-5;
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto cfg = ristest::random_phases(m.size(), rng);
            const auto g = objective_gradient(m, m.evaluate(cfg, FieldModel::Targets::FocusOnly)).values;
            std::vector<double> phi(cfg.phases().begin(), cfg.phases().end());
            std::vector<double> fd(phi.size());
            for (std::size_t n = 0; n < phi.size(); ++n) {
                auto p = phi, q = phi;
                p[n] += h;
                q[n] -= h;
                fd[n] = (focus_mean(m, p) - focus_mean(m, q)) / (2 * h);
            }
            // components far below the gradient scale are compared against that scale
            double scale = 0.0;
            for (double x : fd) scale = std::max(scale, std::abs(x));
            for (std::size_t n = 0; n < fd.size(); ++n)
                worst = std::max(worst, std::abs(g[n] - fd[n]) / std::max(std::abs(fd[n]), 1e-3 * scale));
        }
        std::printf("    alpha 0: max per-component relative error %.3e (100 configs)\n", worst);
        ok = ok && worst < 1e-5;
    }
    {
        const auto m = model_of(panel12(0.15));
        std::mt19937_64 rng(405);
        const double h = 1e-5;
        double lo = 1.0, sum = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto cfg = ristest::random_phases(m.size(), rng);
            const auto g = objective_gradient(m, m.evaluate(cfg, FieldModel::Targets::FocusOnly)).values;
            std::vector<double> phi(cfg.phases().begin(), cfg.phases().end());
            std::vector<double> fd(phi.size());
            for (std::size_t n = 0; n < phi.size(); ++n) {
                auto p = phi, q = phi;
                p[n] += h;
                q[n] -= h;
                fd[n] = (focus_mean(m, p) - focus_mean(m, q)) / (2 * h);
            }
            const double dot = std::inner_product(g.begin(), g.end(), fd.begin(), 0.0);
            const double ng = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
            const double nf = std::sqrt(std::inner_product(fd.begin(), fd.end(), fd.begin(), 0.0));
            const double c = dot / (ng * nf);
            lo = std::min(lo, c);
            sum += c;
        }
        std::printf("    alpha 0.15: cosine min %.5f mean %.5f (gap to exact: %.2e)\n", lo, sum / 100, 1.0 - lo);
        ok = ok && lo > 0.95;
    }
    return ok;
}

// --- 5, 6, 7, 10 share three seeded desk runs ---------------------------------
struct FrontCollector : CompileObserver {
    std::vector<std::pair<std::string, ParetoFront>> fronts;
    void front_done(const std::string &stage, const ParetoFront &f) override { fronts.emplace_back(stage, f); }
};

struct DeskRuns {
    std::vector<AblationResult> runs;
    std::vector<std::pair<std::string, ParetoFront>> fronts;
};

const DeskRuns &desk_runs() {
    static const DeskRuns runs = [] {
        DeskRuns out;
        for (auto seed : kSeeds) {
            auto cfg = desk_profile();
            cfg.match.rng_seed = seed;
            FrontCollector fc;
            const auto t0 = std::chrono::steady_clock::now();
            out.runs.push_back(compile_ablation(cfg, &fc));
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("    [desk run seed %llu: %.1f s]\n", static_cast<unsigned long long>(seed), s);
            for (auto &f : fc.fronts) out.fronts.push_back(std::move(f));
        }
        return out;
    }();
    return runs;
}

bool non_decreasing(const std::vector<double> &v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1]) return false;
    return true;
}

bool stage_monotonicity() {
    bool ok = true;
    for (std::size_t i = 0; i < desk_runs().runs.size(); ++i) {
        const auto &r = desk_runs().runs[i];
        for (const auto *trace : {&r.with_min.trace, &r.without_min.trace}) {
            for (std::size_t s : {std::size_t{1}, std::size_t{3}}) {
                const auto &rec = trace->stages[s];
                const bool mono = non_decreasing(rec.objective_history);
                std::printf("    seed %llu %-14s %zu accepted values, %s\n", static_cast<unsigned long long>(kSeeds[i]),
                            rec.name.c_str(), rec.objective_history.size(), mono ? "monotone" : "NOT monotone");
                ok = ok && mono;
            }
        }
    }
    return ok;
}

bool pipeline_ordering() {
    int passed = 0;
    for (std::size_t i = 0; i < desk_runs().runs.size(); ++i) {
        const auto &st = desk_runs().runs[i].with_min.trace.stages;
        bool up = true, down = true;
        for (std::size_t s = 1; s < 4; ++s) {
            up = up && st[s].report.eta_focus > st[s - 1].report.eta_focus;
            down = down && st[s].report.eta_unexp < st[s - 1].report.eta_unexp;
        }
        std::printf("    seed %llu eta_focus", static_cast<unsigned long long>(kSeeds[i]));
        for (const auto &s : st) std::printf(" %.4f", s.report.eta_focus);
        std::printf(" | eta_unexp");
        for (const auto &s : st) std::printf(" %.4f", s.report.eta_unexp);
        std::printf(" -> %s\n", up && down ? "ordered" : (up ? "eta_unexp not decreasing" : "not ordered"));
        passed += up && down;
    }
    std::printf("    %d of 3 seeds ordered\n", passed);
    return passed == 3;
}

bool ablation_direction() {
    int passed = 0;
    for (std::size_t i = 0; i < desk_runs().runs.size(); ++i) {
        const auto &r = desk_runs().runs[i];
        const double w = r.with_min.trace.stages[3].report.eta_unexp;
        const double wo = r.without_min.trace.stages[3].report.eta_unexp;
        std::printf("    seed %llu eta_unexp with %.5f without %.5f\n", static_cast<unsigned long long>(kSeeds[i]), w,
                    wo);
        passed += w <= wo;
    }
    std::printf("    %d of 3 pairs\n", passed);
    return passed >= 2;
}

bool pareto_invariant() {
    bool ok = true;
    std::size_t checked = 0;
    for (const auto &[stage, front] : desk_runs().fronts) {
        const auto idx = front.rank0();
        for (auto i : idx)
            for (auto j : idx) {
                const auto &a = front.members[i];
                const auto &b = front.members[j];
                const bool dom = a.mean_focus >= b.mean_focus && a.mean_outer <= b.mean_outer &&
                                 (a.mean_focus > b.mean_focus || a.mean_outer < b.mean_outer);
                ok = ok && !dom;
                ++checked;
            }
        ok = ok && !idx.empty();
    }
    std::printf("    %zu fronts, %zu ordered pairs checked\n", desk_runs().fronts.size(), checked);
    return ok;
}

// --- 8 ----------------------------------------------------------------------
bool go_superiority() {
    const auto m = model_of(desk_profile());
    const double go = m.evaluate(go_init(m.scene()), FieldModel::Targets::FocusOnly).mean_focus;
    std::mt19937_64 rng(808);
    int wins = 0;
    double best_random = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double f = m.evaluate(ristest::random_phases(m.size(), rng), FieldModel::Targets::FocusOnly).mean_focus;
        best_random = std::max(best_random, f);
        wins += go > f;
    }
    std::printf("    GO mean |E| %.4g, best random %.4g, GO wins %d/100\n", go, best_random, wins);
    return wins >= 95;
}

// --- 9 ----------------------------------------------------------------------
std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

bool determinism() {
    const auto root = fs::temp_directory_path() / "ris_acceptance_determinism";
    fs::remove_all(root);
    const std::string cli = RIS_MATCH_CLI;
    for (const char *run : {"a", "b"}) {
        const std::string cmd = cli + " --profile desk --seed 1 --output-dir " + (root / run).string() +
                                " compile > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            std::printf("    compile run %s failed\n", run);
            return false;
        }
    }
    bool ok = true;
    for (const char *f : {"codebook.risc", "trace.json"}) {
        const auto a = slurp(root / "a" / f);
        const bool same = !a.empty() && a == slurp(root / "b" / f);
        std::printf("    %-14s %zu bytes, %s\n", f, a.size(), same ? "identical" : "DIFFERENT");
        ok = ok && same;
    }
    fs::remove_all(root);
    return ok;
}

// --- 11 ---------------------------------------------------------------------
bool persistence() {
    // seeds share a key, so each entry gets its own focus offset
    Codebook book;
    double dz = 0.0;
    for (const auto &r : desk_runs().runs) {
        for (int copy = 0; copy < 2; ++copy) {
            auto e = r.with_min.entry;
            e.key.focus_centers[0].z += dz;
            dz += 0.01;
            book.put(std::move(e));
        }
    }
    const auto path = (fs::temp_directory_path() / "ris_acceptance.risc").string();
    save_codebook(book, path);
    const auto bytes = slurp(path);
    const auto loaded = load_codebook(path);
    save_codebook(loaded, path);
    const bool round_trip = loaded == book && slurp(path) == bytes;
    fs::remove(path);

    // single bit flips anywhere after the header
    const auto encoded = encode_codebook(book);
    std::mt19937_64 rng(1111);
    int detected = 0, trials = 0;
    constexpr std::size_t header = 4 + 2 + 32 + 4;
    for (int t = 0; t < 200; ++t) {
        auto bad = encoded;
        const std::size_t pos = header + rng() % (bad.size() - header);
        bad[pos] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        ++trials;
        try {
            decode_codebook(bad);
        } catch (const CodebookError &) {
            ++detected;
        }
    }
    std::printf("    %zu entries, round trip %s, corruption detected %d/%d\n", book.size(),
                round_trip ? "byte-identical" : "DIFFERENT", detected, trials);
    return round_trip && detected == trials;
}

}  // namespace

int main(int argc, char **argv) {
    std::set<int> expected, only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            expected = parse_list(argv[++i]);
        } else if (a == "--only" && i + 1 < argc) {
            only = parse_list(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--expect-fail N,...] [--only N,...]\n");
            return 2;
        }
    }

    const std::pair<const char *, std::function<bool()>> criteria[] = {
        {"energy partition identity", energy_partition},
        {"brute-force field equivalence", brute_force_field},
        {"coupling solver vs dense solve", coupling_solver},
        {"gradient fidelity", gradient_fidelity},
        {"stage 1 / stage 3 monotonicity", stage_monotonicity},
        {"pipeline ordering", pipeline_ordering},
        {"ablation direction", ablation_direction},
        {"geometric-optics superiority", go_superiority},
        {"determinism", determinism},
        {"pareto invariant", pareto_invariant},
        {"persistence", persistence},
    };

    std::set<int> failed;
    for (int i = 0; i < 11; ++i) {
        const int id = i + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = criteria[i].second();
        } catch (const std::exception &e) {
            std::printf("    error: %s\n", e.what());
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %s (%.1f s)%s\n", ok ? "PASS" : "FAIL", id, criteria[i].first, s,
                    !ok && expected.count(id) ? " [known failure]" : "");
        std::fflush(stdout);
        if (!ok) failed.insert(id);
    }

    std::set<int> expected_run;
    for (int id : expected)
        if (only.empty() || only.count(id)) expected_run.insert(id);
    for (int id : expected_run)
        if (!failed.count(id)) std::printf("note: criterion %d was expected to fail but passed\n", id);
    std::printf("%zu failed", failed.size());
    if (!expected_run.empty()) std::printf(" (%zu expected)", expected_run.size());
    std::printf("\n");
    bool unexpected = false;
    for (int id : failed) unexpected |= !expected_run.count(id);
    return unexpected ? 1 : 0;
}
