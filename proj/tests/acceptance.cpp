// End-to-end acceptance gate: ten checks, one line of output each, nonzero
// exit when any fails. Tolerances and seeds are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <string>
#include <vector>

#include "momc/enumerate.hpp"
#include "momc/instance.hpp"
#include "momc/oracle.hpp"
#include "momc/pareto.hpp"
#include "momc/pipeline.hpp"
#include "momc/solver.hpp"
#include "momc/weights.hpp"

using namespace momc;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

template <typename Fn>
void criterion(int id, const char* name, double budget_s, Fn&& fn)
{
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_budget = secs <= budget_s;
    if (!(out.pass && in_budget)) ++failures;
    std::printf("[%s] criterion %2d: %-34s %8.3f s%s | %s\n", out.pass && in_budget ? "PASS" : "FAIL",
                id, name, secs, in_budget ? "" : " (over budget)", out.detail.c_str());
    std::fflush(stdout);
}

ParetoArchive value_archive(std::vector<std::vector<double>> values)
{
    ParetoArchive archive;
    for (auto& v : values) archive.entries.push_back({std::move(v), {}});
    return archive;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// --------------------------------------------------------------------------

Outcome worked_example_hv()
{
    const auto two = value_archive({{10, 5}, {5, 10}});
    const auto three = value_archive({{10, 5}, {5, 10}, {8, 8}});
    const std::vector<double> r{0, 0};
    const double hv2 = hypervolume(two, r);
    const double hv3 = hypervolume(three, r);
    return {hv2 == 75.0 && hv3 == 84.0, "hv{(10,5),(5,10)}=" + fmt(hv2) + " +(8,8)=" + fmt(hv3)};
}

Outcome interior_counts()
{
    const int h3 = resolution_for_interior_count(3, 190);
    const int h4 = resolution_for_interior_count(4, 220);
    const auto i3 = interior_filter(das_dennis(3, h3));
    const auto i4 = interior_filter(das_dennis(4, h4));
    return {i3.size() == 190 && i4.size() == 220,
            "K=3: H=" + std::to_string(h3) + " -> " + std::to_string(i3.size()) +
                ", K=4: H=" + std::to_string(h4) + " -> " + std::to_string(i4.size())};
}

Outcome desk_scale_table()
{
    const auto weights = interior_filter(das_dennis(3, 12)); // 55 interior vectors
    double sum10 = 0, sum20 = 0, min10 = 1, min20 = 1;
    int c10 = 0, c20 = 0;
    for (const int n : {10, 20}) {
        for (const double d : {0.5, 1.0}) {
            for (int i = 0; i < 5; ++i) {
                const std::uint64_t seed =
                    1000 + 100 * static_cast<std::uint64_t>(n) + (d == 1.0 ? 50 : 0) + i;
                const auto inst = generate_uniform_instance(n, d, 3, WeightSpec{}, seed);
                const auto front = brute_force_pareto(inst);
                const auto r = reference_point_exact(inst);
                const double hv_max = hypervolume(front, r);
                for (const auto variant : {SolverVariant::ballistic_sb, SolverVariant::discrete_sb}) {
                    SolverConfig cfg; // defaults: 50 iterations, alpha 0.15, batch 3000
                    cfg.variant = variant;
                    cfg.seed = seed;
                    const auto pool = run_sampler(inst, weights, cfg, 1);
                    const auto archive = non_dominated_filter(pool, inst);
                    const double ratio = hv_ratio(hypervolume(archive, r), hv_max);
                    if (n == 10) {
                        sum10 += ratio;
                        min10 = std::min(min10, ratio);
                        ++c10;
                    } else {
                        sum20 += ratio;
                        min20 = std::min(min20, ratio);
                        ++c20;
                    }
                }
            }
        }
    }
    const double mean10 = sum10 / c10;
    const double mean20 = sum20 / c20;
    return {mean10 >= 1.0 - 1e-9 && mean20 >= 0.99,
            "mean ratio n=10: " + fmt(100 * mean10) + "% (min " + fmt(100 * min10) +
                "%), n=20: " + fmt(100 * mean20) + "% (min " + fmt(100 * min20) + "%)"};
}

Outcome end_to_end_bound()
{
    BenchConfig cfg;
    cfg.n = 200;
    cfg.density = 1.0;
    cfg.k = 3;
    cfg.target_rho = -0.92;
    cfg.instance_seed = 42;
    cfg.solver.seed = 42;
    cfg.weights.count = 55;
    cfg.runs = 1;
    cfg.ref = "sampled:4096";
    const auto result = bench(cfg);
    const RunReport& rep = result.report;
    const double sum = rep.model_construction_s + rep.sampling_s + rep.pareto_filtering_s;
    const bool timings = rep.model_construction_s > 0 && rep.sampling_s > 0 &&
                         rep.pareto_filtering_s > 0;
    const bool decomposition = rep.end_to_end_s >= 0.95 * sum;
    const bool sized = rep.pool_size == 55u * 3000u && rep.archive_size >= 1;
    return {timings && decomposition && sized && rep.end_to_end_s < 60.0,
            "model=" + fmt(rep.model_construction_s) + "s sample=" + fmt(rep.sampling_s) +
                "s filter=" + fmt(rep.pareto_filtering_s) + "s end=" + fmt(rep.end_to_end_s) +
                "s archive=" + std::to_string(rep.archive_size)};
}

Outcome correlated_generator()
{
    const auto inst = generate_correlated_instance(10, 1.0, -0.92, 5);
    std::vector<double> x, y;
    x.reserve(1024);
    y.reserve(1024);
    std::vector<double> sums(3);
    for (int l = 0; l < 3; ++l) sums[static_cast<std::size_t>(l)] = inst.layer_sum(l);
    enumerate_hamiltonians(inst, false,
                           [&](std::uint64_t, const auto&, const std::vector<double>& h) {
                               x.push_back(0.5 * (sums[0] - h[0]) + 0.5 * (sums[1] - h[1]));
                               y.push_back(0.5 * (sums[2] - h[2]));
                           });
    const double rho = pearson(x, y);
    return {std::abs(rho + 0.92) <= 0.03,
            "exhaustive rho over " + std::to_string(x.size()) + " configs = " + fmt(rho)};
}

Outcome filter_equivalence()
{
    rng::Stream s(rng::derive_key(2026, 0xACCE), 0, 0, 0);
    int checked = 0;
    for (int p = 0; p < 100; ++p) {
        const int k = 2 + p % 3;
        const int m = 100 + static_cast<int>(s.next_below(9901)); // M <= 10^4
        const bool grid = p % 2 == 0;
        std::vector<ObjectiveVector> pool;
        pool.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            std::vector<double> v(static_cast<std::size_t>(k));
            for (auto& c : v) {
                c = s.next_u01() * 100.0;
                if (grid) c = std::floor(c / 4.0) * 4.0;
            }
            pool.emplace_back(std::move(v), Sense::cut);
        }
        const auto fast = non_dominated_filter(pool, FilterAlgorithm::fast);
        const auto naive = non_dominated_filter(pool, FilterAlgorithm::naive);
        if (fast.values() != naive.values()) {
            return {false, "mismatch on pool " + std::to_string(p) + " (M=" + std::to_string(m) +
                               ", K=" + std::to_string(k) + ")"};
        }
        ++checked;
    }
    return {checked == 100, std::to_string(checked) + " pools, fast == naive on every one"};
}

Outcome hv_cross_validation()
{
    // exact algorithms on random non-dominated fronts of up to 200 points
    for (int k = 2; k <= 4; ++k) {
        for (std::uint64_t t = 0; t < 5; ++t) {
            rng::Stream s(rng::derive_key(7000 + 10 * static_cast<std::uint64_t>(k) + t, 0xCD), 0,
                          0, 0);
            std::vector<ObjectiveVector> pool;
            for (int i = 0; i < 200; ++i) {
                std::vector<double> v(static_cast<std::size_t>(k));
                for (auto& c : v) c = s.next_u01() * 50.0;
                pool.emplace_back(std::move(v), Sense::cut);
            }
            const auto front = non_dominated_filter(pool);
            const std::vector<double> r(static_cast<std::size_t>(k), -1.0);
            const double direct = hypervolume(front, r);
            const double tol = 1e-9 * std::max(1.0, std::abs(direct));
            if (std::abs(hypervolume(front, r, HvAlgorithm::recursive) - direct) > tol) {
                return {false, "recursive mismatch at K=" + std::to_string(k)};
            }
            if (k == 2 &&
                std::abs(hypervolume(front, r, HvAlgorithm::sweep) - direct) > tol) {
                return {false, "sweep mismatch"};
            }
            if (k == 3 &&
                std::abs(hypervolume(front, r, HvAlgorithm::dimension_sweep) - direct) > tol) {
                return {false, "dimension-sweep mismatch"};
            }
        }
    }

    // inclusion-exclusion is exact on dyadic grids with <= 4 points
    for (int k = 2; k <= 4; ++k) {
        for (std::uint64_t t = 0; t < 10; ++t) {
            rng::Stream s(rng::derive_key(8000 + 10 * static_cast<std::uint64_t>(k) + t, 0x1E), 0,
                          0, 0);
            std::vector<ObjectiveVector> pool;
            for (int i = 0; i < 4; ++i) {
                std::vector<double> v(static_cast<std::size_t>(k));
                for (auto& c : v) c = static_cast<double>(s.next_below(64)) * 0.25;
                pool.emplace_back(std::move(v), Sense::cut);
            }
            const auto front = non_dominated_filter(pool);
            const std::vector<double> r(static_cast<std::size_t>(k), -0.25);
            if (hypervolume(front, r, HvAlgorithm::inclusion_exclusion) !=
                hypervolume(front, r)) {
                return {false, "inclusion-exclusion mismatch at K=" + std::to_string(k)};
            }
        }
    }

    // Monte Carlo brackets the exact value
    const auto example = value_archive({{10, 5}, {5, 10}, {8, 8}});
    const auto [est, se] = monte_carlo_hv(example, {0, 0}, 400000, 99);
    if (!(se > 0) || std::abs(est - 84.0) > 4.0 * se) {
        return {false, "MC estimate " + fmt(est) + " +- " + fmt(se) + " vs 84"};
    }
    return {true, "exact algorithms agree to 1e-9; IE exact on <=4 pts; MC " + fmt(est) + " +- " +
                      fmt(se) + " vs 84"};
}

Outcome supported_solutions()
{
    const auto inst = generate_uniform_instance(10, 0.5, 3, WeightSpec{}, 54);
    const auto front = brute_force_pareto(inst);
    const auto lattice = interior_filter(das_dennis(3, resolution_for_interior_count(3, 190)));
    if (lattice.size() != 190) return {false, "lattice size " + std::to_string(lattice.size())};

    std::set<std::vector<double>> distinct;
    for (const auto& w : lattice) {
        const auto sc = scalarize(inst, w);
        const auto [h_min, argmins] = brute_force_scalar_optimum(sc, 10);
        (void)h_min;
        for (const auto& s : argmins) {
            const auto v = cut_values(inst, s).values();
            if (!front.contains_value(v)) {
                return {false, "scalarized optimum off the exact front"};
            }
            distinct.insert(v);
        }
    }
    return {distinct.size() <= front.size(),
            std::to_string(distinct.size()) + " distinct optima over 190 vectors <= front size " +
                std::to_string(front.size())};
}

Outcome determinism()
{
    BenchConfig cfg;
    cfg.n = 20;
    cfg.density = 0.5;
    cfg.k = 3;
    cfg.instance_seed = 11;
    cfg.solver.seed = 11;
    cfg.solver.batch_size = 500;
    cfg.solver.n_iterations = 30;
    cfg.weights.resolution = 5;
    cfg.runs = 2;

    const auto base = bench(cfg);
    const auto repeat = bench(cfg);
    if (!same_samples(base.pool, repeat.pool)) return {false, "pool differs on repeat"};
    if (base.archive.values() != repeat.archive.values() ||
        non_timing_text(format_report(base.report)) !=
            non_timing_text(format_report(repeat.report))) {
        return {false, "repeat run differs"};
    }
    for (const int threads : {4, 8}) {
        cfg.solver.threads = threads;
        const auto other = bench(cfg);
        if (!same_samples(base.pool, other.pool)) {
            return {false, "pool differs at threads=" + std::to_string(threads)};
        }
        std::size_t i = 0;
        for (; i < base.archive.size(); ++i) {
            if (base.archive.entries[i].value != other.archive.entries[i].value ||
                !(base.archive.entries[i].config == other.archive.entries[i].config)) {
                break;
            }
        }
        if (i != base.archive.size() || base.archive.size() != other.archive.size()) {
            return {false, "archive differs at threads=" + std::to_string(threads)};
        }
        if (non_timing_text(format_report(base.report)) !=
            non_timing_text(format_report(other.report))) {
            return {false, "report differs at threads=" + std::to_string(threads)};
        }
    }
    return {true, "pools, archives and reports bit-identical across repeats and threads {1,4,8}"};
}

Outcome noise_sweep_shape()
{
    BenchConfig base;
    base.n = 10;
    base.density = 0.5;
    base.k = 3;
    base.instance_seed = 54;
    base.solver.seed = 54;
    base.solver.batch_size = 500; // 27,500-sample budget over the 55-vector lattice
    base.weights.count = 55;
    base.runs = 1;

    const std::vector<double> alphas{0.0, 0.05, 0.1, 0.15, 0.2, 0.3};
    const auto rows = noise_sweep(base, alphas, 2);

    bool zero_fails = true;
    bool mid_recovers = false;
    std::string cells;
    for (const auto& row : rows) {
        if (row.alpha == 0.0 && row.samples_to_optimal >= 0) zero_fails = false;
        if (row.alpha >= 0.1 && row.alpha <= 0.2 && row.samples_to_optimal >= 0) {
            mid_recovers = true;
        }
        if (row.repeat == 0) {
            cells += " a=" + fmt(row.alpha) + ":" +
                     (row.samples_to_optimal >= 0 ? std::to_string(row.samples_to_optimal)
                                                  : std::string("-"));
        }
    }
    return {zero_fails && mid_recovers, "samples-to-optimal" + cells};
}

} // namespace

int main()
{
    criterion(1, "hypervolume worked example", 0.001, worked_example_hv);
    criterion(2, "Das-Dennis interior counts", 1.0, interior_counts);
    criterion(3, "desk-scale HV ratio table", 300.0, desk_scale_table);
    criterion(4, "end-to-end bound (n=200)", 60.0, end_to_end_bound);
    criterion(5, "correlated generator rho", 10.0, correlated_generator);
    criterion(6, "filter oracle equivalence", 120.0, filter_equivalence);
    criterion(7, "hypervolume cross-validation", 120.0, hv_cross_validation);
    criterion(8, "supported-solution property", 60.0, supported_solutions);
    criterion(9, "determinism across threads", 120.0, determinism);
    criterion(10, "noise-sweep qualitative shape", 300.0, noise_sweep_shape);

    if (failures == 0) {
        std::printf("acceptance: all 10 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return 1;
}
