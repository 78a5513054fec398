#ifndef MOMC_CLI_HPP
#define MOMC_CLI_HPP

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "momc/pipeline.hpp"

namespace momc {

namespace detail {

/// --weights accepts either an interior-vector count ("55") or an explicit
/// lattice resolution ("resolution:12").
inline WeightSelection parse_weight_selection(const std::string& spec)
{
    WeightSelection sel;
    try {
        if (spec.rfind("resolution:", 0) == 0) {
            sel.resolution = std::stoi(spec.substr(11));
            if (sel.resolution < 1) throw std::invalid_argument("");
        } else {
            sel.count = std::stoi(spec);
            if (sel.count < 1) throw std::invalid_argument("");
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("bad --weights value '" + spec +
                                    "' (want COUNT or resolution:H)");
    }
    return sel;
}

struct CliOptions {
    // instance source
    std::string instance;
    int n = 10;
    double density = 0.5;
    int k = 3;
    double target_rho = 0;

    // solver
    std::string variant = "bsb";
    int iters = 50;
    double dt = 1.0;
    double alpha = 0.15;
    int batch = 3000;
    double init_scale = 0.1;
    std::string weights = "55";
    int runs = 1;
    std::uint64_t seed = 0;
    int threads = 1;

    // scoring and artifacts
    std::string ref = "exact";
    std::string out;
    int checkpoints = 0;

    // file inputs
    std::string pool;
    std::string archive;

    // sweep
    std::vector<double> alphas{0.0, 0.05, 0.1, 0.15, 0.2, 0.3};
    int repeats = 3;
};

inline SolverConfig make_solver_config(const CliOptions& o)
{
    SolverConfig cfg;
    cfg.variant = parse_variant(o.variant);
    cfg.n_iterations = o.iters;
    cfg.dt = o.dt;
    cfg.alpha = o.alpha;
    cfg.batch_size = o.batch;
    cfg.init_scale = o.init_scale;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

inline BenchConfig make_bench_config(const CliOptions& o)
{
    BenchConfig cfg;
    cfg.instance_path = o.instance;
    cfg.n = o.n;
    cfg.density = o.density;
    cfg.k = o.k;
    cfg.target_rho = o.target_rho;
    cfg.instance_seed = o.seed;
    cfg.solver = make_solver_config(o);
    cfg.weights = parse_weight_selection(o.weights);
    cfg.runs = o.runs;
    cfg.ref = o.ref;
    cfg.checkpoints = o.checkpoints;
    return cfg;
}

inline void add_generator_flags(CLI::App* cmd, CliOptions& o)
{
    cmd->add_option("--n", o.n, "vertex count")->check(CLI::Range(2, 1 << 20));
    cmd->add_option("--density", o.density, "edge probability in (0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--k", o.k, "objective count")->check(CLI::Range(1, 64));
    cmd->add_option("--target-rho", o.target_rho,
                    "layer-3 correlation target in (-1,0); 0 = independent layers")
        ->check(CLI::Range(-1.0, 0.0));
}

inline void add_solver_flags(CLI::App* cmd, CliOptions& o)
{
    cmd->add_option("--variant", o.variant, "dynamics variant")
        ->check(CLI::IsMember({"bsb", "dsb", "simcim"}));
    cmd->add_option("--iters", o.iters, "integration steps")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", o.dt, "time step")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o.alpha, "noise amplitude")->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch", o.batch, "trajectories per weight vector")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--init-scale", o.init_scale, "initial state amplitude")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--weights", o.weights, "interior weight vectors: COUNT or resolution:H");
    cmd->add_option("--runs", o.runs, "independent sampler runs")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)")
        ->check(CLI::NonNegativeNumber)
        ->envname("MOMC_THREADS");
}

inline int do_gen(const CliOptions& o)
{
    std::optional<MultiObjectiveInstance> inst;
    if (o.target_rho != 0) {
        inst.emplace(generate_correlated_instance(o.n, o.density, o.target_rho, o.seed));
    } else {
        inst.emplace(generate_uniform_instance(o.n, o.density, o.k, WeightSpec{}, o.seed));
    }
    save_atomic(o.out, [&](const std::filesystem::path& p) { save_instance(*inst, p); });
    std::cout << "instance = " << o.out << '\n';
    std::cout << "n = " << inst->n() << '\n';
    std::cout << "k = " << inst->k() << '\n';
    std::cout << "edges = " << inst->edges().size() << '\n';
    if (o.target_rho != 0) {
        std::cout << "rho = " << format_number(measured_correlation(*inst)) << '\n';
    }
    return 0;
}

inline int do_solve(const CliOptions& o)
{
    const auto inst = load_instance(o.instance);
    const auto cfg = make_solver_config(o);
    const auto weights = build_weights(inst.k(), parse_weight_selection(o.weights));
    const auto pool = run_sampler(inst, weights, cfg, o.runs);

    std::filesystem::create_directories(o.out);
    save_atomic(std::filesystem::path(o.out) / "pool.csv",
                [&](const std::filesystem::path& p) { save_pool_csv(pool, p); });
    std::cout << "pool_size = " << pool.size() << '\n';
    std::cout << "weight_count = " << weights.size() << '\n';
    std::cout << "model_construction_s = " << format_number(pool.model_construction_seconds)
              << '\n';
    std::cout << "sampling_s = " << format_number(pool.sampling_seconds) << '\n';
    return 0;
}

inline int do_pareto(const CliOptions& o)
{
    const auto inst = load_instance(o.instance);
    const auto pool = load_pool_csv(o.pool);
    if (pool.n() != inst.n()) {
        throw std::invalid_argument("pool has n=" + std::to_string(pool.n()) +
                                    " but instance has n=" + std::to_string(inst.n()));
    }
    const auto archive = non_dominated_filter(pool, inst);

    std::filesystem::create_directories(o.out);
    save_atomic(std::filesystem::path(o.out) / "archive.csv",
                [&](const std::filesystem::path& p) { save_archive_csv(archive, p); });
    std::cout << "pool_size = " << pool.size() << '\n';
    std::cout << "archive_size = " << archive.size() << '\n';
    std::cout << "pareto_filtering_s = " << format_number(archive.filtering_seconds) << '\n';
    return 0;
}

inline int do_hv(const CliOptions& o)
{
    auto archive = load_archive_csv(o.archive);
    std::optional<MultiObjectiveInstance> inst;
    bool exact_ref = false;
    std::vector<double> r;
    if (!o.instance.empty()) {
        inst.emplace(load_instance(o.instance));
        if (inst->k() != archive.k()) {
            throw std::invalid_argument("archive has k=" + std::to_string(archive.k()) +
                                        " but instance has k=" + std::to_string(inst->k()));
        }
        const auto [exact, count] = parse_ref_mode(o.ref);
        exact_ref = exact;
        r = exact ? reference_point_exact(*inst) : reference_point_sampled(*inst, count, o.seed);
        if (!exact) clamp_reference(r, archive);
    } else if (!archive.reference.empty()) {
        r = archive.reference;
    } else {
        throw std::invalid_argument(
            "no reference point: the archive embeds none, so pass --instance (and --ref)");
    }

    std::cout << "reference_point = ";
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) std::cout << ';';
        std::cout << format_number(r[i]);
    }
    std::cout << '\n';
    const double hv = hypervolume(archive, r);
    std::cout << "hv = " << format_number(hv) << '\n';

    if (inst && exact_ref && inst->n() <= kEnumerationCap) {
        const double hv_max = hypervolume(brute_force_pareto(*inst), r);
        std::cout << "hv_max = " << format_number(hv_max) << '\n';
        std::cout << "hv_ratio = " << format_number(hv_ratio(hv, hv_max)) << '\n';
        std::cout << "hv_difference = " << format_number(hv_difference(hv_max, hv)) << '\n';
    }
    return 0;
}

inline int do_oracle(const CliOptions& o)
{
    const auto inst = load_instance(o.instance);
    auto front = brute_force_pareto(inst);
    const auto r = reference_point_exact(inst);
    front.set_reference(r);
    const double hv_max = hypervolume(front, r);

    std::cout << "front_size = " << front.size() << '\n';
    std::cout << "hv_max = " << format_number(hv_max) << '\n';

    const auto lattice = build_weights(inst.k(), parse_weight_selection(o.weights));
    const auto series = saturation_study(inst, lattice);
    std::cout << "weight_count = " << lattice.size() << '\n';
    std::cout << "distinct_optima = " << series.back().distinct_optima << '\n';
    std::cout << "saturation_hv_difference = " << format_number(series.back().hv_difference)
              << '\n';

    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        save_atomic(std::filesystem::path(o.out) / "exact_front.csv",
                    [&](const std::filesystem::path& p) { save_archive_csv(front, p); });
        write_text_atomic(std::filesystem::path(o.out) / "saturation.csv",
                          format_saturation_csv(series));
    }
    return 0;
}

inline int do_bench(const CliOptions& o)
{
    const auto result = bench(make_bench_config(o));
    if (!o.out.empty()) emit_bench_artifacts(result, o.out);
    std::cout << format_report(result.report);
    return 0;
}

inline int do_sweep(const CliOptions& o)
{
    const auto rows = noise_sweep(make_bench_config(o), o.alphas, o.repeats);
    const auto table = format_sweep_csv(rows);
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        write_text_atomic(std::filesystem::path(o.out) / "sweep.csv", table);
    }
    std::cout << table;
    return 0;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"multi-objective MaxCut sampling benchmark"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file (INI; [subcommand] sections)");
    app.option_defaults()->always_capture_default();

    detail::CliOptions o;

    auto* gen = app.add_subcommand("gen", "generate a weighted MaxCut instance file");
    detail::add_generator_flags(gen, o);
    gen->add_option("--seed", o.seed, "generator seed");
    gen->add_option("--out", o.out, "output instance path")->required();

    auto* solve = app.add_subcommand("solve", "sample an instance into a pool file");
    solve->add_option("--instance", o.instance, "instance path")->required();
    detail::add_solver_flags(solve, o);
    solve->add_option("--seed", o.seed, "solver seed");
    solve->add_option("--out", o.out, "output directory")->required();

    auto* pareto = app.add_subcommand("pareto", "filter a pool to its non-dominated archive");
    pareto->add_option("--instance", o.instance, "instance path")->required();
    pareto->add_option("--pool", o.pool, "pool path")->required();
    pareto->add_option("--out", o.out, "output directory")->required();

    auto* hv = app.add_subcommand("hv", "score an archive with the hypervolume indicator");
    hv->add_option("--archive", o.archive, "archive path")->required();
    hv->add_option("--instance", o.instance, "instance path (to compute a reference point)");
    hv->add_option("--ref", o.ref, "reference point mode: exact or sampled:COUNT");
    hv->add_option("--seed", o.seed, "seed for sampled reference points");

    auto* oracle = app.add_subcommand("oracle", "exact Pareto front and saturation study");
    oracle->add_option("--instance", o.instance, "instance path")->required();
    oracle->add_option("--weights", o.weights, "interior weight vectors: COUNT or resolution:H");
    oracle->add_option("--out", o.out, "output directory");

    auto* bench = app.add_subcommand("bench", "full pipeline with stage timings and a report");
    bench->add_option("--instance", o.instance, "instance path (omit to generate one)");
    detail::add_generator_flags(bench, o);
    detail::add_solver_flags(bench, o);
    bench->add_option("--seed", o.seed, "seed for generator and solver");
    bench->add_option("--ref", o.ref, "reference point mode: exact or sampled:COUNT");
    bench->add_option("--checkpoints", o.checkpoints, "convergence trace checkpoints")
        ->check(CLI::NonNegativeNumber);
    bench->add_option("--out", o.out, "artifact directory");

    auto* sweep = app.add_subcommand("sweep", "noise-amplitude sweep of samples-to-optimal-HV");
    sweep->add_option("--instance", o.instance, "instance path (omit to generate one)");
    detail::add_generator_flags(sweep, o);
    detail::add_solver_flags(sweep, o);
    sweep->add_option("--seed", o.seed, "seed for generator and solver");
    sweep->add_option("--alphas", o.alphas, "noise amplitudes to sweep")->delimiter(',');
    sweep->add_option("--repeats", o.repeats, "repeats per amplitude")->check(CLI::PositiveNumber);
    sweep->add_option("--out", o.out, "artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return detail::do_gen(o);
        if (solve->parsed()) return detail::do_solve(o);
        if (pareto->parsed()) return detail::do_pareto(o);
        if (hv->parsed()) return detail::do_hv(o);
        if (oracle->parsed()) return detail::do_oracle(o);
        if (bench->parsed()) return detail::do_bench(o);
        if (sweep->parsed()) return detail::do_sweep(o);
    } catch (const std::invalid_argument& e) {
        std::cerr << "momc: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "momc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace momc

#endif
