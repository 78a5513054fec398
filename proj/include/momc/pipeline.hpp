#ifndef MOMC_PIPELINE_HPP
#define MOMC_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "momc/instance.hpp"
#include "momc/oracle.hpp"
#include "momc/pareto.hpp"
#include "momc/solver.hpp"
#include "momc/weights.hpp"

namespace momc {

namespace detail {

inline double seconds_since(const std::chrono::steady_clock::time_point& t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

// ---------------------------------------------------------------------------
// atomic file emission
// ---------------------------------------------------------------------------

/// Run `saver(temp_path)` and rename the result into place, so readers never
/// observe a half-written artifact.
template <typename Saver>
void save_atomic(const std::filesystem::path& path, Saver&& saver)
{
    auto tmp = path;
    tmp += ".tmp";
    saver(static_cast<const std::filesystem::path&>(tmp));
    std::filesystem::rename(tmp, path);
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text)
{
    save_atomic(path, [&](const std::filesystem::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    });
}

// ---------------------------------------------------------------------------
// weight selection
// ---------------------------------------------------------------------------

/// Interior lattice chosen either by an explicit resolution or by the smallest
/// resolution whose interior has at least `count` vectors.
struct WeightSelection {
    int count = 55;
    int resolution = 0; // > 0 overrides count
};

inline int select_resolution(int k, const WeightSelection& sel)
{
    if (sel.resolution > 0) return sel.resolution;
    return resolution_for_interior_count(k, sel.count);
}

inline std::vector<WeightVector> build_weights(int k, const WeightSelection& sel)
{
    return interior_filter(das_dennis(k, select_resolution(k, sel)));
}

// ---------------------------------------------------------------------------
// run report
// ---------------------------------------------------------------------------

struct RunReport {
    // instance descriptor
    std::string instance_source; // "generated" or the input path
    int n = 0;
    int k = 0;
    std::size_t edge_count = 0;
    double density = -1;    // < 0 when unknown (instance loaded from a file)
    double target_rho = 0;  // 0 when the layers are independent
    std::uint64_t instance_seed = 0;

    // solver echo
    std::string variant;
    int iterations = 0;
    double dt = 0;
    double alpha = 0;
    int batch = 0;
    double init_scale = 0;
    int runs = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    int weight_resolution = 0;
    std::size_t weight_count = 0;

    // results
    std::size_t pool_size = 0;
    std::size_t archive_size = 0;
    std::string reference_mode; // "exact" or "sampled:COUNT"
    std::vector<double> reference;
    double hv = 0;
    bool oracle = false; // exact front available for scoring
    double hv_max = 0;
    double hv_ratio = 0;
    double hv_difference = 0;
    long long samples_to_optimal = -1; // -1 = never reached hv_max

    // stage timings (wall-clock seconds)
    double model_construction_s = 0;
    double sampling_s = 0;
    double pareto_filtering_s = 0;
    double end_to_end_s = 0;
};

inline std::string format_report(const RunReport& r)
{
    std::ostringstream out;
    out << "instance = " << r.instance_source << '\n';
    out << "n = " << r.n << '\n';
    out << "k = " << r.k << '\n';
    out << "edges = " << r.edge_count << '\n';
    if (r.density >= 0) out << "density = " << format_number(r.density) << '\n';
    if (r.target_rho != 0) out << "target_rho = " << format_number(r.target_rho) << '\n';
    if (r.instance_source == "generated") out << "instance_seed = " << r.instance_seed << '\n';
    out << "variant = " << r.variant << '\n';
    out << "iterations = " << r.iterations << '\n';
    out << "dt = " << format_number(r.dt) << '\n';
    out << "alpha = " << format_number(r.alpha) << '\n';
    out << "batch = " << r.batch << '\n';
    out << "init_scale = " << format_number(r.init_scale) << '\n';
    out << "runs = " << r.runs << '\n';
    out << "seed = " << r.seed << '\n';
    out << "threads = " << r.threads << '\n';
    out << "weight_resolution = " << r.weight_resolution << '\n';
    out << "weight_count = " << r.weight_count << '\n';
    out << "pool_size = " << r.pool_size << '\n';
    out << "archive_size = " << r.archive_size << '\n';
    out << "reference = " << r.reference_mode << '\n';
    out << "reference_point = ";
    for (std::size_t i = 0; i < r.reference.size(); ++i) {
        if (i) out << ';';
        out << format_number(r.reference[i]);
    }
    out << '\n';
    out << "hv = " << format_number(r.hv) << '\n';
    if (r.oracle) {
        out << "hv_max = " << format_number(r.hv_max) << '\n';
        out << "hv_ratio = " << format_number(r.hv_ratio) << '\n';
        out << "hv_difference = " << format_number(r.hv_difference) << '\n';
        out << "samples_to_optimal = ";
        if (r.samples_to_optimal >= 0) {
            out << r.samples_to_optimal;
        } else {
            out << "not_reached";
        }
        out << '\n';
    }
    out << "model_construction_s = " << format_number(r.model_construction_s) << '\n';
    out << "sampling_s = " << format_number(r.sampling_s) << '\n';
    out << "pareto_filtering_s = " << format_number(r.pareto_filtering_s) << '\n';
    out << "end_to_end_s = " << format_number(r.end_to_end_s) << '\n';
    return out.str();
}

inline RunReport parse_report(const std::string& text)
{
    RunReport r;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto sep = line.find(" = ");
        if (sep == std::string::npos) {
            throw std::runtime_error("report line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        }
        const std::string key = line.substr(0, sep);
        const std::string value = line.substr(sep + 3);
        try {
            if (key == "instance") r.instance_source = value;
            else if (key == "n") r.n = std::stoi(value);
            else if (key == "k") r.k = std::stoi(value);
            else if (key == "edges") r.edge_count = std::stoull(value);
            else if (key == "density") r.density = std::stod(value);
            else if (key == "target_rho") r.target_rho = std::stod(value);
            else if (key == "instance_seed") r.instance_seed = std::stoull(value);
            else if (key == "variant") r.variant = value;
            else if (key == "iterations") r.iterations = std::stoi(value);
            else if (key == "dt") r.dt = std::stod(value);
            else if (key == "alpha") r.alpha = std::stod(value);
            else if (key == "batch") r.batch = std::stoi(value);
            else if (key == "init_scale") r.init_scale = std::stod(value);
            else if (key == "runs") r.runs = std::stoi(value);
            else if (key == "seed") r.seed = std::stoull(value);
            else if (key == "threads") r.threads = std::stoi(value);
            else if (key == "weight_resolution") r.weight_resolution = std::stoi(value);
            else if (key == "weight_count") r.weight_count = std::stoull(value);
            else if (key == "pool_size") r.pool_size = std::stoull(value);
            else if (key == "archive_size") r.archive_size = std::stoull(value);
            else if (key == "reference") r.reference_mode = value;
            else if (key == "reference_point") {
                r.reference.clear();
                std::istringstream cells(value);
                std::string cell;
                while (std::getline(cells, cell, ';')) r.reference.push_back(std::stod(cell));
            }
            else if (key == "hv") r.hv = std::stod(value);
            else if (key == "hv_max") { r.hv_max = std::stod(value); r.oracle = true; }
            else if (key == "hv_ratio") r.hv_ratio = std::stod(value);
            else if (key == "hv_difference") r.hv_difference = std::stod(value);
            else if (key == "samples_to_optimal") {
                r.samples_to_optimal = value == "not_reached" ? -1 : std::stoll(value);
            }
            else if (key == "model_construction_s") r.model_construction_s = std::stod(value);
            else if (key == "sampling_s") r.sampling_s = std::stod(value);
            else if (key == "pareto_filtering_s") r.pareto_filtering_s = std::stod(value);
            else if (key == "end_to_end_s") r.end_to_end_s = std::stod(value);
            else throw std::runtime_error("unknown key '" + key + "'");
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::runtime_error("report line " + std::to_string(lineno) + ": bad value for '" +
                                     key + "'");
        }
    }
    return r;
}

/// Report text with execution-dependent lines (wall-clock timings and the
/// thread count) removed; what remains must be a pure function of
/// (instance, config, seed).
inline std::string non_timing_text(const std::string& report_text)
{
    std::istringstream in(report_text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto sep = line.find(" = ");
        const std::string key = sep == std::string::npos ? line : line.substr(0, sep);
        if (key.ends_with("_s") || key == "threads") continue;
        out << line << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchConfig {
    // instance source: a path, or generator parameters when the path is empty
    std::string instance_path;
    int n = 10;
    double density = 0.5;
    int k = 3;
    double target_rho = 0; // nonzero selects the correlated generator (K=3)
    std::uint64_t instance_seed = 1;

    SolverConfig solver;
    WeightSelection weights;
    int runs = 1;
    std::string ref = "exact"; // "exact" or "sampled:COUNT"
    int checkpoints = 0;       // > 0 emits a convergence trace
};

/// Parsed --ref mode: (exact?, sample count).
inline std::pair<bool, int> parse_ref_mode(const std::string& ref)
{
    if (ref == "exact") return {true, 0};
    if (ref.rfind("sampled:", 0) == 0) {
        int count = 0;
        try {
            count = std::stoi(ref.substr(8));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad reference mode: " + ref);
        }
        if (count < 1) throw std::invalid_argument("sampled reference needs count >= 1");
        return {false, count};
    }
    throw std::invalid_argument("reference mode must be 'exact' or 'sampled:COUNT', got '" + ref +
                                "'");
}

struct BenchResult {
    RunReport report;
    SamplePool pool;
    ParetoArchive archive;
    std::vector<TracePoint> trace;
};

/// Full pipeline: obtain instance -> scalarize over the weight lattice ->
/// sample -> filter -> score. Stage boundaries: model construction covers
/// instance load/generation, lattice selection and block assembly; sampling
/// covers integration and spin readout; filtering covers dedup, the
/// non-dominated filter and hypervolume scoring.
inline BenchResult bench(const BenchConfig& cfg)
{
    if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
    const auto [exact_ref, sample_count] = parse_ref_mode(cfg.ref);
    cfg.solver.validate();

    const auto t0 = std::chrono::steady_clock::now();
    BenchResult result;
    RunReport& rep = result.report;

    std::optional<MultiObjectiveInstance> inst_opt;
    if (!cfg.instance_path.empty()) {
        inst_opt.emplace(load_instance(cfg.instance_path));
        rep.instance_source = cfg.instance_path;
    } else if (cfg.target_rho != 0) {
        inst_opt.emplace(
            generate_correlated_instance(cfg.n, cfg.density, cfg.target_rho, cfg.instance_seed));
        rep.instance_source = "generated";
        rep.density = cfg.density;
        rep.target_rho = cfg.target_rho;
        rep.instance_seed = cfg.instance_seed;
    } else {
        inst_opt.emplace(
            generate_uniform_instance(cfg.n, cfg.density, cfg.k, WeightSpec{}, cfg.instance_seed));
        rep.instance_source = "generated";
        rep.density = cfg.density;
        rep.instance_seed = cfg.instance_seed;
    }
    const MultiObjectiveInstance& inst = *inst_opt;
    const auto weights = build_weights(inst.k(), cfg.weights);
    const double obtain_s = detail::seconds_since(t0);

    rep.n = inst.n();
    rep.k = inst.k();
    rep.edge_count = inst.edges().size();
    rep.variant = variant_name(cfg.solver.variant);
    rep.iterations = cfg.solver.n_iterations;
    rep.dt = cfg.solver.dt;
    rep.alpha = cfg.solver.alpha;
    rep.batch = cfg.solver.batch_size;
    rep.init_scale = cfg.solver.init_scale;
    rep.runs = cfg.runs;
    rep.seed = cfg.solver.seed;
    rep.threads = cfg.solver.threads;
    rep.weight_resolution = select_resolution(inst.k(), cfg.weights);
    rep.weight_count = weights.size();

    result.pool = run_sampler(inst, weights, cfg.solver, cfg.runs);
    rep.model_construction_s = obtain_s + result.pool.model_construction_seconds;
    rep.sampling_s = result.pool.sampling_seconds;
    rep.pool_size = result.pool.size();

    result.archive = non_dominated_filter(result.pool, inst);
    rep.archive_size = result.archive.size();

    const auto t_score = std::chrono::steady_clock::now();
    std::vector<double> r = exact_ref
                                ? reference_point_exact(inst)
                                : reference_point_sampled(inst, sample_count, cfg.solver.seed);
    // a sampled minimum can sit above a solver extreme; keep the reference
    // dominated by every archive entry
    if (!exact_ref) clamp_reference(r, result.archive);
    result.archive.set_reference(r);
    rep.reference = r;
    rep.reference_mode = exact_ref ? "exact" : "sampled:" + std::to_string(sample_count);
    rep.hv = hypervolume(result.archive, r);
    rep.pareto_filtering_s = result.archive.filtering_seconds + detail::seconds_since(t_score);

    if (exact_ref && inst.n() <= kEnumerationCap) {
        const auto exact_front = brute_force_pareto(inst);
        rep.oracle = true;
        rep.hv_max = hypervolume(exact_front, r);
        rep.hv_ratio = hv_ratio(rep.hv, rep.hv_max);
        rep.hv_difference = hv_difference(rep.hv_max, rep.hv);
        const auto hit = samples_to_reach(result.pool, inst, r, rep.hv_max);
        rep.samples_to_optimal = hit ? static_cast<long long>(*hit) : -1;
    }

    if (cfg.checkpoints > 0) {
        result.trace = convergence_trace(result.pool, inst, r, cfg.checkpoints);
    }

    rep.end_to_end_s = detail::seconds_since(t0);
    return result;
}

// ---------------------------------------------------------------------------
// scatter plot
// ---------------------------------------------------------------------------

namespace detail {

inline std::string svg_coord(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

/// Static scatter of every 2-objective projection of the archive, one panel
/// per objective pair.
inline std::string svg_scatter(const ParetoArchive& archive)
{
    if (archive.entries.empty()) throw std::invalid_argument("cannot plot an empty archive");
    const int k = archive.k();
    if (k < 2) throw std::invalid_argument("scatter plot needs at least two objectives");

    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    }

    std::vector<double> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k));
    for (int d = 0; d < k; ++d) {
        double mn = archive.entries.front().value[static_cast<std::size_t>(d)];
        double mx = mn;
        for (const auto& e : archive.entries) {
            mn = std::min(mn, e.value[static_cast<std::size_t>(d)]);
            mx = std::max(mx, e.value[static_cast<std::size_t>(d)]);
        }
        if (mn == mx) {
            mn -= 1;
            mx += 1;
        }
        const double pad = 0.05 * (mx - mn);
        lo[static_cast<std::size_t>(d)] = mn - pad;
        hi[static_cast<std::size_t>(d)] = mx + pad;
    }

    const double plot = 280, margin = 52, gap = 24;
    const double panel = margin + plot + gap;
    const double width = panel * static_cast<double>(pairs.size());
    const double height = margin + plot + margin;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::svg_coord(width)
        << "\" height=\"" << detail::svg_coord(height) << "\" viewBox=\"0 0 "
        << detail::svg_coord(width) << ' ' << detail::svg_coord(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        const double x0 = panel * static_cast<double>(p) + margin;
        const double y0 = margin;
        out << "<rect x=\"" << detail::svg_coord(x0) << "\" y=\"" << detail::svg_coord(y0)
            << "\" width=\"" << detail::svg_coord(plot) << "\" height=\"" << detail::svg_coord(plot)
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::svg_coord(x0 + plot / 2) << "\" y=\""
            << detail::svg_coord(y0 + plot + 36)
            << "\" text-anchor=\"middle\" font-size=\"13\">C" << a + 1 << "</text>\n";
        out << "<text x=\"" << detail::svg_coord(x0 - 38) << "\" y=\""
            << detail::svg_coord(y0 + plot / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
            << "transform=\"rotate(-90 " << detail::svg_coord(x0 - 38) << ' '
            << detail::svg_coord(y0 + plot / 2) << ")\">C" << b + 1 << "</text>\n";
        out << "<text x=\"" << detail::svg_coord(x0 + plot / 2) << "\" y=\""
            << detail::svg_coord(y0 - 8) << "\" text-anchor=\"middle\" font-size=\"13\">C" << b + 1
            << " vs C" << a + 1 << "</text>\n";

        const auto sa = static_cast<std::size_t>(a);
        const auto sb = static_cast<std::size_t>(b);
        for (const auto& e : archive.entries) {
            const double fx = (e.value[sa] - lo[sa]) / (hi[sa] - lo[sa]);
            const double fy = (e.value[sb] - lo[sb]) / (hi[sb] - lo[sb]);
            out << "<circle cx=\"" << detail::svg_coord(x0 + fx * plot) << "\" cy=\""
                << detail::svg_coord(y0 + (1.0 - fy) * plot)
                << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.8\"/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// artifact emission
// ---------------------------------------------------------------------------

/// Write report.txt, archive.csv, trace.csv (when a trace was recorded) and
/// front.svg (when K >= 2) into `dir`.
inline void emit_bench_artifacts(const BenchResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "report.txt", format_report(result.report));
    save_atomic(dir / "archive.csv",
                [&](const std::filesystem::path& p) { save_archive_csv(result.archive, p); });
    if (!result.trace.empty()) {
        save_atomic(dir / "trace.csv",
                    [&](const std::filesystem::path& p) { save_trace_csv(result.trace, p); });
    }
    if (result.archive.k() >= 2) {
        write_text_atomic(dir / "front.svg", svg_scatter(result.archive));
    }
}

// ---------------------------------------------------------------------------
// noise sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    double alpha = 0;
    int repeat = 0;
    std::size_t pool_size = 0;
    long long samples_to_optimal = -1; // -1 = full front not recovered
    double hv_ratio = 0;
};

/// Noise-amplitude study: for each alpha and repeat, run the full pipeline
/// and record how many samples the pool needed to reach the exact maximum
/// hypervolume. Repeats differ only in the solver seed (base seed + repeat).
inline std::vector<SweepRow> noise_sweep(const BenchConfig& base,
                                         const std::vector<double>& alphas, int repeats)
{
    if (alphas.empty()) throw std::invalid_argument("noise sweep needs at least one alpha");
    if (repeats < 1) throw std::invalid_argument("noise sweep needs repeats >= 1");
    if (parse_ref_mode(base.ref).first == false) {
        throw std::invalid_argument("noise sweep scores against the exact front; use --ref exact");
    }

    std::vector<SweepRow> rows;
    rows.reserve(alphas.size() * static_cast<std::size_t>(repeats));
    for (const double alpha : alphas) {
        if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
        for (int rep = 0; rep < repeats; ++rep) {
            BenchConfig cfg = base;
            cfg.solver.alpha = alpha;
            cfg.solver.seed = base.solver.seed + static_cast<std::uint64_t>(rep);
            cfg.checkpoints = 0;
            const auto result = bench(cfg);
            rows.push_back({alpha, rep, result.report.pool_size,
                            result.report.samples_to_optimal, result.report.hv_ratio});
        }
    }
    return rows;
}

/// Sweep table as CSV; an empty samples_to_optimal cell means the pool never
/// reached the exact maximum hypervolume.
inline std::string format_sweep_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream out;
    out << "alpha,repeat,pool_size,samples_to_optimal,hv_ratio\n";
    for (const auto& row : rows) {
        out << format_number(row.alpha) << ',' << row.repeat << ',' << row.pool_size << ',';
        if (row.samples_to_optimal >= 0) out << row.samples_to_optimal;
        out << ',' << format_number(row.hv_ratio) << '\n';
    }
    return out.str();
}

inline std::string format_saturation_csv(const std::vector<SaturationPoint>& series)
{
    std::ostringstream out;
    out << "vectors,distinct_optima,hv_difference\n";
    for (const auto& p : series) {
        out << p.vectors << ',' << p.distinct_optima << ',' << format_number(p.hv_difference)
            << '\n';
    }
    return out.str();
}

} // namespace momc

#endif
