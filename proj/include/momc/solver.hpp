#ifndef MOMC_SOLVER_HPP
#define MOMC_SOLVER_HPP

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "momc/instance.hpp"
#include "momc/rng.hpp"
#include "momc/scalarize.hpp"
#include "momc/weights.hpp"

namespace momc {

enum class SolverVariant { ballistic_sb, discrete_sb, simcim };

inline const char* variant_name(SolverVariant v)
{
    switch (v) {
        case SolverVariant::ballistic_sb: return "bsb";
        case SolverVariant::discrete_sb: return "dsb";
        case SolverVariant::simcim: return "simcim";
    }
    return "?";
}

inline SolverVariant parse_variant(const std::string& name)
{
    if (name == "bsb") return SolverVariant::ballistic_sb;
    if (name == "dsb") return SolverVariant::discrete_sb;
    if (name == "simcim") return SolverVariant::simcim;
    throw std::invalid_argument("unknown solver variant: " + name);
}

struct SolverConfig {
    SolverVariant variant = SolverVariant::ballistic_sb;
    int n_iterations = 50;
    double dt = 1.0;
    double a0 = 1.0;
    double alpha = 0.15;
    int batch_size = 3000;
    double init_scale = 0.1;
    std::uint64_t seed = 0;
    int threads = 1; // 0 picks hardware concurrency

    void validate() const
    {
        if (n_iterations < 1) throw std::invalid_argument("n_iterations must be >= 1");
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (!(a0 > 0.0)) throw std::invalid_argument("a0 must be positive");
        if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (init_scale < 0.0) throw std::invalid_argument("init_scale must be non-negative");
        if (threads < 0) throw std::invalid_argument("threads must be non-negative");
    }
};

/// Linear pump ramp: a(t) = a0 * t / total with a0 = 1.
inline double pump_schedule(int t, int total)
{
    if (total < 1 || t < 0 || t > total) {
        throw std::invalid_argument("pump schedule requires 0 <= t <= total");
    }
    return static_cast<double>(t) / static_cast<double>(total);
}

/// Positions and momenta for a batch of trajectories; one column per
/// trajectory. The inelastic wall keeps every |x| <= 1.
struct TrajectoryState {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    int step = 0;
};

/// Addresses the RNG streams of a contiguous trajectory range: `key` encodes
/// (seed, run), `weight` the weight-vector index, `trajectory` the global
/// index of the first column. Chunked and monolithic integration of the same
/// range consume identical streams.
struct StreamKey {
    std::uint64_t key = 0;
    std::uint32_t weight = 0;
    std::uint32_t trajectory = 0;
};

namespace detail {

inline constexpr std::uint64_t kSolverContext = 0x736F6C76u;
inline constexpr int kTrajectoryChunk = 512; // fixed so results never depend on thread count

inline std::uint64_t run_key(std::uint64_t seed, std::uint32_t run)
{
    return rng::derive_key(rng::derive_key(seed, kSolverContext), run);
}

} // namespace detail

inline TrajectoryState init_state(const SolverConfig& config, int n, int batch,
                                  const StreamKey& key)
{
    if (n < 1 || batch < 1) throw std::invalid_argument("state dimensions must be positive");
    TrajectoryState st;
    st.x.resize(n, batch);
    st.y.resize(n, batch);
    st.step = 0;
    for (int c = 0; c < batch; ++c) {
        const std::uint32_t traj = key.trajectory + static_cast<std::uint32_t>(c);
        rng::Stream sx(key.key, key.weight, traj, rng::tag_word(rng::Tag::init_x));
        rng::Stream sy(key.key, key.weight, traj, rng::tag_word(rng::Tag::init_y));
        for (int i = 0; i < n; ++i) st.x(i, c) = sx.next_symmetric(config.init_scale);
        for (int i = 0; i < n; ++i) st.y(i, c) = sy.next_symmetric(config.init_scale);
    }
    return st;
}

namespace detail {

inline void fill_step_noise(Eigen::MatrixXd& noise, const StreamKey& key, int step)
{
    for (int c = 0; c < noise.cols(); ++c) {
        const std::uint32_t traj = key.trajectory + static_cast<std::uint32_t>(c);
        rng::Stream s(key.key, key.weight, traj,
                      rng::tag_word(rng::Tag::step_noise, static_cast<std::uint32_t>(step)));
        for (int i = 0; i < noise.rows(); ++i) noise(i, c) = s.next_normal();
    }
}

inline void check_finite(const TrajectoryState& st)
{
    if (!st.x.allFinite() || !st.y.allFinite()) {
        throw std::runtime_error("numerical failure at step " + std::to_string(st.step));
    }
}

} // namespace detail

/// One symplectic-Euler update with additive momentum noise, then the
/// inelastic wall: coordinates pushed past |x|=1 snap to the wall with their
/// momentum dissipated. The coupling feed is phi(x)=x (ballistic) or sgn(x)
/// (discrete, sgn(0)=+1); the force matrix is -J(c) so the flow descends the
/// scalarized Hamiltonian.
inline void sb_step(TrajectoryState& st, const ScalarizedCoupling& sc, double a_t,
                    const SolverConfig& config, const StreamKey& key)
{
    const auto n = st.x.rows();
    const auto m = st.x.cols();
    if (sc.matrix.rows() != n) throw std::invalid_argument("state does not match coupling size");

    Eigen::MatrixXd coupled(n, m);
    if (config.variant == SolverVariant::discrete_sb) {
        coupled.noalias() =
            sc.matrix * st.x.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
    } else {
        coupled.noalias() = sc.matrix * st.x;
    }

    const double drift = config.a0 - a_t;
    if (config.alpha > 0.0) {
        Eigen::MatrixXd noise(n, m);
        detail::fill_step_noise(noise, key, st.step);
        st.y.array() += config.dt * (-drift * st.x.array() - sc.c0 * coupled.array() +
                                     config.alpha * noise.array());
    } else {
        st.y.array() += config.dt * (-drift * st.x.array() - sc.c0 * coupled.array());
    }
    st.x.array() += config.dt * config.a0 * st.y.array();

    st.y.array() = (st.x.array().abs() > 1.0).select(0.0, st.y.array());
    st.x = st.x.cwiseMax(-1.0).cwiseMin(1.0);

    ++st.step;
    detail::check_finite(st);
}

/// Momentum-gradient-descent update with an amplitude clamp and no momentum
/// reset; `pump` is the (negative, vanishing) gain schedule value. st.y holds
/// the running momentum-filtered increment.
inline void simcim_step(TrajectoryState& st, const ScalarizedCoupling& sc, double pump,
                        const SolverConfig& config, const StreamKey& key)
{
    const auto n = st.x.rows();
    const auto m = st.x.cols();
    if (sc.matrix.rows() != n) throw std::invalid_argument("state does not match coupling size");
    constexpr double beta = 0.9;

    Eigen::MatrixXd coupled(n, m);
    coupled.noalias() = sc.matrix * st.x;

    Eigen::MatrixXd delta(n, m);
    if (config.alpha > 0.0) {
        Eigen::MatrixXd noise(n, m);
        detail::fill_step_noise(noise, key, st.step);
        delta.array() = pump * st.x.array() - sc.c0 * coupled.array() +
                        config.alpha * noise.array();
    } else {
        delta.array() = pump * st.x.array() - sc.c0 * coupled.array();
    }
    st.y.array() = beta * st.y.array() + (1.0 - beta) * delta.array();
    st.x.array() += config.dt * st.y.array();
    st.x = st.x.cwiseMax(-1.0).cwiseMin(1.0);

    ++st.step;
    detail::check_finite(st);
}

/// SimCIM gain: linear from -1/2 up to 0.
inline double simcim_schedule(int t, int total) { return -0.5 * (1.0 - pump_schedule(t, total)); }

/// Integrate `count` trajectories of one scalarized block through all
/// n_iterations steps and return the final state.
inline TrajectoryState integrate_block(const ScalarizedCoupling& sc, const SolverConfig& config,
                                       const StreamKey& key, int count)
{
    config.validate();
    TrajectoryState st = init_state(config, static_cast<int>(sc.matrix.rows()), count, key);
    for (int t = 0; t < config.n_iterations; ++t) {
        if (config.variant == SolverVariant::simcim) {
            simcim_step(st, sc, simcim_schedule(t + 1, config.n_iterations), config, key);
        } else {
            sb_step(st, sc, pump_schedule(t + 1, config.n_iterations), config, key);
        }
    }
    return st;
}

/// Final readout s_i = sgn(x_i), with sgn(0) = +1.
inline SpinConfiguration read_spins(const TrajectoryState& st, int column)
{
    std::vector<std::int8_t> s(static_cast<std::size_t>(st.x.rows()));
    for (int i = 0; i < st.x.rows(); ++i) {
        s[static_cast<std::size_t>(i)] = st.x(i, column) < 0.0 ? -1 : 1;
    }
    return SpinConfiguration(std::move(s));
}

struct SampleRecord {
    std::uint32_t run = 0;
    std::uint32_t weight = 0;
    std::uint32_t trajectory = 0;
    std::int64_t timestamp_ns = 0; // relative to sampling start

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Flat pool of spin samples with packed storage; records are kept in
/// canonical (run, weight, trajectory) order regardless of how the sampler
/// was parallelized.
class SamplePool {
public:
    SamplePool() = default;
    explicit SamplePool(int n) : n_(n)
    {
        if (n < 1) throw std::invalid_argument("pool spin count must be positive");
    }

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const SampleRecord& record(std::size_t i) const { return records_[i]; }

    int words_per_config() const noexcept { return (n_ + 63) / 64; }

    void resize(std::size_t count)
    {
        records_.resize(count);
        words_.assign(count * static_cast<std::size_t>(words_per_config()), 0);
    }

    void append(const SampleRecord& rec, const SpinConfiguration& s)
    {
        records_.push_back(rec);
        words_.resize(records_.size() * static_cast<std::size_t>(words_per_config()), 0);
        set_config(records_.size() - 1, s);
    }

    void set_record(std::size_t i, const SampleRecord& rec) { records_[i] = rec; }

    void set_config(std::size_t i, const SpinConfiguration& s)
    {
        if (s.size() != n_) throw std::invalid_argument("sample length does not match pool");
        const int wpc = words_per_config();
        std::uint64_t* w = &words_[i * static_cast<std::size_t>(wpc)];
        for (int word = 0; word < wpc; ++word) w[word] = 0;
        for (int b = 0; b < n_; ++b) {
            if (s[b] > 0) w[b / 64] |= (1ull << (b % 64));
        }
    }

    SpinConfiguration config(std::size_t i) const
    {
        std::vector<std::int8_t> s(static_cast<std::size_t>(n_));
        const std::uint64_t* w = &words_[i * static_cast<std::size_t>(words_per_config())];
        for (int b = 0; b < n_; ++b) {
            s[static_cast<std::size_t>(b)] = (w[b / 64] >> (b % 64)) & 1u ? 1 : -1;
        }
        return SpinConfiguration(std::move(s));
    }

    const std::vector<std::uint64_t>& packed_words() const noexcept { return words_; }

    double model_construction_seconds = 0;
    double sampling_seconds = 0;

    /// Equality of everything reproducible: spins and record keys, not
    /// timestamps or timings.
    friend bool same_samples(const SamplePool& a, const SamplePool& b)
    {
        if (a.n_ != b.n_ || a.records_.size() != b.records_.size()) return false;
        for (std::size_t i = 0; i < a.records_.size(); ++i) {
            const auto& ra = a.records_[i];
            const auto& rb = b.records_[i];
            if (ra.run != rb.run || ra.weight != rb.weight || ra.trajectory != rb.trajectory) {
                return false;
            }
        }
        return a.words_ == b.words_;
    }

    friend bool operator==(const SamplePool& a, const SamplePool& b)
    {
        return a.n_ == b.n_ && a.records_ == b.records_ && a.words_ == b.words_;
    }

private:
    int n_ = 0;
    std::vector<SampleRecord> records_;
    std::vector<std::uint64_t> words_;
};

namespace detail {

inline std::string pack_hex(const std::uint64_t* words, int count)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<std::size_t>(count) * 16);
    for (int w = 0; w < count; ++w) {
        for (int nib = 15; nib >= 0; --nib) {
            out.push_back(digits[(words[w] >> (4 * nib)) & 0xF]);
        }
    }
    return out;
}

} // namespace detail

inline void save_pool_csv(const SamplePool& pool, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# pool n=" << pool.n() << " model_construction_s="
        << format_number(pool.model_construction_seconds)
        << " sampling_s=" << format_number(pool.sampling_seconds) << '\n';
    out << "run,weight,trajectory,timestamp_ns,spins\n";
    const int wpc = pool.words_per_config();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& r = pool.record(i);
        out << r.run << ',' << r.weight << ',' << r.trajectory << ',' << r.timestamp_ns << ','
            << detail::pack_hex(&pool.packed_words()[i * static_cast<std::size_t>(wpc)], wpc)
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline SamplePool load_pool_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# pool n=", 0) != 0) {
        throw std::runtime_error(path.string() + ":1: malformed pool header");
    }
    int n = 0;
    double mc = 0, ss = 0;
    if (std::sscanf(line.c_str(), "# pool n=%d model_construction_s=%lf sampling_s=%lf", &n, &mc,
                    &ss) != 3 ||
        n < 1) {
        throw std::runtime_error(path.string() + ":1: malformed pool header");
    }
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ":2: missing column header");

    SamplePool pool(n);
    pool.model_construction_seconds = mc;
    pool.sampling_seconds = ss;
    const int wpc = pool.words_per_config();
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        SampleRecord rec;
        try {
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("run");
            rec.run = static_cast<std::uint32_t>(std::stoul(cell));
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("weight");
            rec.weight = static_cast<std::uint32_t>(std::stoul(cell));
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("trajectory");
            rec.trajectory = static_cast<std::uint32_t>(std::stoul(cell));
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("timestamp");
            rec.timestamp_ns = std::stoll(cell);
            if (!std::getline(row, cell, ',')) throw std::invalid_argument("spins");
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": malformed pool record");
        }
        if (cell.size() != static_cast<std::size_t>(wpc) * 16) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": bad spin field width");
        }
        std::vector<std::int8_t> spins(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) {
            const int word = b / 64;
            const int nib_index = 15 - (b % 64) / 4;
            const char ch = cell[static_cast<std::size_t>(word * 16 + nib_index)];
            const int v = ch <= '9' ? ch - '0' : ch - 'a' + 10;
            spins[static_cast<std::size_t>(b)] = (v >> (b % 4)) & 1 ? 1 : -1;
        }
        pool.append(rec, SpinConfiguration(std::move(spins)));
    }
    return pool;
}

/// Integrate every (run, weight, trajectory) cell of the experiment and
/// collect the sign readouts. Work is split into fixed-size trajectory
/// chunks scheduled over `config.threads` workers; every chunk consumes the
/// same RNG streams no matter which worker runs it, so pools are bit-identical
/// across thread counts. Runs execute sequentially and share nothing.
inline SamplePool run_sampler(const MultiObjectiveInstance& inst,
                              const std::vector<WeightVector>& weights,
                              const SolverConfig& config, int runs)
{
    config.validate();
    if (weights.empty()) throw std::invalid_argument("run_sampler needs at least one weight vector");
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const BlockSystem sys = build_block_system(inst, weights);
    const auto t1 = clock::now();

    const int n = inst.n();
    const int L = static_cast<int>(weights.size());
    const int batch = config.batch_size;
    const int chunk = detail::kTrajectoryChunk;
    const int chunks_per_weight = (batch + chunk - 1) / chunk;
    const int tasks_per_run = L * chunks_per_weight;

    SamplePool pool(n);
    pool.resize(static_cast<std::size_t>(runs) * static_cast<std::size_t>(L) *
                static_cast<std::size_t>(batch));

    int workers = config.threads == 0
                      ? static_cast<int>(std::thread::hardware_concurrency())
                      : config.threads;
    if (workers < 1) workers = 1;
    workers = std::min(workers, tasks_per_run);

    const auto sample_start = clock::now();
    std::mutex error_mutex;
    std::exception_ptr first_error;

    for (int run = 0; run < runs; ++run) {
        const std::uint64_t key = detail::run_key(config.seed, static_cast<std::uint32_t>(run));
        std::atomic<int> next_task{0};

        const auto worker = [&]() {
            for (;;) {
                const int task = next_task.fetch_add(1);
                if (task >= tasks_per_run) return;
                const int l = task / chunks_per_weight;
                const int c = task % chunks_per_weight;
                const int first = c * chunk;
                const int count = std::min(chunk, batch - first);
                const StreamKey skey{key, static_cast<std::uint32_t>(l),
                                     static_cast<std::uint32_t>(first)};
                try {
                    const TrajectoryState st =
                        integrate_block(sys.blocks[static_cast<std::size_t>(l)], config, skey, count);
                    const auto stamp = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                           clock::now() - sample_start)
                                           .count();
                    const std::size_t base =
                        (static_cast<std::size_t>(run) * L + static_cast<std::size_t>(l)) * batch +
                        static_cast<std::size_t>(first);
                    for (int t = 0; t < count; ++t) {
                        pool.set_record(base + static_cast<std::size_t>(t),
                                        {static_cast<std::uint32_t>(run),
                                         static_cast<std::uint32_t>(l),
                                         static_cast<std::uint32_t>(first + t), stamp});
                        pool.set_config(base + static_cast<std::size_t>(t), read_spins(st, t));
                    }
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::make_exception_ptr(std::runtime_error(
                            std::string(e.what()) + " (run " + std::to_string(run) + ", weight " +
                            std::to_string(l) + ")"));
                    }
                    return;
                }
            }
        };

        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
            for (auto& th : threads) th.join();
        }
        if (first_error) std::rethrow_exception(first_error);
    }

    pool.model_construction_seconds = std::chrono::duration<double>(t1 - t0).count();
    pool.sampling_seconds = std::chrono::duration<double>(clock::now() - sample_start).count();
    return pool;
}

} // namespace momc

#endif
