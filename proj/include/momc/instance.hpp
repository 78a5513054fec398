#ifndef MOMC_INSTANCE_HPP
#define MOMC_INSTANCE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "momc/rng.hpp"

namespace momc {

/// One undirected edge carrying a weight per objective layer.
struct Edge {
    int i = 0;
    int j = 0;
    std::vector<double> w;
};

/// A spin assignment; entries are exactly -1 or +1.
class SpinConfiguration {
public:
    SpinConfiguration() = default;

    explicit SpinConfiguration(std::vector<std::int8_t> spins) : s_(std::move(spins))
    {
        for (const auto v : s_) {
            if (v != 1 && v != -1) {
                throw std::invalid_argument("spin entries must be -1 or +1");
            }
        }
    }

    int size() const noexcept { return static_cast<int>(s_.size()); }
    std::int8_t operator[](int i) const noexcept { return s_[static_cast<std::size_t>(i)]; }
    const std::vector<std::int8_t>& spins() const noexcept { return s_; }

    SpinConfiguration flipped() const
    {
        SpinConfiguration out(*this);
        for (auto& v : out.s_) v = static_cast<std::int8_t>(-v);
        return out;
    }

    /// First spin forced to +1 by flipping the whole configuration if needed.
    SpinConfiguration canonical() const
    {
        return (!s_.empty() && s_[0] < 0) ? flipped() : *this;
    }

    friend bool operator==(const SpinConfiguration& a, const SpinConfiguration& b) = default;

    friend bool operator<(const SpinConfiguration& a, const SpinConfiguration& b)
    {
        return std::lexicographical_compare(a.s_.begin(), a.s_.end(), b.s_.begin(),
                                            b.s_.end());
    }

private:
    std::vector<std::int8_t> s_;
};

enum class Sense { cut, hamiltonian };

/// A length-K objective vector; the sense tag records whether values are cut
/// values (maximized) or Hamiltonian values (minimized) and never changes
/// after construction.
class ObjectiveVector {
public:
    ObjectiveVector(std::vector<double> values, Sense sense)
        : values_(std::move(values)), sense_(sense)
    {
        if (values_.empty()) {
            throw std::invalid_argument("objective vector must be non-empty");
        }
    }

    int size() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int k) const noexcept { return values_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& values() const noexcept { return values_; }
    Sense sense() const noexcept { return sense_; }

    friend bool operator==(const ObjectiveVector& a, const ObjectiveVector& b) = default;

private:
    std::vector<double> values_;
    Sense sense_;
};

/// K-objective weighted MaxCut instance: one graph, K weight layers.
/// Immutable after construction and safe to share across threads.
class MultiObjectiveInstance {
public:
    MultiObjectiveInstance(int n, int k, std::vector<Edge> edges)
        : n_(n), k_(k), edges_(std::move(edges))
    {
        if (n_ < 1) throw std::invalid_argument("vertex count must be positive");
        if (k_ < 1) throw std::invalid_argument("objective count must be positive");
        std::unordered_set<std::int64_t> seen;
        seen.reserve(edges_.size());
        for (const auto& e : edges_) {
            if (e.i == e.j) throw std::invalid_argument("self-loop edge");
            if (e.i < 0 || e.j < 0 || e.i >= n_ || e.j >= n_ || e.i >= e.j) {
                throw std::invalid_argument("edge endpoints must satisfy 0 <= i < j < n");
            }
            if (static_cast<int>(e.w.size()) != k_) {
                throw std::invalid_argument("every edge must carry exactly K weights");
            }
            if (!seen.insert(static_cast<std::int64_t>(e.i) * n_ + e.j).second) {
                throw std::invalid_argument("duplicate edge");
            }
        }
    }

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Total weight of layer k, i.e. the value of H_k on the all-equal spins.
    double layer_sum(int layer) const
    {
        check_layer(layer);
        double s = 0;
        for (const auto& e : edges_) s += e.w[static_cast<std::size_t>(layer)];
        return s;
    }

    /// Dense coupling matrix of one layer: symmetric, zero diagonal.
    Eigen::MatrixXd coupling(int layer) const
    {
        check_layer(layer);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_, n_);
        for (const auto& e : edges_) {
            J(e.i, e.j) = e.w[static_cast<std::size_t>(layer)];
            J(e.j, e.i) = e.w[static_cast<std::size_t>(layer)];
        }
        return J;
    }

    friend bool operator==(const MultiObjectiveInstance& a, const MultiObjectiveInstance& b)
    {
        if (a.n_ != b.n_ || a.k_ != b.k_ || a.edges_.size() != b.edges_.size()) return false;
        for (std::size_t e = 0; e < a.edges_.size(); ++e) {
            if (a.edges_[e].i != b.edges_[e].i || a.edges_[e].j != b.edges_[e].j ||
                a.edges_[e].w != b.edges_[e].w) {
                return false;
            }
        }
        return true;
    }

private:
    void check_layer(int layer) const
    {
        if (layer < 0 || layer >= k_) throw std::invalid_argument("layer out of range");
    }

    int n_;
    int k_;
    std::vector<Edge> edges_;
};

inline void check_spins_match(const MultiObjectiveInstance& inst, const SpinConfiguration& s)
{
    if (s.size() != inst.n()) {
        throw std::invalid_argument("spin configuration length " + std::to_string(s.size()) +
                                    " does not match instance n=" + std::to_string(inst.n()));
    }
}

/// Cut values (C_1..C_K): C_k = 1/2 sum_E J^k_ij (1 - s_i s_j).
inline ObjectiveVector cut_values(const MultiObjectiveInstance& inst,
                                  const SpinConfiguration& s)
{
    check_spins_match(inst, s);
    std::vector<double> c(static_cast<std::size_t>(inst.k()), 0.0);
    for (const auto& e : inst.edges()) {
        if (s[e.i] != s[e.j]) {
            for (int k = 0; k < inst.k(); ++k) c[static_cast<std::size_t>(k)] += e.w[static_cast<std::size_t>(k)];
        }
    }
    return ObjectiveVector(std::move(c), Sense::cut);
}

/// Hamiltonian values (H_1..H_K): H_k = sum_E J^k_ij s_i s_j.
inline ObjectiveVector hamiltonian_values(const MultiObjectiveInstance& inst,
                                          const SpinConfiguration& s)
{
    check_spins_match(inst, s);
    std::vector<double> h(static_cast<std::size_t>(inst.k()), 0.0);
    for (const auto& e : inst.edges()) {
        const double prod = static_cast<double>(s[e.i]) * static_cast<double>(s[e.j]);
        for (int k = 0; k < inst.k(); ++k) h[static_cast<std::size_t>(k)] += e.w[static_cast<std::size_t>(k)] * prod;
    }
    return ObjectiveVector(std::move(h), Sense::hamiltonian);
}

/// Edge-weight distribution for the instance generator.
struct WeightSpec {
    enum class Kind { uniform_int, uniform_real };

    Kind kind = Kind::uniform_int;
    double lo = 1.0;
    double hi = 10.0;

    static WeightSpec uniform_int(long lo, long hi)
    {
        if (lo > hi) throw std::invalid_argument("empty integer weight range");
        return {Kind::uniform_int, static_cast<double>(lo), static_cast<double>(hi)};
    }

    /// Weights drawn from (lo, hi]; the default (0, 1] keeps weights nonzero.
    static WeightSpec uniform_real(double lo = 0.0, double hi = 1.0)
    {
        if (!(lo < hi)) throw std::invalid_argument("empty real weight range");
        return {Kind::uniform_real, lo, hi};
    }

    double draw(rng::Stream& stream) const
    {
        if (kind == Kind::uniform_int) {
            const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
            return lo + static_cast<double>(stream.next_below(span));
        }
        return lo + (hi - lo) * stream.next_u01_open();
    }
};

namespace detail {

inline constexpr std::uint64_t kInstanceContext = 0x696E7374u; // stream context for generators

inline void check_generator_args(int n, double density, int min_n)
{
    if (n < min_n) {
        throw std::invalid_argument("vertex count must be at least " + std::to_string(min_n));
    }
    if (!(density > 0.0) || density > 1.0) {
        throw std::invalid_argument("density must lie in (0, 1]");
    }
}

} // namespace detail

/// Erdos-Renyi style generator: each vertex pair is an edge independently
/// with probability `density`; each edge carries k independent weights.
/// Deterministic in (n, density, k, spec, seed).
inline MultiObjectiveInstance generate_uniform_instance(int n, double density, int k,
                                                        const WeightSpec& spec,
                                                        std::uint64_t seed)
{
    detail::check_generator_args(n, density, 2);
    if (k < 2) throw std::invalid_argument("objective count must be at least 2");

    const std::uint64_t key = rng::derive_key(seed, detail::kInstanceContext);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            rng::Stream presence(key, static_cast<std::uint32_t>(i),
                                 static_cast<std::uint32_t>(j),
                                 rng::tag_word(rng::Tag::edge_presence));
            if (presence.next_u01() >= density) continue;
            rng::Stream wstream(key, static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(j),
                                rng::tag_word(rng::Tag::edge_weight));
            Edge e{i, j, {}};
            e.w.reserve(static_cast<std::size_t>(k));
            for (int layer = 0; layer < k; ++layer) e.w.push_back(spec.draw(wstream));
            edges.push_back(std::move(e));
        }
    }
    return MultiObjectiveInstance(n, k, std::move(edges));
}

/// Pearson correlation coefficient of two equally long samples.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("pearson requires two samples of equal size >= 2");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0 || syy <= 0) {
        throw std::invalid_argument("pearson undefined for zero-variance sample");
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace detail {

/// Uniformly random spin configurations used to measure objective correlation.
inline std::vector<SpinConfiguration> probe_pool(int n, int pool_size, std::uint64_t key)
{
    std::vector<SpinConfiguration> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int c = 0; c < pool_size; ++c) {
        rng::Stream stream(key, static_cast<std::uint32_t>(c), 0,
                           rng::tag_word(rng::Tag::probe_pool));
        std::vector<std::int8_t> spins(static_cast<std::size_t>(n));
        std::uint64_t bits = 0;
        for (int i = 0; i < n; ++i) {
            if (i % 64 == 0) bits = stream.next_u64();
            spins[static_cast<std::size_t>(i)] = (bits >> (i % 64)) & 1u ? 1 : -1;
        }
        pool.emplace_back(std::move(spins));
    }
    return pool;
}

} // namespace detail

inline constexpr int kCorrelationPoolSize = 2048;
inline constexpr double kCorrelationLambda = 0.5;

/// Pearson correlation between C_1 + C_2 and C_3 over a pool of uniformly
/// random configurations (seeded, fixed size).
inline double measured_correlation(const MultiObjectiveInstance& inst,
                                   int pool_size = kCorrelationPoolSize,
                                   std::uint64_t seed = 0)
{
    if (inst.k() != 3) throw std::invalid_argument("correlation measure requires K=3");
    const auto pool =
        detail::probe_pool(inst.n(), pool_size, rng::derive_key(seed, detail::kInstanceContext));
    std::vector<double> x, y;
    x.reserve(pool.size());
    y.reserve(pool.size());
    for (const auto& s : pool) {
        const auto c = cut_values(inst, s);
        x.push_back(c[0] + c[1]);
        y.push_back(c[2]);
    }
    return pearson(x, y);
}

/// Three-objective generator with a tuned anti-correlation between C_1 + C_2
/// and C_3. The third layer is built as J^3 = -lambda (J^1 + J^2) + sigma g
/// with g fixed standard normals; sigma is found by bisection so that the
/// Pearson correlation measured over a fixed random pool hits target_rho.
inline MultiObjectiveInstance generate_correlated_instance(int n, double density,
                                                           double target_rho,
                                                           std::uint64_t seed)
{
    detail::check_generator_args(n, density, 4);
    if (!(target_rho > -1.0) || !(target_rho < 0.0)) {
        throw std::invalid_argument("target correlation must lie in (-1, 0)");
    }

    MultiObjectiveInstance base = generate_uniform_instance(n, density, 2, WeightSpec{}, seed);
    const std::uint64_t key = rng::derive_key(seed, detail::kInstanceContext);
    const int m = base.num_edges();
    if (m < 2) throw std::runtime_error("correlated generation failed: too few edges");

    std::vector<double> noise(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) {
        const auto& edge = base.edges()[static_cast<std::size_t>(e)];
        rng::Stream g(key, static_cast<std::uint32_t>(edge.i),
                      static_cast<std::uint32_t>(edge.j),
                      rng::tag_word(rng::Tag::correlation_noise));
        noise[static_cast<std::size_t>(e)] = g.next_normal();
    }

    // Over the probe pool, C_1 + C_2 = x_c and C_3(sigma) = -lambda x_c + sigma b_c,
    // so the correlation is a closed-form function of sigma.
    const auto pool = detail::probe_pool(n, kCorrelationPoolSize, key);
    std::vector<double> x(pool.size()), b(pool.size());
    for (std::size_t c = 0; c < pool.size(); ++c) {
        double xc = 0, bc = 0;
        for (int e = 0; e < m; ++e) {
            const auto& edge = base.edges()[static_cast<std::size_t>(e)];
            if (pool[c][edge.i] != pool[c][edge.j]) {
                xc += edge.w[0] + edge.w[1];
                bc += noise[static_cast<std::size_t>(e)];
            }
        }
        x[c] = xc;
        b[c] = bc;
    }

    const double np = static_cast<double>(pool.size());
    double mx = 0, mb = 0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        mx += x[c];
        mb += b[c];
    }
    mx /= np;
    mb /= np;
    double vx = 0, vb = 0, cxb = 0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double dx = x[c] - mx;
        const double db = b[c] - mb;
        vx += dx * dx;
        vb += db * db;
        cxb += dx * db;
    }
    if (vx <= 0 || vb <= 0) {
        throw std::runtime_error("correlated generation failed: degenerate probe pool");
    }

    const double lambda = kCorrelationLambda;
    const auto rho_of = [&](double sigma) {
        const double cov = -lambda * vx + sigma * cxb;
        const double vy = lambda * lambda * vx - 2.0 * lambda * sigma * cxb + sigma * sigma * vb;
        return cov / std::sqrt(vx * vy);
    };

    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (rho_of(hi) < target_rho) {
        hi *= 2.0;
        if (++doublings > 200) {
            throw std::runtime_error("correlated generation failed to bracket target rho; achieved " +
                                     std::to_string(rho_of(hi)));
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rho_of(mid) < target_rho ? lo : hi) = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    const double achieved = rho_of(sigma);
    if (std::abs(achieved - target_rho) > 0.005) {
        throw std::runtime_error("correlated generation failed to reach target rho; achieved " +
                                 std::to_string(achieved));
    }

    std::vector<Edge> edges = base.edges();
    for (int e = 0; e < m; ++e) {
        auto& edge = edges[static_cast<std::size_t>(e)];
        edge.w.push_back(-lambda * (edge.w[0] + edge.w[1]) + sigma * noise[static_cast<std::size_t>(e)]);
    }
    return MultiObjectiveInstance(n, 3, std::move(edges));
}

/// Full-precision number formatting: integers verbatim, reals in the shortest
/// form that round-trips the double exactly.
inline std::string format_number(double v)
{
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Text format: header "n K m", then one line "i j w1 .. wK" per edge.
inline void save_instance(const MultiObjectiveInstance& inst, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << inst.n() << ' ' << inst.k() << ' ' << inst.num_edges() << '\n';
    for (const auto& e : inst.edges()) {
        out << e.i << ' ' << e.j;
        for (const double w : e.w) out << ' ' << format_number(w);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline MultiObjectiveInstance load_instance(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    const auto fail = [&](int line, const std::string& msg) -> void {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg);
    };

    std::string line;
    if (!std::getline(in, line)) fail(1, "malformed header: empty file");
    std::istringstream header(line);
    long long n = 0, k = 0, m = 0;
    if (!(header >> n >> k >> m) || n < 1 || k < 1 || m < 0) {
        fail(1, "malformed header: expected 'n K m'");
    }
    std::string extra;
    if (header >> extra) fail(1, "malformed header: trailing tokens");

    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    std::unordered_set<std::int64_t> seen;
    for (long long e = 0; e < m; ++e) {
        const int lineno = static_cast<int>(e) + 2;
        if (!std::getline(in, line)) fail(lineno, "unexpected end of file");
        std::istringstream row(line);
        long long i = 0, j = 0;
        if (!(row >> i >> j)) fail(lineno, "malformed edge line");
        if (i == j) fail(lineno, "self-loop");
        if (i < 0 || j < 0 || i >= n || j >= n) fail(lineno, "vertex index out of range");
        if (i > j) fail(lineno, "edge endpoints must satisfy i < j");
        if (!seen.insert(i * n + j).second) fail(lineno, "duplicate edge");
        Edge edge{static_cast<int>(i), static_cast<int>(j), {}};
        edge.w.reserve(static_cast<std::size_t>(k));
        for (long long layer = 0; layer < k; ++layer) {
            double w = 0;
            if (!(row >> w)) fail(lineno, "expected " + std::to_string(k) + " weights");
            edge.w.push_back(w);
        }
        double trailing = 0;
        if (row >> trailing) fail(lineno, "expected exactly " + std::to_string(k) + " weights");
        edges.push_back(std::move(edge));
    }
    return MultiObjectiveInstance(static_cast<int>(n), static_cast<int>(k), std::move(edges));
}

} // namespace momc

#endif
