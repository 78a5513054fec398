#ifndef MOMC_PARETO_HPP
#define MOMC_PARETO_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "momc/enumerate.hpp"
#include "momc/instance.hpp"
#include "momc/rng.hpp"
#include "momc/solver.hpp"

namespace momc {

/// Strict Pareto dominance. Cut vectors dominate by being >= everywhere and
/// > somewhere; Hamiltonian vectors mirror this in minimization sense.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b)
{
    if (a.sense() != b.sense()) throw std::invalid_argument("objective sense mismatch");
    if (a.size() != b.size()) throw std::invalid_argument("objective length mismatch");
    const double dir = a.sense() == Sense::cut ? 1.0 : -1.0;
    bool strict = false;
    for (int k = 0; k < a.size(); ++k) {
        const double d = dir * (a[k] - b[k]);
        if (d < 0.0) return false;
        if (d > 0.0) strict = true;
    }
    return strict;
}

namespace detail {

// raw-vector dominance in maximization sense
inline bool dominates_max(const std::vector<double>& a, const std::vector<double>& b)
{
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < b[k]) return false;
        if (a[k] > b[k]) strict = true;
    }
    return strict;
}

} // namespace detail

/// Non-dominated set in cut (maximization) space. Entries are kept sorted
/// lexicographically descending by objective value; spin configurations are
/// present when the archive was built from a sample pool.
class ParetoArchive {
public:
    struct Entry {
        std::vector<double> value;
        SpinConfiguration config; // may be empty for objective-only archives
    };

    std::vector<Entry> entries;
    std::vector<double> reference; // empty when unset
    double filtering_seconds = 0;

    int k() const noexcept
    {
        return entries.empty() ? 0 : static_cast<int>(entries.front().value.size());
    }
    std::size_t size() const noexcept { return entries.size(); }

    std::vector<std::vector<double>> values() const
    {
        std::vector<std::vector<double>> v;
        v.reserve(entries.size());
        for (const auto& e : entries) v.push_back(e.value);
        return v;
    }

    bool contains_value(const std::vector<double>& v) const
    {
        for (const auto& e : entries) {
            if (e.value == v) return true;
        }
        return false;
    }

    void set_reference(std::vector<double> r)
    {
        validate_reference(r);
        reference = std::move(r);
    }

    void validate_reference(const std::vector<double>& r) const
    {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& v = entries[i].value;
            if (r.size() != v.size()) {
                throw std::invalid_argument("reference point length does not match archive");
            }
            for (std::size_t k = 0; k < r.size(); ++k) {
                if (r[k] > v[k]) {
                    throw std::invalid_argument(
                        "reference point not dominated by archive entry " + std::to_string(i) +
                        " (objective " + std::to_string(k) + ")");
                }
            }
        }
    }
};

namespace detail {

inline void sort_lex_descending(std::vector<std::size_t>& order,
                                const std::vector<std::vector<double>>& vals)
{
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return vals[a] > vals[b]; // lexicographic on std::vector
    });
}

/// Indices of the non-dominated subset, by exhaustive pairwise comparison.
inline std::vector<std::size_t> naive_front(const std::vector<std::vector<double>>& vals)
{
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < vals.size() && !dominated; ++j) {
            dominated = j != i && dominates_max(vals[j], vals[i]);
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

/// Non-dominated subset given `order` already sorted lexicographically
/// descending (so any dominator precedes its victims); K=2 uses a running
/// maximum, K=3 a 2-d staircase, K>=4 an archive scan.
inline std::vector<std::size_t> fast_front_ordered(const std::vector<std::vector<double>>& vals,
                                                   const std::vector<std::size_t>& order)
{
    if (vals.empty()) return {};
    const std::size_t m = order.size();
    const std::size_t k = vals.front().size();

    std::vector<std::size_t> keep;
    if (k == 1) {
        keep.push_back(order.front());
        for (std::size_t i = 1; i < m; ++i) {
            if (vals[order[i]] == vals[keep.front()]) keep.push_back(order[i]);
        }
        std::sort(keep.begin(), keep.end());
        return keep;
    }
    if (k == 2) {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> prev;
        for (const std::size_t idx : order) {
            const auto& v = vals[idx];
            if (v == prev) { // duplicate of a kept point
                keep.push_back(idx);
                continue;
            }
            if (v[1] > best) {
                keep.push_back(idx);
                best = v[1];
                prev = v;
            } else {
                prev.clear();
            }
        }
    } else if (k == 3) {
        // staircase over (v1, v2): key v1 descending, value v2; v2 increases
        // as v1 decreases
        std::map<double, double, std::greater<double>> stair;
        std::vector<double> prev;
        for (const std::size_t idx : order) {
            const auto& v = vals[idx];
            if (v == prev) {
                keep.push_back(idx);
                continue;
            }
            // highest v2 among stair entries with key >= v[1]
            auto it = stair.lower_bound(v[1]); // first key <= v[1] under greater<>
            const double covered =
                it == stair.begin() ? -std::numeric_limits<double>::infinity()
                                    : std::prev(it)->second;
            const bool dominated = covered >= v[2] ||
                                   (it != stair.end() && it->first == v[1] && it->second >= v[2]);
            if (!dominated) {
                keep.push_back(idx);
                prev = v;
                // drop stair entries this point covers
                auto e = stair.lower_bound(v[1]);
                while (e != stair.end() && e->second <= v[2]) e = stair.erase(e);
                stair[v[1]] = v[2];
            } else {
                prev.clear();
            }
        }
    } else {
        std::vector<std::size_t> archive;
        std::vector<double> prev;
        for (const std::size_t idx : order) {
            const auto& v = vals[idx];
            if (v == prev) {
                keep.push_back(idx);
                continue;
            }
            bool dominated = false;
            for (const std::size_t a : archive) {
                if (dominates_max(vals[a], v)) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) {
                keep.push_back(idx);
                archive.push_back(idx);
                prev = v;
            } else {
                prev.clear();
            }
        }
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

inline std::vector<std::size_t> fast_front(const std::vector<std::vector<double>>& vals)
{
    std::vector<std::size_t> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    sort_lex_descending(order, vals);
    return fast_front_ordered(vals, order);
}

} // namespace detail

enum class FilterAlgorithm { fast, naive };

/// Non-dominated filter over bare objective vectors (no configurations).
/// Duplicate vectors collapse to a single entry.
inline ParetoArchive non_dominated_filter(const std::vector<ObjectiveVector>& pool,
                                          FilterAlgorithm algo = FilterAlgorithm::fast)
{
    if (pool.empty()) throw std::invalid_argument("non-dominated filter needs a non-empty pool");
    const auto t0 = std::chrono::steady_clock::now();

    const Sense sense = pool.front().sense();
    const int k = pool.front().size();
    std::vector<std::vector<double>> vals;
    vals.reserve(pool.size());
    for (const auto& v : pool) {
        if (v.sense() != sense || v.size() != k) {
            throw std::invalid_argument("pool mixes objective senses or lengths");
        }
        // filter in maximization space
        std::vector<double> w = v.values();
        if (sense == Sense::hamiltonian) {
            for (auto& x : w) x = -x;
        }
        vals.push_back(std::move(w));
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

    const auto keep = algo == FilterAlgorithm::fast ? detail::fast_front(vals)
                                                    : detail::naive_front(vals);
    ParetoArchive archive;
    archive.entries.reserve(keep.size());
    for (const std::size_t i : keep) {
        std::vector<double> v = vals[i];
        if (sense == Sense::hamiltonian) {
            for (auto& x : v) x = -x;
        }
        archive.entries.push_back({std::move(v), SpinConfiguration{}});
    }
    std::sort(archive.entries.begin(), archive.entries.end(),
              [](const auto& a, const auto& b) { return a.value > b.value; });
    archive.filtering_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return archive;
}

namespace detail {

struct WordSpanHash {
    std::size_t operator()(const std::vector<std::uint64_t>& w) const noexcept
    {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (const std::uint64_t x : w) {
            h ^= rng::mix64(x + h);
        }
        return static_cast<std::size_t>(h);
    }
};

/// Deduplicate pool configurations; returns (unique configs, record->unique map).
inline std::pair<std::vector<SpinConfiguration>, std::vector<std::size_t>> dedup_configs(
    const SamplePool& pool)
{
    const int wpc = pool.words_per_config();
    std::unordered_map<std::vector<std::uint64_t>, std::size_t, WordSpanHash> seen;
    seen.reserve(pool.size());
    std::vector<SpinConfiguration> unique;
    std::vector<std::size_t> index(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::vector<std::uint64_t> key(
            pool.packed_words().begin() + static_cast<std::ptrdiff_t>(i * wpc),
            pool.packed_words().begin() + static_cast<std::ptrdiff_t>((i + 1) * wpc));
        const auto [it, inserted] = seen.emplace(std::move(key), unique.size());
        if (inserted) unique.push_back(pool.config(i));
        index[i] = it->second;
    }
    return {std::move(unique), std::move(index)};
}

/// Cut values of many configurations at once, chunked through dense GEMM:
/// C_k(s) = (W_k - s' J_k s) / 2.
inline std::vector<std::vector<double>> evaluate_cuts(const MultiObjectiveInstance& inst,
                                                      const std::vector<SpinConfiguration>& configs)
{
    const int n = inst.n();
    const int k = inst.k();
    std::vector<Eigen::MatrixXd> layers;
    std::vector<double> sums;
    layers.reserve(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
        layers.push_back(inst.coupling(l));
        sums.push_back(inst.layer_sum(l));
    }

    std::vector<std::vector<double>> cuts(configs.size(),
                                          std::vector<double>(static_cast<std::size_t>(k)));
    constexpr std::size_t chunk = 4096;
    Eigen::MatrixXd S(n, static_cast<int>(std::min(chunk, configs.size())));
    for (std::size_t base = 0; base < configs.size(); base += chunk) {
        const int cols = static_cast<int>(std::min(chunk, configs.size() - base));
        for (int c = 0; c < cols; ++c) {
            const auto& s = configs[base + static_cast<std::size_t>(c)];
            for (int i = 0; i < n; ++i) S(i, c) = static_cast<double>(s[i]);
        }
        for (int l = 0; l < k; ++l) {
            const Eigen::MatrixXd JS = layers[static_cast<std::size_t>(l)] * S.leftCols(cols);
            for (int c = 0; c < cols; ++c) {
                const double h = 0.5 * S.col(c).dot(JS.col(c));
                cuts[base + static_cast<std::size_t>(c)][static_cast<std::size_t>(l)] =
                    0.5 * (sums[static_cast<std::size_t>(l)] - h);
            }
        }
    }
    return cuts;
}

} // namespace detail

/// Full pool filter: dedup spin configurations, evaluate cut vectors, collapse
/// duplicate objective vectors onto the lexicographically smallest
/// configuration, then keep the non-dominated subset.
inline ParetoArchive non_dominated_filter(const SamplePool& pool,
                                          const MultiObjectiveInstance& inst,
                                          FilterAlgorithm algo = FilterAlgorithm::fast)
{
    if (pool.empty()) throw std::invalid_argument("non-dominated filter needs a non-empty pool");
    if (pool.n() != inst.n()) throw std::invalid_argument("pool does not match instance");
    const auto t0 = std::chrono::steady_clock::now();

    auto [configs, index] = detail::dedup_configs(pool);
    (void)index;
    const auto cuts = detail::evaluate_cuts(inst, configs);

    // collapse equal objective vectors onto the lex-smallest configuration
    std::map<std::vector<double>, std::size_t, std::greater<>> best;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto [it, inserted] = best.emplace(cuts[i], i);
        if (!inserted && configs[i] < configs[it->second]) it->second = i;
    }

    std::vector<std::vector<double>> vals;
    std::vector<std::size_t> owner;
    vals.reserve(best.size());
    owner.reserve(best.size());
    for (const auto& [v, i] : best) {
        vals.push_back(v);
        owner.push_back(i);
    }

    const auto keep = algo == FilterAlgorithm::fast ? detail::fast_front(vals)
                                                    : detail::naive_front(vals);
    ParetoArchive archive;
    archive.entries.reserve(keep.size());
    for (const std::size_t i : keep) {
        archive.entries.push_back({vals[i], configs[owner[i]]});
    }
    std::sort(archive.entries.begin(), archive.entries.end(),
              [](const auto& a, const auto& b) { return a.value > b.value; });
    archive.filtering_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return archive;
}

// ---------------------------------------------------------------------------
// hypervolume
// ---------------------------------------------------------------------------

namespace detail {

/// Shift to gain space g = v - r (all gains >= 0 for a valid reference).
inline std::vector<std::vector<double>> to_gains(const std::vector<std::vector<double>>& vals,
                                                 const std::vector<double>& r)
{
    std::vector<std::vector<double>> g(vals.size(), std::vector<double>(r.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) {
        for (std::size_t k = 0; k < r.size(); ++k) g[i][k] = vals[i][k] - r[k];
    }
    return g;
}

/// 2-d sweep over gains: sort by g0 descending, accumulate fresh g1 strips.
inline double hv2_gains(std::vector<std::vector<double>> g)
{
    std::sort(g.begin(), g.end(), std::greater<>());
    double hv = 0;
    double best1 = 0;
    for (const auto& p : g) {
        if (p[1] > best1) {
            hv += p[0] * (p[1] - best1);
            best1 = p[1];
        }
    }
    return hv;
}

/// Area of the staircase union of [0,g0]x[0,g1] rectangles.
inline double staircase_area(const std::map<double, double, std::greater<double>>& stair)
{
    double area = 0;
    double prev = 0;
    for (const auto& [g0, g1] : stair) {
        area += g0 * (g1 - prev);
        prev = g1;
    }
    return area;
}

/// 3-d dimension sweep: descend through g2 levels, integrating the area of
/// the 2-d staircase of all points above the current level.
inline double hv3_gains(std::vector<std::vector<double>> g)
{
    std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a[2] > b[2]; });
    std::map<double, double, std::greater<double>> stair;
    double hv = 0;
    std::size_t i = 0;
    while (i < g.size()) {
        const double level = g[i][2];
        for (; i < g.size() && g[i][2] == level; ++i) {
            const double a = g[i][0];
            const double b = g[i][1];
            auto it = stair.lower_bound(a);
            const double covered = it == stair.begin() ? 0.0 : std::prev(it)->second;
            if (b <= covered) continue;
            auto e = stair.lower_bound(a);
            while (e != stair.end() && e->second <= b) e = stair.erase(e);
            stair[a] = b;
        }
        const double next = i < g.size() ? g[i][2] : 0.0;
        hv += staircase_area(stair) * (level - next);
    }
    return hv;
}

inline double inclusive_volume(const std::vector<double>& p)
{
    double v = 1;
    for (const double x : p) v *= x;
    return v;
}

/// WFG-style recursive exclusive hypervolume in gain space, any dimension.
inline double hv_wfg_gains(std::vector<std::vector<double>> g);

inline double exclusive_volume(const std::vector<double>& p,
                               const std::vector<std::vector<double>>& rest)
{
    if (rest.empty()) return inclusive_volume(p);
    // limit the trailing set to the box of p, prune dominated, recurse
    std::vector<std::vector<double>> limited;
    limited.reserve(rest.size());
    for (const auto& q : rest) {
        std::vector<double> m(q.size());
        for (std::size_t k = 0; k < q.size(); ++k) m[k] = std::min(q[k], p[k]);
        limited.push_back(std::move(m));
    }
    std::sort(limited.begin(), limited.end(), std::greater<>());
    limited.erase(std::unique(limited.begin(), limited.end()), limited.end());
    const auto keep = fast_front(limited);
    std::vector<std::vector<double>> front;
    front.reserve(keep.size());
    for (const std::size_t i : keep) front.push_back(limited[i]);
    return inclusive_volume(p) - hv_wfg_gains(std::move(front));
}

inline double hv_wfg_gains(std::vector<std::vector<double>> g)
{
    if (g.empty()) return 0;
    if (g.size() == 1) return inclusive_volume(g.front());
    if (g.front().size() == 2) return hv2_gains(std::move(g));
    std::sort(g.begin(), g.end(), std::greater<>());
    double hv = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        hv += exclusive_volume(g[i], {g.begin() + static_cast<std::ptrdiff_t>(i) + 1, g.end()});
    }
    return hv;
}

/// Gains of the archive entries against r, validating that r is dominated.
inline std::vector<std::vector<double>> archive_gains(const ParetoArchive& archive,
                                                      const std::vector<double>& r)
{
    if (archive.entries.empty()) throw std::invalid_argument("hypervolume of an empty archive");
    archive.validate_reference(r);
    return to_gains(archive.values(), r);
}

} // namespace detail

/// Exact hypervolume of the region dominated by the archive and bounded below
/// by r. Dispatches on dimension: K=1 max gain, K=2 sweep, K=3 dimension
/// sweep, K>=4 recursive slicing.
inline double hypervolume(const ParetoArchive& archive, const std::vector<double>& r)
{
    auto gains = detail::archive_gains(archive, r);
    const std::size_t k = r.size();
    if (k == 1) {
        double best = 0;
        for (const auto& g : gains) best = std::max(best, g[0]);
        return best;
    }
    if (k == 2) return detail::hv2_gains(std::move(gains));
    if (k == 3) return detail::hv3_gains(std::move(gains));
    return detail::hv_wfg_gains(std::move(gains));
}

/// Force a specific exact algorithm (cross-validation in tests).
enum class HvAlgorithm { sweep, dimension_sweep, recursive, inclusion_exclusion };

inline double hypervolume(const ParetoArchive& archive, const std::vector<double>& r,
                          HvAlgorithm algo)
{
    auto gains = detail::archive_gains(archive, r);
    switch (algo) {
        case HvAlgorithm::sweep:
            if (r.size() != 2) throw std::invalid_argument("sweep requires K=2");
            return detail::hv2_gains(std::move(gains));
        case HvAlgorithm::dimension_sweep:
            if (r.size() != 3) throw std::invalid_argument("dimension sweep requires K=3");
            return detail::hv3_gains(std::move(gains));
        case HvAlgorithm::recursive:
            return detail::hv_wfg_gains(std::move(gains));
        case HvAlgorithm::inclusion_exclusion: {
            if (gains.size() > 24) {
                throw std::invalid_argument("inclusion-exclusion limited to tiny fronts");
            }
            double hv = 0;
            const std::size_t m = gains.size();
            for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
                std::vector<double> corner(r.size(), std::numeric_limits<double>::infinity());
                for (std::size_t i = 0; i < m; ++i) {
                    if (mask & (1u << i)) {
                        for (std::size_t k = 0; k < r.size(); ++k) {
                            corner[k] = std::min(corner[k], gains[i][k]);
                        }
                    }
                }
                const double sign = std::popcount(mask) % 2 == 1 ? 1.0 : -1.0;
                hv += sign * detail::inclusive_volume(corner);
            }
            return hv;
        }
    }
    throw std::invalid_argument("unknown hypervolume algorithm");
}

// ---------------------------------------------------------------------------
// reference points
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr std::uint64_t kParetoContext = 0x70617265u;
} // namespace detail

/// Componentwise minimum of C_k over all 2^n configurations (n <= 22).
inline std::vector<double> reference_point_exact(const MultiObjectiveInstance& inst)
{
    std::vector<double> r(static_cast<std::size_t>(inst.k()),
                          std::numeric_limits<double>::infinity());
    std::vector<double> sums(static_cast<std::size_t>(inst.k()));
    for (int l = 0; l < inst.k(); ++l) sums[static_cast<std::size_t>(l)] = inst.layer_sum(l);
    enumerate_hamiltonians(inst, true,
                           [&](std::uint64_t, const std::vector<std::int8_t>&,
                               const std::vector<double>& h) {
                               for (std::size_t l = 0; l < r.size(); ++l) {
                                   r[l] = std::min(r[l], 0.5 * (sums[l] - h[l]));
                               }
                           });
    return r;
}

/// Componentwise minimum of C_k over `count` uniformly random configurations.
inline std::vector<double> reference_point_sampled(const MultiObjectiveInstance& inst, int count,
                                                   std::uint64_t seed)
{
    if (count < 1) throw std::invalid_argument("sampled reference needs count >= 1");
    const std::uint64_t key = rng::derive_key(seed, detail::kParetoContext);
    std::vector<double> r(static_cast<std::size_t>(inst.k()),
                          std::numeric_limits<double>::infinity());
    for (int c = 0; c < count; ++c) {
        rng::Stream stream(key, static_cast<std::uint32_t>(c), 0,
                           rng::tag_word(rng::Tag::reference_sample));
        std::vector<std::int8_t> spins(static_cast<std::size_t>(inst.n()));
        std::uint64_t bits = 0;
        for (int i = 0; i < inst.n(); ++i) {
            if (i % 64 == 0) bits = stream.next_u64();
            spins[static_cast<std::size_t>(i)] = (bits >> (i % 64)) & 1u ? 1 : -1;
        }
        const auto c_vals = cut_values(inst, SpinConfiguration(std::move(spins)));
        for (int l = 0; l < inst.k(); ++l) {
            r[static_cast<std::size_t>(l)] = std::min(r[static_cast<std::size_t>(l)], c_vals[l]);
        }
    }
    return r;
}

/// Lower `r` componentwise until every archive entry dominates it. Sampled
/// reference estimates need this before scoring an archive whose extremes
/// undercut the sampled minimum.
inline void clamp_reference(std::vector<double>& r, const ParetoArchive& archive)
{
    for (const auto& e : archive.entries) {
        if (e.value.size() != r.size()) {
            throw std::invalid_argument("reference point length does not match archive");
        }
        for (std::size_t l = 0; l < r.size(); ++l) r[l] = std::min(r[l], e.value[l]);
    }
}

// ---------------------------------------------------------------------------
// scalar summaries
// ---------------------------------------------------------------------------

/// hv_max - hv_t + 1, the log-friendly distance to the optimum (1 at
/// convergence). hv_t above hv_max signals inconsistent reference points.
inline double hv_difference(double hv_max, double hv_t)
{
    if (hv_t > hv_max + 1e-9 * std::max(1.0, std::abs(hv_max))) {
        throw std::invalid_argument("hv_t exceeds hv_max: inconsistent reference points");
    }
    return hv_max - hv_t + 1.0;
}

inline double hv_ratio(double hv_t, double hv_ref)
{
    if (!(hv_ref > 0.0)) throw std::invalid_argument("hv_ratio needs a positive reference HV");
    return hv_t / hv_ref;
}

// ---------------------------------------------------------------------------
// convergence traces
// ---------------------------------------------------------------------------

struct TracePoint {
    double elapsed_s = 0;
    double hv = 0;
    std::size_t samples = 0;
};

namespace detail {

/// Replay order: by timestamp, canonical key as tiebreak.
inline std::vector<std::size_t> replay_order(const SamplePool& pool)
{
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool.record(a).timestamp_ns < pool.record(b).timestamp_ns;
    });
    return order;
}

/// Insert into a running non-dominated archive of raw value vectors.
/// Returns true when the archive changed.
inline bool archive_insert(std::vector<std::vector<double>>& archive, const std::vector<double>& v)
{
    for (const auto& a : archive) {
        if (a == v || dominates_max(a, v)) return false;
    }
    std::erase_if(archive, [&](const std::vector<double>& a) { return dominates_max(v, a); });
    archive.push_back(v);
    return true;
}

} // namespace detail

/// Replay the pool in emission order and record the hypervolume of the
/// running archive at `checkpoints` evenly spaced sample-count milestones.
inline std::vector<TracePoint> convergence_trace(const SamplePool& pool,
                                                 const MultiObjectiveInstance& inst,
                                                 const std::vector<double>& r, int checkpoints)
{
    if (pool.empty()) throw std::invalid_argument("convergence trace needs a non-empty pool");
    if (checkpoints < 1) throw std::invalid_argument("checkpoints must be >= 1");

    auto [configs, index] = detail::dedup_configs(pool);
    const auto cuts = detail::evaluate_cuts(inst, configs);
    const auto order = detail::replay_order(pool);

    std::vector<TracePoint> trace;
    trace.reserve(static_cast<std::size_t>(checkpoints));
    std::vector<std::vector<double>> archive;
    std::size_t next_milestone_idx = 0;
    auto milestone = [&](std::size_t i) {
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(static_cast<double>(pool.size()) * static_cast<double>(i + 1) /
                                static_cast<double>(checkpoints))));
    };

    double hv_cache = 0;
    bool dirty = true;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t rec = order[pos];
        if (detail::archive_insert(archive, cuts[index[rec]])) dirty = true;
        while (next_milestone_idx < static_cast<std::size_t>(checkpoints) &&
               pos + 1 == milestone(next_milestone_idx)) {
            if (dirty) {
                ParetoArchive snapshot;
                for (const auto& v : archive) snapshot.entries.push_back({v, {}});
                hv_cache = hypervolume(snapshot, r);
                dirty = false;
            }
            trace.push_back({static_cast<double>(pool.record(rec).timestamp_ns) * 1e-9, hv_cache,
                             pos + 1});
            ++next_milestone_idx;
        }
    }
    return trace;
}

/// First 1-based sample count at which the running archive reaches
/// `target_hv`; nullopt when the pool never gets there. Records are consumed
/// in canonical (run, weight, trajectory) order, so the answer depends only on
/// the pool contents, never on wall-clock emission order.
inline std::optional<std::size_t> samples_to_reach(const SamplePool& pool,
                                                   const MultiObjectiveInstance& inst,
                                                   const std::vector<double>& r, double target_hv)
{
    if (pool.empty()) throw std::invalid_argument("empty pool");
    auto [configs, index] = detail::dedup_configs(pool);
    const auto cuts = detail::evaluate_cuts(inst, configs);

    const double tol = 1e-9 * std::max(1.0, std::abs(target_hv));
    std::vector<std::vector<double>> archive;
    for (std::size_t rec = 0; rec < pool.size(); ++rec) {
        if (detail::archive_insert(archive, cuts[index[rec]])) {
            ParetoArchive snapshot;
            for (const auto& v : archive) snapshot.entries.push_back({v, {}});
            if (hypervolume(snapshot, r) >= target_hv - tol) return rec + 1;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// archive and trace serialization
// ---------------------------------------------------------------------------

inline void save_archive_csv(const ParetoArchive& archive, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const int k = archive.k();
    const int n = archive.entries.empty() || archive.entries.front().config.size() == 0
                      ? 0
                      : archive.entries.front().config.size();
    out << "# archive k=" << k << " n=" << n
        << " filtering_s=" << format_number(archive.filtering_seconds);
    if (!archive.reference.empty()) {
        out << " r=";
        for (std::size_t i = 0; i < archive.reference.size(); ++i) {
            if (i) out << ';';
            out << format_number(archive.reference[i]);
        }
    }
    out << '\n';
    for (int l = 0; l < k; ++l) out << "c" << (l + 1) << ',';
    out << "spins\n";
    const int wpc = (n + 63) / 64;
    for (const auto& e : archive.entries) {
        for (const double v : e.value) out << format_number(v) << ',';
        if (e.config.size() == 0) {
            out << '-';
        } else {
            std::vector<std::uint64_t> words(static_cast<std::size_t>(wpc), 0);
            for (int b = 0; b < n; ++b) {
                if (e.config[b] > 0) words[static_cast<std::size_t>(b / 64)] |= 1ull << (b % 64);
            }
            out << detail::pack_hex(words.data(), wpc);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline ParetoArchive load_archive_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# archive ", 0) != 0) {
        throw std::runtime_error(path.string() + ":1: malformed archive header");
    }
    int k = 0, n = 0;
    double fs = 0;
    if (std::sscanf(line.c_str(), "# archive k=%d n=%d filtering_s=%lf", &k, &n, &fs) != 3) {
        throw std::runtime_error(path.string() + ":1: malformed archive header");
    }
    ParetoArchive archive;
    archive.filtering_seconds = fs;
    const auto rpos = line.find(" r=");
    if (rpos != std::string::npos) {
        std::istringstream rs(line.substr(rpos + 3));
        std::string cell;
        while (std::getline(rs, cell, ';')) archive.reference.push_back(std::stod(cell));
    }
    if (!std::getline(in, line)) {
        throw std::runtime_error(path.string() + ":2: missing column header");
    }
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        ParetoArchive::Entry e;
        for (int l = 0; l < k; ++l) {
            if (!std::getline(row, cell, ',')) {
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": malformed archive row");
            }
            e.value.push_back(std::stod(cell));
        }
        if (!std::getline(row, cell, ',')) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": malformed archive row");
        }
        if (cell != "-") {
            const int wpc = (n + 63) / 64;
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
            e.config = SpinConfiguration(std::move(spins));
        }
        archive.entries.push_back(std::move(e));
    }
    return archive;
}

inline void save_trace_csv(const std::vector<TracePoint>& trace,
                           const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "elapsed_s,hv,samples\n";
    for (const auto& p : trace) {
        out << format_number(p.elapsed_s) << ',' << format_number(p.hv) << ',' << p.samples
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace momc

#endif
