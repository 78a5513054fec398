#ifndef MOMC_ORACLE_HPP
#define MOMC_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "momc/enumerate.hpp"
#include "momc/instance.hpp"
#include "momc/pareto.hpp"
#include "momc/rng.hpp"
#include "momc/scalarize.hpp"
#include "momc/weights.hpp"

namespace momc {

/// Exact Pareto archive by exhaustive enumeration (s_0 fixed to +1; the cut
/// objectives are flip-invariant so nothing is lost). Ties on the objective
/// vector keep the lexicographically smallest configuration.
inline ParetoArchive brute_force_pareto(const MultiObjectiveInstance& inst)
{
    const int k = inst.k();
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) sums[static_cast<std::size_t>(l)] = inst.layer_sum(l);

    std::vector<std::vector<double>> values;
    values.reserve(std::size_t{1} << std::max(0, inst.n() - 1));
    enumerate_hamiltonians(inst, true,
                           [&](std::uint64_t, const std::vector<std::int8_t>&,
                               const std::vector<double>& h) {
                               std::vector<double> c(static_cast<std::size_t>(k));
                               for (int l = 0; l < k; ++l) {
                                   c[static_cast<std::size_t>(l)] =
                                       0.5 * (sums[static_cast<std::size_t>(l)] -
                                              h[static_cast<std::size_t>(l)]);
                               }
                               values.push_back(std::move(c));
                           });

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    detail::sort_lex_descending(order, values);

    // collapse duplicate objective vectors onto the lex-smallest configuration
    std::vector<std::size_t> unique_order;
    std::vector<std::size_t> owner(values.size());
    unique_order.reserve(order.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t best = order[i];
        std::size_t j = i + 1;
        for (; j < order.size() && values[order[j]] == values[best]; ++j) {
            if (config_at_walk_index(inst.n(), true, order[j]) <
                config_at_walk_index(inst.n(), true, best)) {
                best = order[j];
            }
        }
        owner[order[i]] = best;
        unique_order.push_back(order[i]);
        i = j;
    }

    const auto keep = detail::fast_front_ordered(values, unique_order);
    ParetoArchive archive;
    archive.entries.reserve(keep.size());
    for (const std::size_t i : keep) {
        archive.entries.push_back(
            {values[i], config_at_walk_index(inst.n(), true, owner[i])});
    }
    std::sort(archive.entries.begin(), archive.entries.end(),
              [](const auto& a, const auto& b) { return a.value > b.value; });
    return archive;
}

struct SaturationPoint {
    int vectors = 0;
    int distinct_optima = 0;
    double hv_difference = 0;
};

/// Saturation series: add weight vectors in lattice order, solve each
/// scalarized problem exactly, track cumulative distinct optima and the HV
/// distance of their front to the exact maximum.
inline std::vector<SaturationPoint> saturation_study(const MultiObjectiveInstance& inst,
                                                     const std::vector<WeightVector>& lattice)
{
    if (lattice.empty()) throw std::invalid_argument("saturation study needs weight vectors");
    const ParetoArchive exact = brute_force_pareto(inst);
    const std::vector<double> r = reference_point_exact(inst);
    const double hv_max = hypervolume(exact, r);

    std::vector<SaturationPoint> series;
    series.reserve(lattice.size());
    std::vector<SpinConfiguration> found;
    std::vector<ObjectiveVector> cut_pool;
    for (std::size_t l = 0; l < lattice.size(); ++l) {
        const auto sc = scalarize(inst, lattice[l]);
        const auto [h_min, argmins] = brute_force_scalar_optimum(sc, inst.n());
        (void)h_min;
        for (const auto& s : argmins) {
            if (std::find(found.begin(), found.end(), s) == found.end()) {
                found.push_back(s);
                cut_pool.push_back(cut_values(inst, s));
            }
        }
        const auto front = non_dominated_filter(cut_pool);
        const double hv = hypervolume(front, r);
        series.push_back({static_cast<int>(l + 1), static_cast<int>(found.size()),
                          hv_difference(hv_max, hv)});
    }
    return series;
}

/// Monte-Carlo hypervolume estimate: uniform samples in the bounding box
/// [r, componentwise max of the front]; estimate = box volume * hit fraction,
/// standard error from the binomial variance.
inline std::pair<double, double> monte_carlo_hv(const ParetoArchive& archive,
                                                const std::vector<double>& r, int samples,
                                                std::uint64_t seed)
{
    if (samples < 1000) throw std::invalid_argument("monte_carlo_hv needs samples >= 1000");
    if (archive.entries.empty()) throw std::invalid_argument("empty front");
    archive.validate_reference(r);

    const std::size_t k = r.size();
    std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
    for (const auto& e : archive.entries) {
        for (std::size_t d = 0; d < k; ++d) hi[d] = std::max(hi[d], e.value[d]);
    }
    double box = 1;
    for (std::size_t d = 0; d < k; ++d) box *= hi[d] - r[d];
    if (!(box > 0)) return {0.0, 0.0};

    rng::Stream stream(rng::derive_key(seed, detail::kParetoContext), 0, 0,
                       rng::tag_word(rng::Tag::monte_carlo));
    std::size_t hits = 0;
    std::vector<double> p(k);
    for (int s = 0; s < samples; ++s) {
        for (std::size_t d = 0; d < k; ++d) {
            p[d] = r[d] + (hi[d] - r[d]) * stream.next_u01();
        }
        for (const auto& e : archive.entries) {
            bool inside = true;
            for (std::size_t d = 0; d < k; ++d) {
                if (p[d] > e.value[d]) {
                    inside = false;
                    break;
                }
            }
            if (inside) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / samples;
    const double se = box * std::sqrt(frac * (1.0 - frac) / samples);
    return {box * frac, se};
}

} // namespace momc

#endif
