#ifndef MOMC_ENUMERATE_HPP
#define MOMC_ENUMERATE_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "momc/instance.hpp"
#include "momc/scalarize.hpp"

namespace momc {

inline constexpr int kEnumerationCap = 22;

namespace detail {

inline void check_enumeration_cap(int n)
{
    if (n > kEnumerationCap) {
        throw std::invalid_argument("exhaustive enumeration capped at n <= " +
                                    std::to_string(kEnumerationCap) + " (got n=" +
                                    std::to_string(n) + ")");
    }
    if (n < 1) throw std::invalid_argument("enumeration needs n >= 1");
}

} // namespace detail

/// Visit every spin configuration once in Gray-code order, flipping one spin
/// per step and updating all K Hamiltonians through local fields. `fixed_first`
/// pins s_0 = +1, halving the walk via spin-flip symmetry. The visitor
/// receives (walk index, spins, H values); cut values follow from
/// C_k = (W_k - H_k) / 2.
template <typename Visitor>
void enumerate_hamiltonians(const MultiObjectiveInstance& inst, bool fixed_first, Visitor&& visit)
{
    detail::check_enumeration_cap(inst.n());
    const int n = inst.n();
    const int k = inst.k();
    const int free_bits = fixed_first ? n - 1 : n;
    const int base = fixed_first ? 1 : 0;

    std::vector<std::int8_t> s(static_cast<std::size_t>(n), 1);
    std::vector<double> h(static_cast<std::size_t>(k), 0.0);
    // local field f[i*k + l] = sum_j J^l_ij s_j
    std::vector<double> f(static_cast<std::size_t>(n) * k, 0.0);
    for (const auto& e : inst.edges()) {
        for (int l = 0; l < k; ++l) {
            h[static_cast<std::size_t>(l)] += e.w[static_cast<std::size_t>(l)];
            f[static_cast<std::size_t>(e.i) * k + l] += e.w[static_cast<std::size_t>(l)];
            f[static_cast<std::size_t>(e.j) * k + l] += e.w[static_cast<std::size_t>(l)];
        }
    }

    // adjacency for field updates
    std::vector<std::vector<std::pair<int, const double*>>> adj(static_cast<std::size_t>(n));
    for (const auto& e : inst.edges()) {
        adj[static_cast<std::size_t>(e.i)].emplace_back(e.j, e.w.data());
        adj[static_cast<std::size_t>(e.j)].emplace_back(e.i, e.w.data());
    }

    const std::uint64_t total = 1ull << free_bits;
    visit(std::uint64_t{0}, s, h);
    for (std::uint64_t i = 1; i < total; ++i) {
        const int bit = std::countr_zero(i);
        const int spin = base + bit;
        const double old = static_cast<double>(s[static_cast<std::size_t>(spin)]);
        for (int l = 0; l < k; ++l) {
            h[static_cast<std::size_t>(l)] -= 2.0 * old * f[static_cast<std::size_t>(spin) * k + l];
        }
        s[static_cast<std::size_t>(spin)] = static_cast<std::int8_t>(-old);
        for (const auto& [j, w] : adj[static_cast<std::size_t>(spin)]) {
            for (int l = 0; l < k; ++l) {
                f[static_cast<std::size_t>(j) * k + l] -= 2.0 * old * w[l];
            }
        }
        visit(i, s, h);
    }
}

/// Spin configuration at Gray-walk index i (matches enumerate_hamiltonians).
inline SpinConfiguration config_at_walk_index(int n, bool fixed_first, std::uint64_t i)
{
    const std::uint64_t gray = i ^ (i >> 1);
    const int base = fixed_first ? 1 : 0;
    std::vector<std::int8_t> s(static_cast<std::size_t>(n), 1);
    for (int b = 0; b + base < n; ++b) {
        if ((gray >> b) & 1u) s[static_cast<std::size_t>(b + base)] = -1;
    }
    return SpinConfiguration(std::move(s));
}

/// Exact minimum of the scalarized Hamiltonian over all configurations with
/// s_0 = +1, plus every attaining configuration (up to global flip).
inline std::pair<double, std::vector<SpinConfiguration>> brute_force_scalar_optimum(
    const ScalarizedCoupling& sc, int n)
{
    detail::check_enumeration_cap(n);
    if (sc.matrix.rows() != n) throw std::invalid_argument("coupling size does not match n");

    std::vector<double> field(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) field[static_cast<std::size_t>(i)] = sc.matrix.row(i).sum();
    std::vector<std::int8_t> s(static_cast<std::size_t>(n), 1);
    double h = 0.5 * sc.matrix.sum();

    double best = h;
    std::vector<std::uint64_t> argmin{0};
    const std::uint64_t total = 1ull << (n - 1);
    for (std::uint64_t i = 1; i < total; ++i) {
        const int spin = 1 + std::countr_zero(i);
        const double old = static_cast<double>(s[static_cast<std::size_t>(spin)]);
        h -= 2.0 * old * field[static_cast<std::size_t>(spin)];
        s[static_cast<std::size_t>(spin)] = static_cast<std::int8_t>(-old);
        for (int j = 0; j < n; ++j) {
            field[static_cast<std::size_t>(j)] -= 2.0 * old * sc.matrix(j, spin);
        }
        if (h < best) {
            best = h;
            argmin.assign(1, i);
        } else if (h == best) {
            argmin.push_back(i);
        }
    }

    std::vector<SpinConfiguration> configs;
    configs.reserve(argmin.size());
    for (const std::uint64_t i : argmin) configs.push_back(config_at_walk_index(n, true, i));
    std::sort(configs.begin(), configs.end());
    return {best, std::move(configs)};
}

} // namespace momc

#endif
