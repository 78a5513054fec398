#ifndef MOMC_WEIGHTS_HPP
#define MOMC_WEIGHTS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace momc {

inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

/// A point of the simplex lattice: components c_k = numerator_k / H with
/// numerators summing to H. Stored exactly as integers.
class WeightVector {
public:
    WeightVector(std::vector<int> numerators, int resolution)
        : num_(std::move(numerators)), h_(resolution)
    {
        if (h_ < 1) throw std::invalid_argument("lattice resolution must be positive");
        long long sum = 0;
        for (const int v : num_) {
            if (v < 0) throw std::invalid_argument("weight numerators must be non-negative");
            sum += v;
        }
        if (num_.size() < 1 || sum != h_) {
            throw std::invalid_argument("weight numerators must sum to the resolution");
        }
    }

    int size() const noexcept { return static_cast<int>(num_.size()); }
    int resolution() const noexcept { return h_; }
    int numerator(int k) const noexcept { return num_[static_cast<std::size_t>(k)]; }
    double operator[](int k) const noexcept
    {
        return static_cast<double>(num_[static_cast<std::size_t>(k)]) / h_;
    }

    std::vector<double> components() const
    {
        std::vector<double> c(num_.size());
        for (std::size_t k = 0; k < num_.size(); ++k) c[k] = static_cast<double>(num_[k]) / h_;
        return c;
    }

    bool is_interior() const noexcept
    {
        for (const int v : num_) {
            if (v == 0) return false;
        }
        return true;
    }

    friend bool operator==(const WeightVector& a, const WeightVector& b) = default;

private:
    std::vector<int> num_;
    int h_;
};

/// All lattice points with K components in {0, 1/H, ..., 1} summing to 1,
/// ordered lexicographically descending in the leading components.
/// |result| == C(H+K-1, K-1).
inline std::vector<WeightVector> das_dennis(int k, int h)
{
    if (k < 2) throw std::invalid_argument("lattice needs at least two objectives");
    if (h < 1) throw std::invalid_argument("lattice resolution must be positive");

    std::vector<WeightVector> out;
    out.reserve(binomial(h + k - 1, k - 1));
    std::vector<int> num(static_cast<std::size_t>(k), 0);
    const auto recurse = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == k - 1) {
            num[static_cast<std::size_t>(pos)] = remaining;
            out.emplace_back(num, h);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            num[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    recurse(recurse, 0, h);
    return out;
}

/// Strictly positive lattice points (true simplex interior).
/// For a full das_dennis(K, H) input, |result| == C(H-1, K-1).
inline std::vector<WeightVector> interior_filter(const std::vector<WeightVector>& lattice)
{
    std::vector<WeightVector> out;
    for (const auto& w : lattice) {
        if (w.is_interior()) out.push_back(w);
    }
    return out;
}

/// Smallest resolution H whose interior lattice has at least `count` points.
inline int resolution_for_interior_count(int k, int count)
{
    if (k < 2 || count < 1) throw std::invalid_argument("need k >= 2 and count >= 1");
    for (int h = k; h < 100000; ++h) {
        if (binomial(h - 1, k - 1) >= static_cast<std::uint64_t>(count)) return h;
    }
    throw std::invalid_argument("requested interior count is out of range");
}

/// One vector per row, components as exact H-denominated fractions in decimal.
inline void save_weights_csv(const std::vector<WeightVector>& lattice,
                             const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& w : lattice) {
        for (int k = 0; k < w.size(); ++k) {
            if (k) out << ',';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", w[k]);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace momc

#endif
