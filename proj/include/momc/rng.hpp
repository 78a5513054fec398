#ifndef MOMC_RNG_HPP
#define MOMC_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace momc::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every 128-bit output block is a pure function of (key, counter),
/// which is what makes sampler results independent of how work is scheduled
/// across threads.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                              std::array<std::uint32_t, 4> ctr) noexcept
    {
        auto k0 = static_cast<std::uint32_t>(key);
        auto k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
                   static_cast<std::uint32_t>(p0)};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }
};

/// SplitMix64 finalizer; bijective on u64.
inline std::uint64_t mix64(std::uint64_t z) noexcept
{
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Derives an independent Philox key from a user seed and a context word
/// (e.g. the run index, or a fixed tag for instance generation).
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t context) noexcept
{
    return mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(context * 0x9E3779B97F4A7C15ull + 1);
}

namespace detail {

// Marsaglia-Tsang ziggurat tables for the standard normal (128 layers).
struct ZigguratTables {
    std::uint32_t kn[128];
    double wn[128];
    double fn[128];

    ZigguratTables() noexcept
    {
        const double m1 = 2147483648.0;
        const double vn = 9.91256303526217e-3;
        double dn = 3.442619855899;
        double tn = dn;
        const double q = vn / std::exp(-0.5 * dn * dn);

        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

inline const ZigguratTables& ziggurat() noexcept
{
    static const ZigguratTables tables;
    return tables;
}

} // namespace detail

/// A deterministic random stream addressed by a 96-bit stream id.
///
/// The id words land in Philox counter words 1..3; word 0 is the running
/// block counter, so a stream yields up to 2^32 blocks of 128 bits. Draws are
/// consumed sequentially within a stream; distinct ids give independent
/// streams regardless of interleaving.
class Stream {
public:
    Stream(std::uint64_t key, std::uint32_t id_hi, std::uint32_t id_mid,
           std::uint32_t id_lo) noexcept
        : key_(key), ctr_{0u, id_lo, id_mid, id_hi}
    {
    }

    std::uint32_t next_u32() noexcept
    {
        if (pos_ == 4) {
            buf_ = Philox4x32::block(key_, ctr_);
            ++ctr_[0];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1).
    double next_u01() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_u01_open() noexcept
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform double in [-half_width, +half_width).
    double next_symmetric(double half_width) noexcept
    {
        return half_width * (2.0 * next_u01() - 1.0);
    }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) noexcept
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Standard normal draw via the 128-layer ziggurat.
    double next_normal() noexcept
    {
        const auto& z = detail::ziggurat();
        for (;;) {
            const auto hz = static_cast<std::int32_t>(next_u32());
            const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
            const std::uint32_t mag =
                hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
                       : static_cast<std::uint32_t>(hz);
            if (mag < z.kn[iz]) {
                return hz * z.wn[iz];
            }
            if (iz == 0) {
                // Tail beyond the base layer.
                const double r = 3.442619855899;
                for (;;) {
                    const double x = -std::log(next_u01_open()) / r;
                    const double y = -std::log(next_u01_open());
                    if (y + y >= x * x) {
                        return hz > 0 ? r + x : -(r + x);
                    }
                }
            }
            const double x = hz * z.wn[iz];
            if (z.fn[iz] + next_u01() * (z.fn[iz - 1] - z.fn[iz]) <
                std::exp(-0.5 * x * x)) {
                return x;
            }
        }
    }

private:
    std::uint64_t key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Fixed stream tags; packed into the top bits of the low id word so a tag
/// plus a 26-bit step index share one u32.
enum class Tag : std::uint32_t {
    init_x = 1,
    init_y = 2,
    step_noise = 3,
    edge_presence = 4,
    edge_weight = 5,
    correlation_noise = 6,
    probe_pool = 7,
    reference_sample = 8,
    monte_carlo = 9,
};

inline constexpr std::uint32_t tag_word(Tag tag, std::uint32_t step = 0) noexcept
{
    return (static_cast<std::uint32_t>(tag) << 26) | (step & 0x03FFFFFFu);
}

} // namespace momc::rng

#endif
