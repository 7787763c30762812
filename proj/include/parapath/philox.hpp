#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace parapath {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output block is a pure function of (counter, key).
class Philox4x32
{
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
            const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    static constexpr Key key_from_seed(std::uint64_t seed) noexcept
    {
        return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
    }

    /// Standard normal from one block via Box-Muller (cosine branch).
    static double normal(const Counter& ctr, const Key& key) noexcept
    {
        const Counter out = block(ctr, key);
        const std::uint64_t a = (std::uint64_t(out[0]) << 32) | out[1];
        const std::uint64_t b = (std::uint64_t(out[2]) << 32) | out[3];
        constexpr double inv53 = 1.0 / 9007199254740992.0; // 2^-53
        const double u1 = double((a >> 11) + 1) * inv53;     // (0, 1]
        const double u2 = double(b >> 11) * inv53;           // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

} // namespace parapath
