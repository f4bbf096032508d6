#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace discosde {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (key, counter).
struct Philox4x32 {
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block apply(Block ctr, Key key) noexcept {
        constexpr std::uint32_t kM0 = 0xD2511F53u;
        constexpr std::uint32_t kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u;
        constexpr std::uint32_t kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// Sequential view of a Philox stream keyed by (seed, stream). Streams with
/// different `stream` values are independent; the block counter runs in the
/// low 64 bits of the Philox counter.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Uniform in the open interval (0, 1), 53 random bits.
    double uniform() noexcept { return to_open_unit(next_u64()); }

    /// Standard normal via Box-Muller; normals are produced in pairs.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    std::uint64_t next_u64() noexcept {
        if (word_ == 2) refill();
        return words_[word_++];
    }

    static double to_open_unit(std::uint64_t bits) noexcept {
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() noexcept {
        const Philox4x32::Block ctr{static_cast<std::uint32_t>(block_),
                                    static_cast<std::uint32_t>(block_ >> 32),
                                    static_cast<std::uint32_t>(stream_),
                                    static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = Philox4x32::apply(ctr, key_);
        words_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        words_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        word_ = 0;
        ++block_;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> words_{};
    int word_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace discosde
