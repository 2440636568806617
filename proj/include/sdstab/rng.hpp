#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sdstab {

/// Philox4x32-10 counter-based generator. Streams are cheap: every
/// (seed, stream) pair is an independent sequence, so trajectory i can own
/// stream i with no shared state and bit-reproducible parallel runs.
class PhiloxRng {
  public:
    PhiloxRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::uint32_t next_u32() {
        if (idx_ == 4) {
            block_ = philox_block(counter_++);
            idx_ = 0;
        }
        return block_[idx_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    /// Exponential with the given rate (> 0).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// One keyed block, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

  private:
    static std::array<std::uint32_t, 4> single_round(const std::array<std::uint32_t, 4>& ctr,
                                                     const std::array<std::uint32_t, 2>& key) {
        const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
        const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    std::array<std::uint32_t, 4> philox_block(std::uint64_t block_index) const {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        return philox4x32(ctr, key_);
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace sdstab
