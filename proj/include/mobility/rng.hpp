#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mobility {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). The output
// block is a pure function of (key, counter), so independent streams can be
// addressed directly instead of being split off a shared sequence.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Sequential draws from the stream identified by (seed, path, stream).
// Counter layout: word 0 = block index, word 1 = stream id, words 2-3 = path.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          path_(path) {}

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept {
        if (cursor_ == 2) {
            refill();
        }
        const std::uint64_t bits = words_[cursor_++];
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by Box-Muller; the paired variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

private:
    void refill() noexcept {
        const auto out = Philox4x32::block(
            {block_++, stream_, static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)}, key_);
        words_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        words_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        cursor_ = 0;
    }

    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t path_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> words_{};
    int cursor_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; derives unrelated seeds from one user seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace mobility
