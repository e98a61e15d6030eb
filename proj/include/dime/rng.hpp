#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

// Self-contained deterministic randomness. std::mt19937_64 would be
// reproducible too, but the standard distributions are not pinned across
// library implementations; everything here produces the same bytes on any
// conforming compiler, which is what the output-determinism contract needs.
namespace dime {

// SplitMix64 finalizer. Also used as the stream-derivation hash.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derive an independent child seed from (seed, tag). Used for permutation k,
// data column j, optimizer step t, grid cell c, ...
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag));
}

// FNV-1a over a string literal; purpose tags ("staircase.batch", ...) are
// hashed so differently-named streams can never collide at equal indices.
constexpr std::uint64_t purpose_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// derive_stream specialized for named purposes: one hop for the purpose,
// one for the index within it.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::string_view purpose,
                                      std::uint64_t index) {
    return derive_stream(derive_stream(seed, purpose_tag(purpose)), index);
}

// xoshiro256** (Blackman/Vigna), seeded via SplitMix64 expansion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, bound). Lemire's multiply-reject.
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t x = static_cast<std::uint32_t>(next_u64() >> 32);
        std::uint64_t m = static_cast<std::uint64_t>(x) * bound;
        auto lo = static_cast<std::uint32_t>(m);
        if (lo < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (lo < threshold) {
                x = static_cast<std::uint32_t>(next_u64() >> 32);
                m = static_cast<std::uint64_t>(x) * bound;
                lo = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    // Standard normal via Box-Muller; second variate cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dime
