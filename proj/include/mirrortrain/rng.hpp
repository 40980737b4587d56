#pragma once

#include <cstdint>
#include <string_view>

namespace mirrortrain {

// Counter-based random source. Every draw is a pure function of
// (key, counter); keys are derived by hashing a root seed with stream tags
// (participant, purpose, trial, ...). Draws are therefore order-independent:
// any single trial or frame can be regenerated in isolation, and parallel
// generation cannot perturb results.
class RngKey {
public:
    RngKey() = default;
    explicit RngKey(std::uint64_t seed) : key_(mix(seed ^ kSeedSalt)) {}

    RngKey derive(std::uint64_t tag) const { return RngKey(combine(key_, tag), 0); }
    RngKey derive(std::uint64_t tag, std::uint64_t index) const {
        return RngKey(combine(combine(key_, tag), index), 0);
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix(key_ + (counter + 1) * kGamma);
    }

    // Uniform in the open interval (0, 1).
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; one value per counter.
    double gaussian(std::uint64_t counter) const;

    std::uint64_t raw() const { return key_; }

private:
    RngKey(std::uint64_t key, int) : key_(key) {}

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kSeedSalt = 0x6D69727274726E31ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
        std::uint64_t h = mix(a + kGamma * (b + 1));
        return mix(h ^ (b + kGamma));
    }

    std::uint64_t key_ = 0;
};

// Compile-time stream tags from short labels.
constexpr std::uint64_t rng_tag(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

}  // namespace mirrortrain
