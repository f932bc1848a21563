#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace newsbench {

// All randomness in the project flows from one master seed. Component seeds
// are derived with the two functions below; the exact formulas are normative
// so that parallel and sequential execution agree.
//
//   splitmix64(x):   x += 0x9E3779B97F4A7C15; x = (x ^ x>>30) * 0xBF58476D1CE4E5B9;
//                    x = (x ^ x>>27) * 0x94D049BB133111EB; return x ^ x>>31
//   fnv1a64(s):      h = 0xCBF29CE484222325; for each byte: h ^= b, h *= 0x100000001B3
//   derive(seed, tag)    = splitmix64(seed ^ fnv1a64(tag))
//   derive(seed, index)  = splitmix64(seed + 0x9E3779B97F4A7C15 * (index + 1))

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

// Deterministic generator used everywhere instead of <random> distributions,
// whose outputs are implementation-defined. Core stream is splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, n). n must be > 0. Modulo bias is negligible for the
    // small ranges used here and keeps the mapping platform-stable.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Box-Muller; one value per call, the mate is discarded.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace newsbench
