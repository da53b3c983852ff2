#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace dfaudit {

// Portable deterministic PRNG used everywhere randomness is needed so that
// splits, control draws and synthetic data are bit-identical across platforms
// and reproducible from a single integer seed. Outputs match the reference
// implementations of SplitMix64 and xoshiro256** (Blackman & Vigna).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    // Derives an independent stream from (seed, key...). Used to give every
    // (attribute, rep) pair its own stream so attribute-parallel evaluation
    // cannot change results.
    static Xoshiro256ss keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
        SplitMix64 sm(seed);
        std::uint64_t mixed = sm.next();
        for (std::uint64_t word : key) {
            SplitMix64 inner(mixed ^ (word + 0x9e3779b97f4a7c15ULL));
            mixed = inner.next();
        }
        return Xoshiro256ss(mixed);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n) via Lemire's multiply-shift with rejection.
    std::uint64_t bounded(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

// In-place Fisher-Yates shuffle (swap from the back, matching the classic
// algorithm statement so indices are reproducible given the stream).
template <typename T>
void shuffle(std::vector<T>& values, Xoshiro256ss& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(values[i - 1], values[j]);
    }
}

// Draws k distinct indices from [0, population) by partial Fisher-Yates over
// a caller-provided scratch vector (reused across draws to avoid churn).
inline void sample_without_replacement(std::size_t population, std::size_t k,
                                       Xoshiro256ss& rng,
                                       std::vector<std::uint32_t>& scratch,
                                       std::vector<std::uint32_t>& out) {
    scratch.resize(population);
    std::iota(scratch.begin(), scratch.end(), 0u);
    out.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(population - i));
        std::swap(scratch[i], scratch[j]);
        out[i] = scratch[i];
    }
}

inline void sample_with_replacement(std::size_t population, std::size_t k,
                                    Xoshiro256ss& rng,
                                    std::vector<std::uint32_t>& out) {
    out.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = static_cast<std::uint32_t>(rng.bounded(population));
    }
}

} // namespace dfaudit
