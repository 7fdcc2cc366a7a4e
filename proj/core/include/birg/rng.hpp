#pragma once

#include <array>
#include <cstdint>

namespace birg {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed-splitting rule used everywhere a run fans out into independent
// streams (one per Monte Carlo sample): child = splitmix64 chain keyed on
// master ^ (stream + 1).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (stream + 1));
    return splitmix64(s);
}

// xoshiro256++. Self-contained so that draws are reproducible across
// compilers and standard libraries (std::uniform_int_distribution is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n). Lemire multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bit() { return (next() >> 63) != 0; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_;
};

}  // namespace birg
