#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace snmpp {

// splitmix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Pure seed derivation for named sub-streams (epochs, validation, init, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ salt;
    return splitmix64(s);
}

// Seedable, splittable RNG. The engine is std::mt19937_64 (bit-exact across
// platforms by the standard) and every distribution transform is written out
// explicitly, so sampled streams are reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derives the stream for (seed, index). Streams for distinct indices are
    // independent of the order in which they are created.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ index;
        std::uint64_t b = splitmix64(s);
        return Rng(b);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Exponential with the given rate; strictly positive except for the
    // measure-zero draw u == 0.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    // Box-Muller without a cached spare so the stream position is a simple
    // function of the number of calls.
    double normal(double mean, double sd) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(6.283185307179586477 * u2);
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift rejection-free mapping; bias < 2^-64, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace snmpp
