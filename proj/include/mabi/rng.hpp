#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

namespace mabi {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based splitmix64 generator. Output depends only on the seed, so
// trajectories are reproducible across platforms and thread schedules.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix64(state_);
    }

    // Uniform in [0,1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0)
            throw std::invalid_argument("Rng::next_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % n;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    // Inverse-CDF draw from a probability vector; consumes exactly one uniform.
    int categorical(std::span<const double> probs) {
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t a = 0; a < probs.size(); ++a) {
            acc += probs[a];
            if (u < acc)
                return static_cast<int>(a);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::uint64_t state_;
};

// Derives the seed of a named stream from the master seed. Streams with
// distinct labels or indices behave as independent generators, so e.g. the
// environment draw of instance i does not move when the policy changes.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t i = 0, std::uint64_t j = 0) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    h = mix64(h + 0x9e3779b97f4a7c15ull * (i + 1));
    h = mix64(h + 0x9e3779b97f4a7c15ull * (j + 1));
    return h;
}

inline Rng make_stream(std::uint64_t master, std::string_view label,
                       std::uint64_t i = 0, std::uint64_t j = 0) {
    return Rng(stream_seed(master, label, i, j));
}

} // namespace mabi
