#pragma once

#include <cmath>
#include <cstdint>

#include "latred/rational.hpp"

namespace latred {

// Deterministic stream: xoshiro256** seeded through splitmix64, so the same
// (seed, stream) pair replays bit-identically on any platform.  Integer draws
// use rejection sampling; nothing here depends on libc rand state.
class random_stream {
  public:
    explicit random_stream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        for (auto& word : s_) word = splitmix64(x);
        // All-zero state is invalid for xoshiro; splitmix64 cannot emit four
        // zeros in a row, so no explicit guard is needed.
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

    // Uniform in [0,1) with 53 random bits.
    double unit() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in {0, ..., m-1}, unbiased.
    std::uint64_t below(std::uint64_t m) {
        std::uint64_t threshold = (0 - m) % m;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % m;
        }
    }

    // Uniform in {0, ..., m-1} for big m, unbiased: samples ceil(bits/64)
    // words and rejects out-of-range values.
    bigint below_big(const bigint& m) {
        std::size_t bits = mpz_sizeinbase(m.get_mpz_t(), 2);
        std::size_t words = (bits + 63) / 64;
        for (;;) {
            bigint r = 0;
            for (std::size_t i = 0; i < words; ++i) {
                r <<= 64;
                bigint w;
                std::uint64_t v = next();
                mpz_import(w.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
                r |= w;
            }
            r >>= (64 * words - bits);
            if (r < m) return r;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
};

}  // namespace latred
