#pragma once

#include <array>
#include <cstdint>

namespace icr {

/// SplitMix64 (Steele, Lea, Flood 2014). Used for seeding and for hashing seed tuples.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna). State is filled from SplitMix64(seed), so every
/// 64-bit seed, including 0, yields a valid non-zero state. Output is identical on every
/// platform: only 64-bit unsigned arithmetic is involved.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed)
    {
        SplitMix64 sm(seed);
        for (auto& word : s_) {
            word = sm.next();
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
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

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

/// Derives an independent stream seed from a tuple of counters:
/// h0 = master, h_{i+1} = splitmix(h_i ^ splitmix(part_i)).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    auto fin = [](std::uint64_t v) { return SplitMix64(v).next(); };
    std::uint64_t h = fin(master);
    h = fin(h ^ fin(a));
    h = fin(h ^ fin(b + 0x632be59bd9b4e019ULL));
    return h;
}

}  // namespace icr
