#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace corrnet::rng {

// SplitMix64 finalizer (Steele, Lea & Flood). Advances `state` and returns
// the next output of the stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Splittable counter scheme: sub-stream `stream` of a master seed is a
// single SplitMix64 step of (master XOR golden-ratio * (stream+1)), so any
// realization of a run can be regenerated in isolation from (master, index)
// without replaying earlier draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ull * (stream + 1));
    return splitmix64(s);
}

// Two-level derivation: purpose tag first, then an index within the purpose.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index) {
    return derive_seed(derive_seed(master, purpose), index);
}

// mt19937_64 with pinned output mappings. The standard fixes the mt19937_64
// sequence but not the distribution algorithms, so uniform/gaussian/shuffle
// are implemented here to keep results identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1) with 53 random mantissa bits
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0,n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = eng_();
            if (r >= threshold) return r % n;
        }
    }

    // Box-Muller; consumes two uniforms per pair, caches the second value
    double gaussian(double mean, double stddev) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + stddev * cached_;
        }
        const double u1 = 1.0 - uniform01();  // (0,1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace corrnet::rng
