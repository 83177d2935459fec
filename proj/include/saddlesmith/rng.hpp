#ifndef SADDLESMITH_RNG_HPP
#define SADDLESMITH_RNG_HPP

#include <complex>
#include <cstdint>

namespace saddlesmith {

// splitmix64: tiny, portable, and identical across platforms — reports produced
// from a fixed seed must be byte-identical.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    std::complex<double> complex_in_disk(double radius) {
        // rejection-free: sqrt for uniform area density
        double r = radius * std::sqrt(next_double());
        double th = uniform(0.0, 6.283185307179586476925286766559);
        return std::polar(r, th);
    }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

} // namespace saddlesmith

#endif
