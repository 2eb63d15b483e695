#pragma once
// Counter-based generator: output i of a stream is a fixed hash of
// (key, i), so streams can be split off a master seed without shared state.

#include <cmath>
#include <cstdint>
#include <limits>

namespace torusma {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), ctr_(counter) {}

    // Independent stream number `index` derived from a master seed.
    static CounterRng stream(std::uint64_t master, std::uint64_t index) {
        return CounterRng(mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019ull)));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ ^ mix64(ctr_++)); }

    // uniform on [0,1) with 53 random bits
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace torusma
