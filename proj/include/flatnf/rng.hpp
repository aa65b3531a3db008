#pragma once

#include <cmath>
#include <cstdint>

#include "flatnf/common.hpp"

namespace flatnf {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel sampling stays reproducible
// regardless of the worker schedule.
struct CounterRng {
    std::uint64_t seed;

    explicit CounterRng(std::uint64_t s) : seed(s) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t word(std::uint64_t stream, std::uint64_t counter) const {
        return mix64(mix64(seed ^ (0x853c49e6748fea9bULL * stream)) + counter);
    }

    // uniform in (0,1)
    double u01(std::uint64_t stream, std::uint64_t counter) const {
        return (double(word(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform in (-1,1)
    double sym(std::uint64_t stream, std::uint64_t counter) const {
        return 2.0 * u01(stream, counter) - 1.0;
    }

    // standard normal (Box-Muller, consumes counters 2c and 2c+1)
    double gauss(std::uint64_t stream, std::uint64_t counter) const {
        double u = u01(stream, 2 * counter);
        double v = u01(stream, 2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

    cplx gauss_c(std::uint64_t stream, std::uint64_t counter) const {
        double u = u01(stream, 2 * counter);
        double v = u01(stream, 2 * counter + 1);
        double r = std::sqrt(-std::log(u));
        return {r * std::cos(6.283185307179586476925286766559 * v),
                r * std::sin(6.283185307179586476925286766559 * v)};
    }
};

}  // namespace flatnf
