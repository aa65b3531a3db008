#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flatnf {

using cplx = std::complex<double>;

inline double sq(double x) { return x * x; }

// Euclidean norm of an integer lattice site.
inline double site_norm(std::span<const int> n) {
    double s = 0;
    for (int c : n) s += double(c) * double(c);
    return std::sqrt(s);
}

// Sobolev weight <n> = (1 + |n|^2)^{1/2}.
inline double site_bracket(std::span<const int> n) {
    double s = 1;
    for (int c : n) s += double(c) * double(c);
    return std::sqrt(s);
}

// Compensated accumulator for long sums of observables.
struct KahanSum {
    double s = 0, c = 0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// Exact binomial coefficients; throws instead of overflowing.
std::uint64_t binomial(int n, int k);

// Worker count used by the parallel kernels. 0 = library default.
void set_thread_count(int n);
int thread_count();

struct enumeration_cap_error : std::runtime_error {
    double projected;
    enumeration_cap_error(const std::string& what, double proj)
        : std::runtime_error(what), projected(proj) {}
};

struct numeric_guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace flatnf
