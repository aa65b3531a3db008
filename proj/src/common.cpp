#include "flatnf/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flatnf {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (n > 62) throw numeric_guard_error("binomial: degree cap exceeded (n > 62)");
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
    }
    return r;
}

namespace {
int g_threads = 0;
}

void set_thread_count(int n) {
    g_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

int thread_count() { return g_threads; }

}  // namespace flatnf
