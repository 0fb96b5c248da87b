#include "hpq/parallel.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hpq {

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

double deterministic_sum(std::ptrdiff_t n, const std::function<double(std::ptrdiff_t)>& term) {
    if (n <= 0) return 0.0;
    constexpr std::ptrdiff_t kChunks = 64;
    const std::ptrdiff_t nchunk = n < kChunks ? n : kChunks;
    const std::ptrdiff_t len = (n + nchunk - 1) / nchunk;
    std::vector<double> partial(static_cast<std::size_t>(nchunk), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunk; ++c) {
        const std::ptrdiff_t lo = c * len;
        const std::ptrdiff_t hi = lo + len < n ? lo + len : n;
        double acc = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) acc += term(i);
        partial[static_cast<std::size_t>(c)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace hpq
