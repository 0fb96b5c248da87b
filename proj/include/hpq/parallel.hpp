#pragma once

#include <cstddef>
#include <functional>

namespace hpq {

// Thread-count control for the OpenMP kernels. 0 = library default.
void set_threads(int n);
int max_threads();

// Elementwise parallel loop. Bodies must be independent per index.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body);

// Sum f(i) for i in [0,n) with a fixed chunk decomposition, so the result
// is bit-identical for every thread count. Chunks are summed left to right.
double deterministic_sum(std::ptrdiff_t n, const std::function<double(std::ptrdiff_t)>& term);

}  // namespace hpq
