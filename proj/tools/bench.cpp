// Timing comparison between the production kernels (FFT-backed, OpenMP
// pointwise loops) and the serial reference implementations in hpq_ref.
// Usage: hpq_bench [N] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hpq/parallel.hpp"
#include "hpq/ref.hpp"
#include "hpq/rng.hpp"
#include "hpq/torus.hpp"
#include "hpq/wick.hpp"

using namespace hpq;

namespace {

SpectralField random_field(int N, std::uint64_t seed) {
    SpectralField f(N);
    RngStream rng(seed, 999, 0);
    for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            if (n1 == 0 && n2 < 0) continue;
            if (n1 == 0 && n2 == 0) {
                f.at(0, 0) = cplx(rng.next_normal(), 0.0);
                continue;
            }
            const cplx v(rng.next_normal(), rng.next_normal());
            f.at(n1, n2) = v;
            f.at(-n1, -n2) = std::conj(v);
        }
    return f;
}

template <typename F>
double time_ms(int repeats, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    const int N = argc > 1 ? std::atoi(argv[1]) : 16;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;
    TorusSpec spec;
    spec.N = N;
    Torus T(spec);
    const WickContext ctx(spec);
    const SpectralField f = random_field(N, 7);
    const Polynomial p({0, 0, 0, 1});
    const Polynomial wick_p = ctx.wick_transform(p);
    const Grid g = T.to_grid(f);

    std::printf("N=%d M=%d threads=%d repeats=%d\n", N, T.M(), max_threads(), repeats);
    std::printf("%-28s %12s %12s %8s\n", "kernel", "core [ms]", "serial [ms]", "speedup");

    double a, b;
    volatile double sink = 0.0;

    a = time_ms(repeats, [&] { sink = sink + T.to_grid(f, false)[0]; });
    b = time_ms(repeats > 4 ? repeats / 4 : 1, [&] { sink = sink + ref::dft_to_grid(f, T.M())[0]; });
    std::printf("%-28s %12.4f %12.4f %8.1f\n", "synthesis (coeff -> grid)", a, b, b / a);

    a = time_ms(repeats, [&] { sink = sink + T.from_grid(g).a[0].real(); });
    b = time_ms(repeats > 4 ? repeats / 4 : 1, [&] { sink = sink + ref::dft_from_grid(g, N, T.M()).a[0].real(); });
    std::printf("%-28s %12.4f %12.4f %8.1f\n", "analysis (grid -> coeff)", a, b, b / a);

    a = time_ms(repeats, [&] { sink = sink + wick_poly(T, p, f, ctx).a[0].real(); });
    b = time_ms(repeats, [&] {
        const Grid gg = ref::dft_to_grid(f, T.M());
        const Grid w = ref::wick_eval_grid(wick_p, gg);
        sink = sink + ref::dft_from_grid(w, N, T.M()).a[0].real();
    });
    std::printf("%-28s %12.4f %12.4f %8.1f\n", "wick nonlinearity", a, b, b / a);

    a = time_ms(repeats, [&] { sink = sink + l2_norm(T, f); });
    b = time_ms(repeats, [&] {
        double acc = 0.0;
        for (const cplx& c : f.a) acc += std::norm(c);
        sink = sink + std::sqrt(39.478417604357434475337963999505 * acc);
    });
    std::printf("%-28s %12.4f %12.4f %8.1f\n", "l2 norm reduction", a, b, b / a);

    (void)sink;
    return 0;
}
