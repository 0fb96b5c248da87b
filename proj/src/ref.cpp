#include "hpq/ref.hpp"

#include <cmath>

namespace hpq::ref {

Grid dft_to_grid(const SpectralField& f, int M) {
    const double twopi = 6.283185307179586476925286766559;
    Grid g(static_cast<std::size_t>(M) * M, 0.0);
    for (int j1 = 0; j1 < M; ++j1) {
        for (int j2 = 0; j2 < M; ++j2) {
            cplx acc(0.0, 0.0);
            for (int n1 = -f.N; n1 <= f.N; ++n1) {
                for (int n2 = -f.N; n2 <= f.N; ++n2) {
                    const double phase = twopi * (double(n1) * j1 + double(n2) * j2) / M;
                    acc += f.at(n1, n2) * cplx(std::cos(phase), std::sin(phase));
                }
            }
            g[static_cast<std::size_t>(j1) * M + j2] = acc.real();
        }
    }
    return g;
}

SpectralField dft_from_grid(const Grid& g, int N, int M) {
    const double twopi = 6.283185307179586476925286766559;
    SpectralField f(N);
    for (int n1 = -N; n1 <= N; ++n1) {
        for (int n2 = -N; n2 <= N; ++n2) {
            cplx acc(0.0, 0.0);
            for (int j1 = 0; j1 < M; ++j1) {
                for (int j2 = 0; j2 < M; ++j2) {
                    const double phase = -twopi * (double(n1) * j1 + double(n2) * j2) / M;
                    acc += g[static_cast<std::size_t>(j1) * M + j2] * cplx(std::cos(phase), std::sin(phase));
                }
            }
            f.at(n1, n2) = acc / (double(M) * M);
        }
    }
    return f;
}

Grid wick_eval_grid(const Polynomial& wick_coeffs, const Grid& u_grid) {
    Grid out(u_grid.size());
    for (std::size_t j = 0; j < u_grid.size(); ++j) out[j] = wick_coeffs.eval(u_grid[j]);
    return out;
}

double sum(const Grid& g) {
    double acc = 0.0;
    for (double v : g) acc += v;
    return acc;
}

double sum_pow(const Grid& g, int p) {
    double acc = 0.0;
    for (double v : g) acc += std::pow(v, p);
    return acc;
}

}  // namespace hpq::ref
