#pragma once

// Serial reference implementations, kept independent of the FFT/OpenMP
// paths in hpq_core. Tests compare against these; tools/bench times them.

#include "hpq/torus.hpp"
#include "hpq/wick.hpp"

namespace hpq::ref {

// direct DFT synthesis u(x_j) = sum_n a(n) e^{i n.x_j}, O(B^2 M^2)
Grid dft_to_grid(const SpectralField& f, int M);

// direct analysis a(n) = (1/M^2) sum_j u(x_j) e^{-i n.x_j}
SpectralField dft_from_grid(const Grid& g, int N, int M);

// serial pointwise Wick evaluation (same math as wick_poly, no FFT)
Grid wick_eval_grid(const Polynomial& wick_coeffs, const Grid& u_grid);

// plain serial sums
double sum(const Grid& g);
double sum_pow(const Grid& g, int p);

}  // namespace hpq::ref
