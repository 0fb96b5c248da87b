#pragma once

#include <vector>

#include "hpq/torus.hpp"

namespace hpq {

// Real polynomial, coefficients in ascending degree.
struct Polynomial {
    std::vector<double> c;

    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    int degree() const;  // -1 for the zero polynomial
    bool is_zero() const { return degree() < 0; }
    double eval(double x) const;
    Polynomial derivative() const;
    double leading() const;
};

// Checks the P-role invariants: even degree 2k, positive leading coefficient.
void validate_P(const Polynomial& P, int two_k);

// H_n(x, sigma^2) by the three-term recurrence
// H_{n+1} = x H_n - n sigma^2 H_{n-1}, H_0 = 1, H_1 = x.
double hermite(int n, double x, double sigma2);

// sigma_N^2 = E |pi_N U(x)|^2 under the rho0 sampler; equals
// (1/(4 pi^2)) * sum_{|n|_inf <= N} <n>^{-2}.
double sigma_N(const TorusSpec& spec);

// Taylor family q_h(x) = q^{(h)}(x)/h!, h = 1..deg q, so that
// q(x+y) = q(x) + sum_h q_h(x) y^h exactly in coefficients.
std::vector<Polynomial> taylor_shift(const Polynomial& q);

// Immutable Wick calculus context at fixed truncation: sigma_N^2 and the
// monomial coefficients of H_j(x, sigma^2) for j <= 2k.
class WickContext {
public:
    WickContext(const TorusSpec& spec, double sigma2_override = -1.0);

    const TorusSpec& spec() const { return spec_; }
    double sigma2() const { return sigma2_; }
    int max_degree() const { return spec_.two_k; }

    // H_j as a polynomial in x
    const Polynomial& hermite_poly(int j) const;

    // :q:(x) = sum_j q_j H_j(x, sigma^2) collapsed to one polynomial
    Polynomial wick_transform(const Polynomial& q) const;

private:
    TorusSpec spec_;
    double sigma2_;
    std::vector<Polynomial> herm_;
};

// Pointwise H_j(u(x), sigma_N^2) on the dealiased grid, projected to N.
SpectralField wick_power(const Torus& T, const SpectralField& u, int j, const WickContext& ctx);

// sum_j q_j * wick_power(u, j)
SpectralField wick_poly(const Torus& T, const Polynomial& q, const SpectralField& u, const WickContext& ctx);

// :q(u+v): evaluated through the Wick-Taylor expansion
// :q(u): + sum_{h>=1} :q_h(u): v^h, projected once at the end. Agrees with
// wick_poly(q, u+v, ctx) at the same sigma^2.
SpectralField wick_shift_expand(const Torus& T, const Polynomial& q, const SpectralField& u,
                                const SpectralField& v, const WickContext& ctx);

// integral over T^2 of :q(u): (exact for M >= deg(q)*N + 1)
double wick_integral(const Torus& T, const Polynomial& q, const SpectralField& u, const WickContext& ctx);

}  // namespace hpq
