#pragma once

#include "hpq/rng.hpp"
#include "hpq/torus.hpp"
#include "hpq/wick.hpp"

namespace hpq {

// Draws from the Gaussian reference rho0 = N(0, (1-Delta)^{-1}) x N(0, 1):
// u_hat(n) = g_n / (2 pi <n>), ut_hat(n) = h_n / (2 pi), with g, h standard
// complex Gaussians on a half lattice and the Hermitian constraint
// g_{-n} = conj(g_n); the n = 0 coefficients are real standard / (2 pi).
SpectralField sample_rho0_u(const Torus& T, RngStream& rng);
SpectralField sample_rho0_ut(const Torus& T, RngStream& rng);
PairField sample_rho0(const Torus& T, RngStream& rng);

// V(u) = integral of :P(u):, the exponent of the Gibbs density F_P = e^{-V}
double gibbs_potential(const Torus& T, const Polynomial& P, const SpectralField& u,
                       const WickContext& ctx);

// sqrt(1 - beta^2) u + beta xi; preserves rho0 when xi ~ rho0
SpectralField pcn_proposal(const SpectralField& u, const SpectralField& xi, double beta);

struct GibbsChainState {
    PairField current;
    double potential = 0.0;
    double beta = 0.25;
    long accept_count = 0;
    long step_count = 0;
};

// pCN chain targeting rho_N = e^{-V} rho0. The proposal preserves rho0, so
// the acceptance ratio only sees the Wick potential. On acceptance the
// velocity marginal is refreshed from rho0 (the density does not touch it).
class GibbsChain {
public:
    GibbsChain(const Torus& T, const WickContext& ctx, Polynomial P, double beta0, RngStream rng);

    void step();
    // Robbins-Monro tuning of beta toward the target acceptance rate;
    // call during burn-in only, then leave beta frozen.
    void step_tuned(double target_accept);

    const GibbsChainState& state() const { return state_; }
    double acceptance_rate() const;
    void reset_counters();

private:
    const Torus& T_;
    const WickContext& ctx_;
    Polynomial P_;
    GibbsChainState state_;
    RngStream rng_;
    double log_beta_;
    long tune_count_ = 0;
};

}  // namespace hpq
