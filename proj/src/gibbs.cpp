#include "hpq/gibbs.hpp"

#include <cmath>

namespace hpq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfSqrt = 0.70710678118654752440084436210485;  // 1/sqrt(2)

// fill the half lattice (n1 > 0, or n1 == 0 and n2 > 0) plus DC, mirror rest
template <typename PerMode, typename Dc>
void fill_hermitian(SpectralField& f, PerMode per_mode, Dc dc) {
    const int N = f.N;
    f.at(0, 0) = cplx(dc(), 0.0);
    for (int n1 = 0; n1 <= N; ++n1) {
        for (int n2 = -N; n2 <= N; ++n2) {
            if (n1 == 0 && n2 <= 0) continue;
            const cplx v = per_mode(n1, n2);
            f.at(n1, n2) = v;
            f.at(-n1, -n2) = std::conj(v);
        }
    }
}
}  // namespace

SpectralField sample_rho0_u(const Torus& T, RngStream& rng) {
    SpectralField f(T.N());
    fill_hermitian(
        f,
        [&](int n1, int n2) {
            const double jb = std::sqrt(1.0 + double(n1) * n1 + double(n2) * n2);
            const cplx g(rng.next_normal() * kHalfSqrt, rng.next_normal() * kHalfSqrt);
            return g / (kTwoPi * jb);
        },
        [&]() { return rng.next_normal() / kTwoPi; });
    return f;
}

SpectralField sample_rho0_ut(const Torus& T, RngStream& rng) {
    SpectralField f(T.N());
    fill_hermitian(
        f,
        [&](int, int) {
            const cplx g(rng.next_normal() * kHalfSqrt, rng.next_normal() * kHalfSqrt);
            return g / kTwoPi;
        },
        [&]() { return rng.next_normal() / kTwoPi; });
    return f;
}

PairField sample_rho0(const Torus& T, RngStream& rng) {
    PairField x(T.N());
    x.u = sample_rho0_u(T, rng);
    x.ut = sample_rho0_ut(T, rng);
    return x;
}

double gibbs_potential(const Torus& T, const Polynomial& P, const SpectralField& u,
                       const WickContext& ctx) {
    return wick_integral(T, P, u, ctx);
}

SpectralField pcn_proposal(const SpectralField& u, const SpectralField& xi, double beta) {
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("pcn_proposal: beta in [0,1]");
    SpectralField out = u;
    scale(out, std::sqrt(1.0 - beta * beta));
    axpy(out, beta, xi);
    return out;
}

GibbsChain::GibbsChain(const Torus& T, const WickContext& ctx, Polynomial P, double beta0,
                       RngStream rng)
    : T_(T), ctx_(ctx), P_(std::move(P)), rng_(rng) {
    if (!(beta0 > 0.0 && beta0 <= 1.0)) throw std::invalid_argument("GibbsChain: beta0 in (0,1]");
    state_.current = sample_rho0(T_, rng_);
    state_.potential = gibbs_potential(T_, P_, state_.current.u, ctx_);
    state_.beta = beta0;
    log_beta_ = std::log(beta0);
}

void GibbsChain::step() {
    const SpectralField xi = sample_rho0_u(T_, rng_);
    SpectralField prop = pcn_proposal(state_.current.u, xi, state_.beta);
    const double pot_prop = gibbs_potential(T_, P_, prop, ctx_);
    const double log_alpha = state_.potential - pot_prop;
    const double uu = rng_.next_uniform();
    ++state_.step_count;
    if (std::log(uu) < log_alpha) {
        state_.current.u = std::move(prop);
        state_.current.ut = sample_rho0_ut(T_, rng_);
        state_.potential = pot_prop;
        ++state_.accept_count;
    }
}

void GibbsChain::step_tuned(double target_accept) {
    const long before = state_.accept_count;
    step();
    const double acc = state_.accept_count > before ? 1.0 : 0.0;
    ++tune_count_;
    const double gamma = 1.0 / std::pow(static_cast<double>(tune_count_) + 10.0, 0.6);
    log_beta_ += gamma * (acc - target_accept);
    if (log_beta_ > 0.0) log_beta_ = 0.0;      // beta <= 1
    if (log_beta_ < -12.0) log_beta_ = -12.0;  // keep the proposal alive
    state_.beta = std::exp(log_beta_);
}

double GibbsChain::acceptance_rate() const {
    return state_.step_count == 0 ? 0.0
                                  : static_cast<double>(state_.accept_count) / static_cast<double>(state_.step_count);
}

void GibbsChain::reset_counters() {
    state_.accept_count = 0;
    state_.step_count = 0;
}

}  // namespace hpq
