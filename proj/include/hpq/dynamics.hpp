#pragma once

#include <stdexcept>
#include <vector>

#include "hpq/gibbs.hpp"
#include "hpq/rng.hpp"
#include "hpq/torus.hpp"
#include "hpq/wick.hpp"

namespace hpq {

struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};
struct Sym2 {
    double c11 = 0, c12 = 0, c22 = 0;
};
struct Low2 {  // lower Cholesky factor
    double l11 = 0, l21 = 0, l22 = 0;
};

// matrix 2-norm
double mat2_norm(const Mat2& m);

// e^{tA} for A = [[0,1],[-jbsq,-1]], jbsq = <n>^2, in closed trig form
Mat2 propagator_matrix(double jbsq, double t);

// J(t) = int_0^t e^{sA} ds = A^{-1}(e^{tA} - I)
Mat2 propagator_integral(double jbsq, double t);

// C(t) = 2 int_0^t e^{sA} e2 e2^T e^{sA^T} ds in closed trig form
// (noise normalization 2, i.e. the abstract per-mode covariance of the
// stochastic convolution driven by sqrt(2) unit white noise)
Sym2 stochastic_convolution_cov(double jbsq, double t);

Sym2 stationary_cov(double jbsq);  // diag(1/jbsq, 1)

// Per-mode exact one-step law of the linear damped wave OU system.
// Covariances are stored in the abstract normalization; the physical noise
// scaling (1/(8 pi^2) per real component on conjugate mode pairs,
// 1/(4 pi^2) on the DC mode) is applied when drawing.
struct ModePropagator {
    double dt = 0.0;
    std::vector<Mat2> E;
    std::vector<Mat2> J;
    std::vector<Sym2> Q;
    std::vector<Low2> L;
    std::vector<std::size_t> half_modes;  // canonical draw order
    std::size_t dc_index = 0;
};

ModePropagator build_propagator(const Torus& T, double dt);

// One step of per-mode Gaussian innovations, in the canonical draw order.
struct NoiseDraw {
    std::vector<cplx> nu;   // position component per mode (mirrors implied)
    std::vector<cplx> nut;  // velocity component per mode
};

NoiseDraw draw_noise(const Torus& T, const ModePropagator& prop, RngStream& rng);

// pair <- S(t) pair
PairField apply_S(const Torus& T, const PairField& x, double t);

// one exponential-Euler update y = E x + J (0, force) + noise; force and
// noise may each be null
PairField propagate_pair(const Torus& T, const PairField& x, const ModePropagator& prop,
                         const SpectralField* force, const NoiseDraw* noise);

// exact one-step law of the linear equation; if noise is null, fresh
// innovations are drawn from rng
PairField ou_step(const Torus& T, const PairField& x, const ModePropagator& prop, RngStream& rng,
                  const NoiseDraw* noise = nullptr);

// exponential Euler step for the full equation: exact linear/noise part,
// nonlinearity -:p(u): frozen at the step start. extra, when present, is an
// additional drift on the velocity equation (the sqrt(2) h of a Girsanov
// shift): force = -:p(u): + sqrt(2) extra.
PairField sdnlw_step(const Torus& T, const PairField& x, const ModePropagator& prop,
                     const WickContext& ctx, const Polynomial& p, RngStream& rng,
                     const NoiseDraw* noise = nullptr, const SpectralField* extra = nullptr);

// parabolic cross-check integrator: exact per-mode OU factor for
// u_t = -(1-Delta)u + sqrt(2) xi, explicit Wick drift
SpectralField sqe_step(const Torus& T, const SpectralField& u, double dt, const WickContext& ctx,
                       const Polynomial& p, RngStream& rng);

// diagnostic energy a_{2k}/(2k) int u^{2k} + (1/2) int |grad u|^2 + u^2 + u_t^2
double energy(const Torus& T, const Polynomial& P, const PairField& x);

struct ObservableRecord {
    double t = 0;
    double energy = 0;
    double wick_mass = 0;        // int :u^2:
    double p_hminus_eps = 0;     // ||:p(u):||_{H^{-eps}}
    double sob_minus_eps = 0;    // ||(u,u_t)||_{H^{-eps}}
    double sob_one_minus_eps = 0;
};

ObservableRecord observe(const Torus& T, const Polynomial& P, const Polynomial& p,
                         const WickContext& ctx, const PairField& x, double t);

class BlowupError : public std::runtime_error {
public:
    explicit BlowupError(double time);
    double t;
};

struct SimParams {
    double T = 5.0;
    double dt = 1e-2;
    int obs_stride = 10;           // record every obs_stride steps
    double blowup_threshold = 1e8; // on sobolev(pair, -eps)
    std::vector<double> dump_times;  // snapshot the state at these times
};

struct Trajectory {
    std::vector<ObservableRecord> obs;
    std::vector<std::pair<double, PairField>> dumps;
    PairField final_state;
};

Trajectory simulate(const Torus& T, const ModePropagator& prop, const WickContext& ctx,
                    const Polynomial& P, const Polynomial& p, const PairField& x0,
                    const SimParams& sim, RngStream rng);

// Da Prato-Debussche split along one noise path: X solves the linear
// equation, v the remainder equation driven by :p(X+v):; u is stepped
// independently with the same innovations as a consistency probe.
struct DpdResult {
    std::vector<double> times;
    std::vector<double> sob_X;  // sobolev(X, 1-eps)
    std::vector<double> sob_v;  // sobolev(v, 1-eps)
    double max_split_residual = 0.0;  // sup_t ||u - (X+v)||_{H^{-eps}}
    PairField u_final, X_final, v_final;
};

DpdResult dpd_split(const Torus& T, const ModePropagator& prop, const WickContext& ctx,
                    const Polynomial& p, const PairField& x0, const SimParams& sim, RngStream rng);

}  // namespace hpq
