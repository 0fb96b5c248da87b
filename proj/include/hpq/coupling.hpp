#pragma once

#include <limits>
#include <optional>

#include "hpq/dynamics.hpp"

namespace hpq {

// delta(t) = (A * sup_wsp)^{-4/eps}, where sup_wsp is already
// sup_h ||:p_h(Phi_t):||_{W^{-eps/2,4}} ||v0||^{h-1}. Returns +inf when
// sup_wsp == 0 (vanishing expansion fields; no truncation needed).
double delta_of_t(double sup_wsp, double v0_norm, double A, double eps);

struct CouplingParams {
    double T = 10.0;
    double dt = 1e-2;
    double A = 1.0;
    double M_stop = std::numeric_limits<double>::infinity();  // cm_energy cap M^2
    int obs_stride = 10;
    double blowup_threshold = 1e8;
    bool record_h = false;  // keep the per-step shift fields (for replay tests)
};

// Shifted-trajectory state along one noise path. The stochastic exponential
// is reconstructed as exp(-cm_energy/2 + ito_integral) at all times.
struct CouplingRecord {
    std::vector<double> times;
    std::vector<double> w_norm;             // sobolev(w, 1-eps)
    std::vector<double> delta_history;
    std::vector<double> exp_mart_history;
    std::vector<double> cm_history;
    std::vector<double> ito_history;
    std::vector<double> shifted_wick_mass;  // int :u^2: along ref + w

    double cm_energy = 0.0;
    double ito_integral = 0.0;
    double exp_mart = 1.0;
    std::optional<double> tau_hit;
    double A = 0.0;
    double v0_norm = 0.0;

    bool finished = true;            // false if w blew up
    double blowup_time = 0.0;
    bool envelope_ok = true;         // w_norm <= v0_norm e^{-t/4} at all records
    double max_envelope_ratio = 0.0;

    PairField ref_final, w_final;
    std::vector<SpectralField> h_fields;  // per step when record_h
};

// Advance the coupled system (reference trajectory, difference w, shift h)
// over [0, T]. The reference starts at u0 and is driven by the stream; w
// starts at v0. h is frozen to zero once cm_energy would cross M_stop^2.
CouplingRecord run_coupling_path(const Torus& T, const WickContext& ctx, const Polynomial& p,
                                 const PairField& u0, const PairField& v0,
                                 const CouplingParams& params, RngStream rng);

struct EscalationResult {
    CouplingRecord record;
    double A_final = 0.0;
    int doublings = 0;
    bool contracted = false;
};

// Doubling auto-escalation of the damping constant A: the same noise path
// is replayed until the pathwise envelope holds or the cap is reached.
EscalationResult run_coupling_escalating(const Torus& T, const WickContext& ctx,
                                         const Polynomial& p, const PairField& u0,
                                         const PairField& v0, CouplingParams params,
                                         const RngStream& rng, int max_doublings = 12);

struct GirsanovReport {
    double mean_weight = 0.0;  // empirical E[E(h^M)]
    double se_weight = 0.0;
    bool mean_one_ok = false;
    double reweighted_mean = 0.0;
    double reweighted_se = 0.0;
    double direct_mean = 0.0;
    double direct_se = 0.0;
    bool agree_ok = false;
    double ess = 0.0;
    bool degenerate = false;  // effective sample size < 10
};

// records: shifted paths with common (u0, v0, M); direct_F: unweighted
// samples of F along independent plain paths from u0 + v0; F is evaluated
// on the shifted paths as sigmoid(shifted_wick_mass) at the record closest
// to t_eval.
GirsanovReport girsanov_check(const std::vector<CouplingRecord>& records,
                              const std::vector<double>& direct_F, double t_eval);

double sigmoid(double x);

// A shift direction in H^{1-eps} x H^{-eps}: a rho0 draw smoothed by one
// Bessel order and normalized to the requested pair norm.
PairField smooth_shift_field(const Torus& T, double norm, RngStream rng);

// sigmoid(int :u^2:) at time t_eval along independent plain trajectories
// started from x0, one stream per path
std::vector<double> direct_observable_samples(const Torus& T, const WickContext& ctx,
                                              const Polynomial& p, const PairField& x0,
                                              double t_eval, double dt, int paths,
                                              std::uint64_t seed);

struct Eps0Report {
    double eta_estimate = 1.0;  // 1 - (1/2) sup_eta eta inf_t (q0 + q1 - 1)
    double best_eta = 0.0;
    double continuity_estimate = 0.0;  // (1/2) sup_t E[E 1_{tau<t}] + E|E 1_{tau>=t} - 1|
};

// records1 empty means v1 = 0 (unit weights). The eta formula floors at 1/2
// by construction; the continuity estimate is the quantity that vanishes as
// ||v0|| -> 0.
Eps0Report epsilon0_estimate(const std::vector<CouplingRecord>& records0,
                             const std::vector<CouplingRecord>& records1,
                             const std::vector<double>& eta_grid);

}  // namespace hpq
