#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpq/coupling.hpp"
#include "hpq/dynamics.hpp"
#include "hpq/gibbs.hpp"

namespace hpq {

// --- Gibbs invariance under the truncated flow ---------------------------

struct InvarianceConfig {
    TorusSpec spec;
    Polynomial P;
    double dt = 1e-2;
    double T = 5.0;
    int ensemble = 400;
    int burnin = 10000;
    int thin = 10;
    double beta0 = 0.25;
    double target_accept = 0.3;
    double sigma_scale_dynamics = 1.0;  // negative control: 2.0 doubles sigma^2 in the flow only
    std::uint64_t seed = 1;
};

struct ObsComparison {
    std::string name;
    double mean0 = 0, se0 = 0, meanT = 0, seT = 0;
    double diff_mean = 0, diff_se = 0;  // paired t=0 vs t=T
    double bias = 0;                    // |mean_T(dt) - mean_T(dt/2)|
    double threshold = 0;               // 3 diff_se + bias
    bool pass = false;
};

struct InvarianceReport {
    std::vector<ObsComparison> rows;
    bool pass = false;
    double beta_used = 0;
    double accept_rate = 0;
};

InvarianceReport invariance_experiment(const InvarianceConfig& cfg);

// --- HMC accept/reject gate ----------------------------------------------

struct HmcGateConfig {
    TorusSpec spec;
    Polynomial P;
    double dt = 1e-2;
    double T = 4.0;
    int paths = 4;   // M in the time-ensemble average
    double K = 1.0;  // acceptance threshold
    std::uint64_t seed = 1;
};

struct HmcGateReport {
    double statistic = 0.0;  // [||:p:||]_T
    bool accept = false;
    bool blowup = false;
    std::vector<double> per_path;
};

HmcGateReport hmc_gate(const PairField& u0, const HmcGateConfig& cfg);

// --- stochastic convolution covariance oracle ----------------------------

struct CovCheckConfig {
    std::vector<std::pair<int, int>> modes = {{0, 0}, {1, 0}, {2, 1}};
    std::vector<double> times = {0.5, 2.0, 20.0};
    int paths = 100000;
    double dt = 0.1;
    std::uint64_t seed = 1;
};

struct CovCheckRow {
    int n1 = 0, n2 = 0;
    double t = 0;        // +inf marks the stationary-limit comparison
    int entry = 0;       // 11, 12, 22
    double closed = 0;   // physical per-component covariance
    double mc = 0;
    double se = 0;
    bool ok = false;
};

struct CovCheckReport {
    std::vector<CovCheckRow> rows;
    bool pass = false;
};

CovCheckReport covariance_experiment(const CovCheckConfig& cfg);

// --- probability inequality ----------------------------------------------

struct EdiffResult {
    double lhs = 0, rhs = 0;
    bool holds = false;
};

// E|f1-f2| <= E f1 + E f2 - eta (P(f1>=eta) + P(f2>=eta) - 1) on the paired
// empirical measure. Nonnegative samples required.
EdiffResult ediff_property(const std::vector<double>& f1, const std::vector<double>& f2, double eta);

// --- sampler cross-validation (pCN vs SQE vs importance reweighting) -----

struct CrosscheckConfig {
    TorusSpec spec;
    Polynomial P;
    int pcn_burnin = 10000;
    int pcn_samples = 4000;
    int pcn_thin = 10;
    double beta0 = 0.25;
    double sqe_burn_T = 20.0;
    double sqe_T = 400.0;
    double sqe_dt = 5e-3;
    double sqe_thin_t = 0.1;
    int is_draws = 100000;
    std::uint64_t seed = 1;
};

struct EstimatorStat {
    std::string name;
    double mean = 0, se = 0;
};

struct CrosscheckReport {
    EstimatorStat pcn, sqe, is;  // estimates of int :u^2: under rho_N
    bool pass = false;
};

CrosscheckReport sampler_crosscheck(const CrosscheckConfig& cfg);

// batch-means standard error for a correlated scalar series
double batch_means_se(const std::vector<double>& xs, int batches = 20);

}  // namespace hpq
