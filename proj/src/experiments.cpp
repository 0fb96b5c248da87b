#include "hpq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpq {

namespace {
constexpr double kHalfModeStd = 0.11253953951963827810319613424157;  // 1/sqrt(8 pi^2)
constexpr double kDcStd = 0.15915494309189533576888376337251;       // 1/(2 pi)

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / n;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return {m, std::sqrt(v / (n * (n - 1.0)))};
}
}  // namespace

double batch_means_se(const std::vector<double>& xs, int batches) {
    if (xs.size() < static_cast<std::size_t>(2 * batches)) batches = 2;
    const std::size_t len = xs.size() / static_cast<std::size_t>(batches);
    std::vector<double> bm;
    for (int b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += xs[static_cast<std::size_t>(b) * len + i];
        bm.push_back(s / static_cast<double>(len));
    }
    return mean_se(bm).se;
}

namespace {

struct EndPoints {
    std::vector<double> wick0, wickT, en0, enT, sob0, sobT;
};

EndPoints evolve_ensemble(const Torus& T, const WickContext& ctx_dyn, const Polynomial& P,
                          const Polynomial& p, const std::vector<PairField>& initial, double dt,
                          double Tend, std::uint64_t seed, std::uint64_t purpose) {
    EndPoints ep;
    const ModePropagator prop = build_propagator(T, dt);
    const long nsteps = static_cast<long>(std::llround(Tend / dt));
    const double eps = T.epsilon();
    const Polynomial x2({0.0, 0.0, 1.0});
    for (std::size_t i = 0; i < initial.size(); ++i) {
        RngStream rng(seed, purpose, i);
        PairField x = initial[i];
        ep.wick0.push_back(wick_integral(T, x2, x.u, ctx_dyn));
        ep.en0.push_back(energy(T, P, x));
        ep.sob0.push_back(sobolev(T, x, -eps));
        for (long m = 0; m < nsteps; ++m) {
            x = sdnlw_step(T, x, prop, ctx_dyn, p, rng);
            if (!all_finite(x) || sobolev(T, x, -eps) > 1e8)
                throw std::runtime_error("invariance experiment: trajectory " + std::to_string(i) +
                                         " blew up at t = " + std::to_string((m + 1) * dt) +
                                         " (seed " + std::to_string(seed) + ")");
        }
        ep.wickT.push_back(wick_integral(T, x2, x.u, ctx_dyn));
        ep.enT.push_back(energy(T, P, x));
        ep.sobT.push_back(sobolev(T, x, -eps));
    }
    return ep;
}

ObsComparison compare(const std::string& name, const std::vector<double>& o0,
                      const std::vector<double>& oT, double biasT) {
    ObsComparison c;
    c.name = name;
    const MeanSe m0 = mean_se(o0);
    const MeanSe mT = mean_se(oT);
    c.mean0 = m0.mean;
    c.se0 = m0.se;
    c.meanT = mT.mean;
    c.seT = mT.se;
    std::vector<double> d(o0.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = oT[i] - o0[i];
    const MeanSe md = mean_se(d);
    c.diff_mean = md.mean;
    c.diff_se = md.se;
    c.bias = biasT;
    c.threshold = 3.0 * md.se + biasT;
    c.pass = std::abs(md.mean) <= c.threshold;
    return c;
}

}  // namespace

InvarianceReport invariance_experiment(const InvarianceConfig& cfg) {
    Torus T(cfg.spec);
    const WickContext ctx(cfg.spec);
    const WickContext ctx_dyn(cfg.spec, cfg.sigma_scale_dynamics == 1.0
                                            ? ctx.sigma2()
                                            : ctx.sigma2() * cfg.sigma_scale_dynamics);
    const Polynomial p = cfg.P.derivative();

    // initial ensemble from the pCN chain targeting the true rho_N
    GibbsChain chain(T, ctx, cfg.P, cfg.beta0, RngStream(cfg.seed, stream_purpose::gibbs_chain, 0));
    for (int i = 0; i < cfg.burnin; ++i) chain.step_tuned(cfg.target_accept);
    chain.reset_counters();
    std::vector<PairField> initial;
    initial.reserve(static_cast<std::size_t>(cfg.ensemble));
    while (initial.size() < static_cast<std::size_t>(cfg.ensemble)) {
        for (int s = 0; s < cfg.thin; ++s) chain.step();
        initial.push_back(chain.state().current);
    }

    const EndPoints full = evolve_ensemble(T, ctx_dyn, cfg.P, p, initial, cfg.dt, cfg.T, cfg.seed,
                                           stream_purpose::dynamics);
    const EndPoints half = evolve_ensemble(T, ctx_dyn, cfg.P, p, initial, cfg.dt / 2.0, cfg.T,
                                           cfg.seed, stream_purpose::dynamics_half);

    auto bias = [](const std::vector<double>& a, const std::vector<double>& b) {
        return std::abs(mean_se(a).mean - mean_se(b).mean);
    };
    InvarianceReport rep;
    rep.rows.push_back(compare("wick_mass", full.wick0, full.wickT, bias(full.wickT, half.wickT)));
    rep.rows.push_back(compare("energy", full.en0, full.enT, bias(full.enT, half.enT)));
    rep.rows.push_back(compare("sobolev_minus_eps", full.sob0, full.sobT, bias(full.sobT, half.sobT)));
    rep.pass = true;
    for (const ObsComparison& c : rep.rows) rep.pass = rep.pass && c.pass;
    rep.beta_used = chain.state().beta;
    rep.accept_rate = chain.acceptance_rate();
    return rep;
}

HmcGateReport hmc_gate(const PairField& u0, const HmcGateConfig& cfg) {
    Torus T(cfg.spec);
    const WickContext ctx(cfg.spec);
    const Polynomial p = cfg.P.derivative();
    const ModePropagator prop = build_propagator(T, cfg.dt);
    const long nsteps = static_cast<long>(std::llround(cfg.T / cfg.dt));
    const double eps = T.epsilon();
    HmcGateReport rep;
    for (int j = 0; j < cfg.paths; ++j) {
        RngStream rng(cfg.seed, stream_purpose::hmc_gate, static_cast<std::uint64_t>(j));
        PairField x = u0;
        auto pnorm = [&](const PairField& y) {
            if (p.is_zero()) return 0.0;
            return wsp(T, wick_poly(T, p, y.u, ctx), -eps, 2.0);
        };
        double integral = 0.0;
        double prev = pnorm(x);
        bool blew = false;
        for (long m = 0; m < nsteps; ++m) {
            x = sdnlw_step(T, x, prop, ctx, p, rng);
            if (!all_finite(x) || sobolev(T, x, -eps) > 1e8) {
                blew = true;
                break;
            }
            const double cur = pnorm(x);
            integral += 0.5 * (prev + cur) * cfg.dt;
            prev = cur;
        }
        if (blew) {
            rep.blowup = true;
            rep.per_path.push_back(std::numeric_limits<double>::infinity());
        } else {
            rep.per_path.push_back(integral / cfg.T);
        }
    }
    double s = 0.0;
    for (double v : rep.per_path) s += v;
    rep.statistic = s / static_cast<double>(cfg.paths);
    rep.accept = !rep.blowup && rep.statistic <= cfg.K;
    return rep;
}

CovCheckReport covariance_experiment(const CovCheckConfig& cfg) {
    CovCheckReport rep;
    rep.pass = true;
    const double tmax = *std::max_element(cfg.times.begin(), cfg.times.end());
    const long nsteps = static_cast<long>(std::llround(tmax / cfg.dt));

    for (std::size_t mi = 0; mi < cfg.modes.size(); ++mi) {
        const int n1 = cfg.modes[mi].first;
        const int n2 = cfg.modes[mi].second;
        const bool dc = (n1 == 0 && n2 == 0);
        const double jbsq = 1.0 + double(n1) * n1 + double(n2) * n2;
        const double noisescale = dc ? kDcStd : kHalfModeStd;
        const Mat2 E = propagator_matrix(jbsq, cfg.dt);
        const Sym2 s = stationary_cov(jbsq);
        // per-step covariance S - E S E^T, Cholesky
        const double q11 = s.c11 - (E.a11 * (E.a11 * s.c11 + E.a12 * s.c12) + E.a12 * (E.a11 * s.c12 + E.a12 * s.c22));
        const double q12 = s.c12 - (E.a21 * (E.a11 * s.c11 + E.a12 * s.c12) + E.a22 * (E.a11 * s.c12 + E.a12 * s.c22));
        const double q22 = s.c22 - (E.a21 * (E.a21 * s.c11 + E.a22 * s.c12) + E.a22 * (E.a21 * s.c12 + E.a22 * s.c22));
        const double l11 = std::sqrt(q11);
        const double l21 = q12 / l11;
        const double l22 = std::sqrt(std::max(0.0, q22 - l21 * l21));

        // accumulated raw second moments per target time
        std::vector<double> m11(cfg.times.size(), 0.0), m12(cfg.times.size(), 0.0),
            m22(cfg.times.size(), 0.0);
        std::vector<long> counts(cfg.times.size(), 0);
        std::vector<long> target_step(cfg.times.size());
        for (std::size_t k = 0; k < cfg.times.size(); ++k)
            target_step[k] = static_cast<long>(std::llround(cfg.times[k] / cfg.dt));

        for (int path = 0; path < cfg.paths; ++path) {
            RngStream rng(cfg.seed, stream_purpose::covariance,
                          static_cast<std::uint64_t>(mi) * 1000003ULL + static_cast<std::uint64_t>(path));
            double xr = 0, vr = 0, xi = 0, vi = 0;
            for (long m = 0; m <= nsteps; ++m) {
                for (std::size_t k = 0; k < cfg.times.size(); ++k) {
                    if (m == target_step[k]) {
                        m11[k] += xr * xr;
                        m12[k] += xr * vr;
                        m22[k] += vr * vr;
                        ++counts[k];
                        if (!dc) {  // pool the independent imaginary component
                            m11[k] += xi * xi;
                            m12[k] += xi * vi;
                            m22[k] += vi * vi;
                            ++counts[k];
                        }
                    }
                }
                if (m == nsteps) break;
                const double z1 = rng.next_normal();
                const double z2 = rng.next_normal();
                const double nxr = E.a11 * xr + E.a12 * vr + noisescale * l11 * z1;
                const double nvr = E.a21 * xr + E.a22 * vr + noisescale * (l21 * z1 + l22 * z2);
                xr = nxr;
                vr = nvr;
                if (!dc) {
                    const double z3 = rng.next_normal();
                    const double z4 = rng.next_normal();
                    const double nxi = E.a11 * xi + E.a12 * vi + noisescale * l11 * z3;
                    const double nvi = E.a21 * xi + E.a22 * vi + noisescale * (l21 * z3 + l22 * z4);
                    xi = nxi;
                    vi = nvi;
                }
            }
        }

        const double compscale = noisescale * noisescale;  // 1/(8 pi^2) or 1/(4 pi^2)
        auto emit = [&](double t, int entry, double closed, double mc, double se_est) {
            CovCheckRow row;
            row.n1 = n1;
            row.n2 = n2;
            row.t = t;
            row.entry = entry;
            row.closed = closed;
            row.mc = mc;
            row.se = se_est;
            row.ok = t == 0.0 ? mc == 0.0 : std::abs(mc - closed) <= 3.0 * se_est;
            rep.pass = rep.pass && row.ok;
            rep.rows.push_back(row);
        };

        for (std::size_t k = 0; k < cfg.times.size(); ++k) {
            const double n = static_cast<double>(counts[k]);
            const Sym2 ct = stochastic_convolution_cov(jbsq, cfg.times[k]);
            const double c11 = compscale * ct.c11, c12 = compscale * ct.c12, c22 = compscale * ct.c22;
            const double e11 = m11[k] / n, e12 = m12[k] / n, e22 = m22[k] / n;
            // Gaussian moment formulas for the estimator spread
            emit(cfg.times[k], 11, c11, e11, std::sqrt(std::max(1e-300, 2.0 * c11 * c11 / n)));
            emit(cfg.times[k], 12, c12, e12, std::sqrt(std::max(1e-300, (c11 * c22 + c12 * c12) / n)));
            emit(cfg.times[k], 22, c22, e22, std::sqrt(std::max(1e-300, 2.0 * c22 * c22 / n)));
        }
        // stationary limit against the largest recorded time
        {
            const std::size_t k = static_cast<std::size_t>(
                std::max_element(cfg.times.begin(), cfg.times.end()) - cfg.times.begin());
            const double n = static_cast<double>(counts[k]);
            const Sym2 cinf = stationary_cov(jbsq);
            const double c11 = compscale * cinf.c11, c12 = compscale * cinf.c12,
                         c22 = compscale * cinf.c22;
            const double inf = std::numeric_limits<double>::infinity();
            emit(inf, 11, c11, m11[k] / n, std::sqrt(2.0 * c11 * c11 / n));
            emit(inf, 12, c12, m12[k] / n, std::sqrt((c11 * c22 + c12 * c12) / n));
            emit(inf, 22, c22, m22[k] / n, std::sqrt(2.0 * c22 * c22 / n));
        }
    }
    return rep;
}

EdiffResult ediff_property(const std::vector<double>& f1, const std::vector<double>& f2, double eta) {
    if (f1.size() != f2.size() || f1.empty())
        throw std::invalid_argument("ediff_property: matched nonempty samples required");
    if (eta < 0.0) throw std::invalid_argument("ediff_property: eta >= 0 required");
    const double n = static_cast<double>(f1.size());
    double sabs = 0, s1 = 0, s2 = 0, p1 = 0, p2 = 0;
    for (std::size_t i = 0; i < f1.size(); ++i) {
        if (f1[i] < 0.0 || f2[i] < 0.0)
            throw std::invalid_argument("ediff_property: samples must be nonnegative");
        sabs += std::abs(f1[i] - f2[i]);
        s1 += f1[i];
        s2 += f2[i];
        if (f1[i] >= eta) p1 += 1.0;
        if (f2[i] >= eta) p2 += 1.0;
    }
    EdiffResult r;
    r.lhs = sabs / n;
    r.rhs = s1 / n + s2 / n - eta * (p1 / n + p2 / n - 1.0);
    r.holds = r.lhs <= r.rhs + 1e-12 * std::max(1.0, std::abs(r.rhs));
    return r;
}

CrosscheckReport sampler_crosscheck(const CrosscheckConfig& cfg) {
    Torus T(cfg.spec);
    const WickContext ctx(cfg.spec);
    const Polynomial p = cfg.P.derivative();
    const Polynomial x2({0.0, 0.0, 1.0});
    CrosscheckReport rep;

    {  // pCN chain
        GibbsChain chain(T, ctx, cfg.P, cfg.beta0, RngStream(cfg.seed, stream_purpose::gibbs_chain, 1));
        for (int i = 0; i < cfg.pcn_burnin; ++i) chain.step_tuned(0.3);
        std::vector<double> xs;
        xs.reserve(static_cast<std::size_t>(cfg.pcn_samples));
        for (int i = 0; i < cfg.pcn_samples; ++i) {
            for (int s = 0; s < cfg.pcn_thin; ++s) chain.step();
            xs.push_back(wick_integral(T, x2, chain.state().current.u, ctx));
        }
        double m = 0;
        for (double x : xs) m += x;
        rep.pcn = {"pcn", m / static_cast<double>(xs.size()), batch_means_se(xs)};
    }
    {  // SQE long run
        RngStream rng(cfg.seed, stream_purpose::sqe, 0);
        SpectralField u = sample_rho0_u(T, rng);
        const long burn = static_cast<long>(std::llround(cfg.sqe_burn_T / cfg.sqe_dt));
        const long total = static_cast<long>(std::llround(cfg.sqe_T / cfg.sqe_dt));
        const long thin = static_cast<long>(std::llround(cfg.sqe_thin_t / cfg.sqe_dt));
        std::vector<double> xs;
        for (long m = 0; m < total; ++m) {
            u = sqe_step(T, u, cfg.sqe_dt, ctx, p, rng);
            if (m >= burn && (m - burn) % thin == 0) xs.push_back(wick_integral(T, x2, u, ctx));
        }
        double m = 0;
        for (double x : xs) m += x;
        rep.sqe = {"sqe", m / static_cast<double>(xs.size()), batch_means_se(xs)};
    }
    {  // self-normalized importance reweighting of rho0 draws by e^{-V}
        RngStream rng(cfg.seed, stream_purpose::rho0, 0);
        std::vector<double> f(static_cast<std::size_t>(cfg.is_draws)), logw(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            SpectralField u = sample_rho0_u(T, rng);
            logw[i] = -gibbs_potential(T, cfg.P, u, ctx);
            f[i] = wick_integral(T, x2, u, ctx);
        }
        const double lmax = *std::max_element(logw.begin(), logw.end());
        double sw = 0, swf = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double w = std::exp(logw[i] - lmax);
            sw += w;
            swf += w * f[i];
        }
        const double est = swf / sw;
        double var = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double wt = std::exp(logw[i] - lmax) / sw;
            var += wt * wt * (f[i] - est) * (f[i] - est);
        }
        rep.is = {"importance", est, std::sqrt(var)};
    }
    auto agree = [](const EstimatorStat& a, const EstimatorStat& b) {
        return std::abs(a.mean - b.mean) <= 3.0 * std::sqrt(a.se * a.se + b.se * b.se);
    };
    rep.pass = agree(rep.pcn, rep.sqe) && agree(rep.pcn, rep.is) && agree(rep.sqe, rep.is);
    return rep;
}

}  // namespace hpq
