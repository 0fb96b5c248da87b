#include "hpq/coupling.hpp"

#include <cmath>

#include "hpq/parallel.hpp"

namespace hpq {

namespace {
constexpr double kFourPiSq = 39.478417604357434475337963999505;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

double l2_sq(const SpectralField& f) {
    double acc = 0.0;
    for (const cplx& c : f.a) acc += std::norm(c);
    return kFourPiSq * acc;
}

// <f, g>_{L^2} for real fields via Parseval over all modes
double l2_inner(const Torus& T, const SpectralField& f, const SpectralField& g,
                const ModePropagator& prop) {
    double acc = f.a[prop.dc_index].real() * g.a[prop.dc_index].real();
    for (std::size_t i : prop.half_modes)
        acc += 2.0 * (f.a[i].real() * g.a[i].real() + f.a[i].imag() * g.a[i].imag());
    (void)T;
    return kFourPiSq * acc;
}
}  // namespace

double delta_of_t(double sup_wsp, double v0_norm, double A, double eps) {
    if (!(A > 0.0)) throw std::invalid_argument("delta_of_t: A > 0 required");
    if (!(eps > 0.0)) throw std::invalid_argument("delta_of_t: eps > 0 required");
    if (sup_wsp < 0.0) throw std::invalid_argument("delta_of_t: sup_wsp >= 0 required");
    (void)v0_norm;  // already folded into sup_wsp
    if (sup_wsp == 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(A * sup_wsp, -4.0 / eps);
}

CouplingRecord run_coupling_path(const Torus& T, const WickContext& ctx, const Polynomial& p,
                                 const PairField& u0, const PairField& v0,
                                 const CouplingParams& params, RngStream rng) {
    T.require_dealiased();
    const int degp = p.degree();
    if (degp > ctx.spec().two_k - 1)
        throw std::invalid_argument("run_coupling_path: deg p must be <= 2k-1");
    const double eps = T.epsilon();
    const ModePropagator prop = build_propagator(T, params.dt);

    // Wick transforms of p and of its Taylor family, fixed along the run
    std::vector<Polynomial> wick_ph;  // index h-1
    if (degp >= 1)
        for (const Polynomial& ph : taylor_shift(p)) wick_ph.push_back(ctx.wick_transform(ph));

    CouplingRecord rec;
    rec.A = params.A;
    rec.v0_norm = sobolev(T, v0, 1.0 - eps);
    const double m_cap = params.M_stop * params.M_stop;

    PairField u = u0;
    PairField w = v0;
    bool stopped = false;
    double t = 0.0;
    const long nsteps = static_cast<long>(std::llround(params.T / params.dt));
    const Polynomial wick_mass_poly({0.0, 0.0, 1.0});

    auto record = [&](double time, double delta_now) {
        rec.times.push_back(time);
        const double wn = sobolev(T, w, 1.0 - eps);
        rec.w_norm.push_back(wn);
        rec.delta_history.push_back(delta_now);
        rec.exp_mart_history.push_back(rec.exp_mart);
        rec.cm_history.push_back(rec.cm_energy);
        rec.ito_history.push_back(rec.ito_integral);
        SpectralField su = u.u;
        axpy(su, 1.0, w.u);
        rec.shifted_wick_mass.push_back(wick_integral(T, wick_mass_poly, su, ctx));
        if (rec.v0_norm > 0.0) {
            const double ratio = wn / (rec.v0_norm * std::exp(-time / 4.0));
            rec.max_envelope_ratio = std::max(rec.max_envelope_ratio, ratio);
        }
    };
    record(0.0, 0.0);

    for (long m = 0; m < nsteps; ++m) {
        // Taylor fields :p_h(u): on the padded grid
        const Grid gu = T.to_grid(u.u, false);
        const Grid gw = T.to_grid(w.u, false);
        const std::size_t ng = gu.size();
        double sup_wsp = 0.0;
        std::vector<Grid> ph_grid(wick_ph.size());
        std::vector<std::vector<cplx>> ph_spec(wick_ph.size());
        for (std::size_t h = 0; h < wick_ph.size(); ++h) {
            ph_grid[h].resize(ng);
            const Polynomial& W = wick_ph[h];
            parallel_for(static_cast<std::ptrdiff_t>(ng), [&](std::ptrdiff_t j) {
                ph_grid[h][static_cast<std::size_t>(j)] = W.eval(gu[static_cast<std::size_t>(j)]);
            });
            ph_spec[h] = T.grid_spectrum(ph_grid[h]);
            const SpectralField band = T.band_from_spectrum(ph_spec[h]);
            const double nrm = wsp(T, band, -eps / 2.0, 4.0);
            sup_wsp = std::max(sup_wsp, nrm * std::pow(rec.v0_norm, static_cast<double>(h)));
        }
        const double delta = wick_ph.empty() ? std::numeric_limits<double>::infinity()
                                             : delta_of_t(sup_wsp, rec.v0_norm, params.A, eps);

        // split the Wick expansion difference: smoothed part -> h, rest -> w forcing
        SpectralField force_w(T.N());
        SpectralField h_field(T.N());
        if (!wick_ph.empty()) {
            Grid Fg(ng, 0.0), Gg(ng, 0.0);
            for (std::size_t h = 0; h < wick_ph.size(); ++h) {
                std::vector<cplx> smooth_spec = ph_spec[h];
                T.grid_heat_multiplier(smooth_spec, delta);
                const Grid smooth = T.grid_from_spectrum(smooth_spec);
                parallel_for(static_cast<std::ptrdiff_t>(ng), [&](std::ptrdiff_t jj) {
                    const std::size_t j = static_cast<std::size_t>(jj);
                    const double wp = std::pow(gw[j], static_cast<double>(h + 1));
                    Gg[j] += smooth[j] * wp;
                    Fg[j] += (ph_grid[h][j] - smooth[j]) * wp;
                });
            }
            force_w = T.from_grid(Fg);
            scale(force_w, -1.0);
            if (!stopped) {
                h_field = T.from_grid(Gg);
                scale(h_field, kInvSqrt2);
            } else {
                // stopped shift: h = 0, the full difference drives w
                SpectralField g_band = T.from_grid(Gg);
                axpy(force_w, -1.0, g_band);
            }
        }

        // stopping rule: freeze h before cm_energy would cross M^2
        if (!stopped) {
            const double hn2 = l2_sq(h_field);
            if (rec.cm_energy + params.dt * hn2 > m_cap) {
                stopped = true;
                rec.tau_hit = t;
                // fold the smoothed part back into the w forcing, zero the shift
                SpectralField sqrt2h = h_field;
                scale(sqrt2h, kSqrt2);
                axpy(force_w, -1.0, sqrt2h);
                h_field = SpectralField(T.N());
            } else {
                rec.cm_energy += params.dt * hn2;
            }
        }

        const NoiseDraw nd = draw_noise(T, prop, rng);
        {
            // left-point Ito increment <h, dW> with the driver's increments
            SpectralField dW(T.N());
            dW.a = nd.nut;
            for (cplx& c : dW.a) c *= kInvSqrt2;
            rec.ito_integral += l2_inner(T, h_field, dW, prop);
        }
        rec.exp_mart = std::exp(-0.5 * rec.cm_energy + rec.ito_integral);
        if (params.record_h) rec.h_fields.push_back(h_field);

        w = propagate_pair(T, w, prop, wick_ph.empty() ? nullptr : &force_w, nullptr);
        u = sdnlw_step(T, u, prop, ctx, p, rng, &nd);
        t = static_cast<double>(m + 1) * params.dt;

        if (!all_finite(w) || !all_finite(u) ||
            sobolev(T, w, 1.0 - eps) > params.blowup_threshold ||
            sobolev(T, u, -eps) > params.blowup_threshold) {
            rec.finished = false;
            rec.blowup_time = t;
            rec.envelope_ok = false;
            return rec;
        }
        if ((m + 1) % params.obs_stride == 0 || m + 1 == nsteps) record(t, delta);
    }
    rec.envelope_ok = rec.max_envelope_ratio <= 1.0 + 1e-9;
    rec.ref_final = std::move(u);
    rec.w_final = std::move(w);
    return rec;
}

EscalationResult run_coupling_escalating(const Torus& T, const WickContext& ctx,
                                         const Polynomial& p, const PairField& u0,
                                         const PairField& v0, CouplingParams params,
                                         const RngStream& rng, int max_doublings) {
    EscalationResult out;
    for (int k = 0; k <= max_doublings; ++k) {
        out.record = run_coupling_path(T, ctx, p, u0, v0, params, rng);
        out.A_final = params.A;
        out.doublings = k;
        if (out.record.envelope_ok) {
            out.contracted = true;
            return out;
        }
        params.A *= 2.0;
    }
    out.contracted = false;
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

PairField smooth_shift_field(const Torus& T, double norm, RngStream rng) {
    PairField v = sample_rho0(T, rng);
    v.u = bessel(T, v.u, -1.0);
    v.ut = bessel(T, v.ut, -1.0);
    const double n = sobolev(T, v, 1.0 - T.epsilon());
    scale(v, norm / n);
    return v;
}

std::vector<double> direct_observable_samples(const Torus& T, const WickContext& ctx,
                                              const Polynomial& p, const PairField& x0,
                                              double t_eval, double dt, int paths,
                                              std::uint64_t seed) {
    const ModePropagator prop = build_propagator(T, dt);
    const Polynomial x2({0.0, 0.0, 1.0});
    const long nsteps = static_cast<long>(std::llround(t_eval / dt));
    std::vector<double> out(static_cast<std::size_t>(paths));
    for (int j = 0; j < paths; ++j) {
        RngStream rng(seed, stream_purpose::coupling_direct, static_cast<std::uint64_t>(j));
        PairField x = x0;
        for (long m = 0; m < nsteps; ++m) x = sdnlw_step(T, x, prop, ctx, p, rng);
        out[static_cast<std::size_t>(j)] = sigmoid(wick_integral(T, x2, x.u, ctx));
    }
    return out;
}

namespace {
std::size_t nearest_record(const std::vector<double>& times, double t_eval) {
    std::size_t best = 0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double dk = std::abs(times[k] - t_eval);
        if (dk < d) {
            d = dk;
            best = k;
        }
    }
    return best;
}
}  // namespace

GirsanovReport girsanov_check(const std::vector<CouplingRecord>& records,
                              const std::vector<double>& direct_F, double t_eval) {
    GirsanovReport rep;
    if (records.empty()) throw std::invalid_argument("girsanov_check: no records");
    const std::size_t k = nearest_record(records.front().times, t_eval);
    const double n = static_cast<double>(records.size());
    double sw = 0.0, sw2 = 0.0, sfw = 0.0, sfw2 = 0.0;
    for (const CouplingRecord& r : records) {
        const double e = r.exp_mart_history[k];
        const double f = sigmoid(r.shifted_wick_mass[k]);
        sw += e;
        sw2 += e * e;
        sfw += f * e;
        sfw2 += f * e * f * e;
    }
    rep.mean_weight = sw / n;
    rep.se_weight = std::sqrt(std::max(0.0, sw2 / n - rep.mean_weight * rep.mean_weight) / n);
    rep.mean_one_ok = std::abs(rep.mean_weight - 1.0) <= 3.0 * rep.se_weight;
    rep.reweighted_mean = sfw / n;
    rep.reweighted_se =
        std::sqrt(std::max(0.0, sfw2 / n - rep.reweighted_mean * rep.reweighted_mean) / n);
    const double nd = static_cast<double>(direct_F.size());
    double sd = 0.0, sd2 = 0.0;
    for (double f : direct_F) {
        sd += f;
        sd2 += f * f;
    }
    rep.direct_mean = sd / nd;
    rep.direct_se = std::sqrt(std::max(0.0, sd2 / nd - rep.direct_mean * rep.direct_mean) / nd);
    rep.agree_ok = std::abs(rep.reweighted_mean - rep.direct_mean) <=
                   3.0 * std::sqrt(rep.reweighted_se * rep.reweighted_se + rep.direct_se * rep.direct_se);
    rep.ess = sw * sw / (sw2 > 0.0 ? sw2 : 1.0);
    rep.degenerate = rep.ess < 10.0;
    return rep;
}

Eps0Report epsilon0_estimate(const std::vector<CouplingRecord>& records0,
                             const std::vector<CouplingRecord>& records1,
                             const std::vector<double>& eta_grid) {
    if (records0.empty()) throw std::invalid_argument("epsilon0_estimate: no records");
    Eps0Report rep;
    const std::vector<double>& times = records0.front().times;
    const std::size_t nt = times.size();

    auto tail_prob = [](const std::vector<CouplingRecord>& recs, std::size_t k, double eta) {
        if (recs.empty()) return eta <= 1.0 ? 1.0 : 0.0;  // unit weights
        double cnt = 0.0;
        for (const CouplingRecord& r : recs)
            if (r.exp_mart_history[k] >= eta) cnt += 1.0;
        return cnt / static_cast<double>(recs.size());
    };

    double best = 0.0;
    for (double eta : eta_grid) {
        double inf_t = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < nt; ++k)  // t > 0
            inf_t = std::min(inf_t, tail_prob(records0, k, eta) + tail_prob(records1, k, eta) - 1.0);
        const double obj = eta * inf_t;
        if (obj > best) {
            best = obj;
            rep.best_eta = eta;
        }
    }
    rep.eta_estimate = 1.0 - 0.5 * best;

    // continuity estimate (the v1 = 0 formula): (1/2) sup_t of
    // E[E 1_{tau<t}] + E|E 1_{tau>=t} - 1|
    double sup_t = 0.0;
    for (std::size_t k = 1; k < nt; ++k) {
        double a = 0.0, b = 0.0;
        for (const CouplingRecord& r : records0) {
            const bool stopped_before = r.tau_hit && *r.tau_hit < times[k];
            const double e = r.exp_mart_history[k];
            if (stopped_before)
                a += e;
            else
                b += std::abs(e - 1.0);
        }
        const double n0 = static_cast<double>(records0.size());
        sup_t = std::max(sup_t, (a + b) / n0);
    }
    rep.continuity_estimate = 0.5 * sup_t;
    return rep;
}

}  // namespace hpq
