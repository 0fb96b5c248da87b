#include "hpq/dynamics.hpp"

#include <cmath>
#include <string>

namespace hpq {

namespace {
constexpr double kFourPiSq = 39.478417604357434475337963999505;
constexpr double kHalfModeStd = 0.11253953951963827810319613424157;  // 1/sqrt(8 pi^2)
constexpr double kDcStd = 0.15915494309189533576888376337251;       // 1/(2 pi)
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

}  // namespace

double mat2_norm(const Mat2& m) {
    // largest singular value of a 2x2
    const double a = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    const double d = m.a11 * m.a22 - m.a12 * m.a21;
    const double disc = std::sqrt(std::max(0.0, a * a - 4.0 * d * d));
    return std::sqrt(0.5 * (a + disc));
}

Mat2 propagator_matrix(double jbsq, double t) {
    // e^{tA} = e^{-t/2} [cos(wt) I + sin(wt)/w (A + I/2)], w^2 = jbsq - 1/4
    const double w = std::sqrt(jbsq - 0.25);
    const double damp = std::exp(-0.5 * t);
    const double c = std::cos(w * t);
    const double sw = std::sin(w * t) / w;
    return {damp * (c + 0.5 * sw), damp * sw, -damp * jbsq * sw, damp * (c - 0.5 * sw)};
}

Mat2 propagator_integral(double jbsq, double t) {
    // A^{-1}(e^{tA} - I) with A^{-1} = [[-1,-1],[jbsq,0]]/jbsq
    const Mat2 e = propagator_matrix(jbsq, t);
    return {(1.0 - e.a11 - e.a21) / jbsq, (1.0 - e.a22 - e.a12) / jbsq, e.a11 - 1.0, e.a12};
}

Sym2 stochastic_convolution_cov(double jbsq, double t) {
    const double w = std::sqrt(jbsq - 0.25);
    const double et = std::exp(-t);
    const double s1 = std::sin(w * t);
    const double s2 = std::sin(2.0 * w * t);
    const double c2 = std::cos(2.0 * w * t);
    const double w2 = w * w;
    Sym2 c;
    c.c11 = (1.0 - et) / jbsq + et * (-2.0 * w * s2 + c2 - 1.0) / (4.0 * w2 * jbsq);
    c.c12 = et * s1 * s1 / w2;
    c.c22 = (1.0 - et) + et * (2.0 * w * s2 + c2 - 1.0) / (4.0 * w2);
    return c;
}

Sym2 stationary_cov(double jbsq) { return {1.0 / jbsq, 0.0, 1.0}; }

ModePropagator build_propagator(const Torus& T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("build_propagator: dt > 0 required");
    ModePropagator prop;
    prop.dt = dt;
    const std::size_t n = T.mode_count();
    prop.E.resize(n);
    prop.J.resize(n);
    prop.Q.resize(n);
    prop.L.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double jbsq = T.jbsq(i);
        prop.E[i] = propagator_matrix(jbsq, dt);
        prop.J[i] = propagator_integral(jbsq, dt);
        // the one-step noise covariance is C(dt); the trig form stays
        // accurate at small dt where S - E S E^T cancels catastrophically
        const Sym2 q = stochastic_convolution_cov(jbsq, dt);
        prop.Q[i] = q;
        Low2 l;
        l.l11 = std::sqrt(q.c11);
        l.l21 = q.c12 / l.l11;
        l.l22 = std::sqrt(std::max(0.0, q.c22 - l.l21 * l.l21));
        prop.L[i] = l;
    }
    const int N = T.N();
    for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            if (n1 == 0 && n2 <= 0) continue;
            prop.half_modes.push_back(static_cast<std::size_t>((n1 + N) * (2 * N + 1) + (n2 + N)));
        }
    prop.dc_index = static_cast<std::size_t>(N * (2 * N + 1) + N);
    return prop;
}

NoiseDraw draw_noise(const Torus& T, const ModePropagator& prop, RngStream& rng) {
    NoiseDraw nd;
    nd.nu.assign(T.mode_count(), cplx(0.0, 0.0));
    nd.nut.assign(T.mode_count(), cplx(0.0, 0.0));
    {
        const Low2& l = prop.L[prop.dc_index];
        const double z1 = rng.next_normal();
        const double z2 = rng.next_normal();
        nd.nu[prop.dc_index] = cplx(kDcStd * l.l11 * z1, 0.0);
        nd.nut[prop.dc_index] = cplx(kDcStd * (l.l21 * z1 + l.l22 * z2), 0.0);
    }
    for (std::size_t i : prop.half_modes) {
        const Low2& l = prop.L[i];
        const double zr1 = rng.next_normal();
        const double zr2 = rng.next_normal();
        const double zi1 = rng.next_normal();
        const double zi2 = rng.next_normal();
        nd.nu[i] = kHalfModeStd * cplx(l.l11 * zr1, l.l11 * zi1);
        nd.nut[i] = kHalfModeStd * cplx(l.l21 * zr1 + l.l22 * zr2, l.l21 * zi1 + l.l22 * zi2);
    }
    return nd;
}

PairField apply_S(const Torus& T, const PairField& x, double t) {
    if (t < 0.0) throw std::invalid_argument("apply_S: t >= 0 required");
    PairField y(T.N());
    for (std::size_t i = 0; i < T.mode_count(); ++i) {
        const Mat2 e = propagator_matrix(T.jbsq(i), t);
        y.u.a[i] = e.a11 * x.u.a[i] + e.a12 * x.ut.a[i];
        y.ut.a[i] = e.a21 * x.u.a[i] + e.a22 * x.ut.a[i];
    }
    return y;
}

// y = E x + J (0, f) + noise, written on the half lattice and mirrored
PairField propagate_pair(const Torus& T, const PairField& x, const ModePropagator& prop,
                         const SpectralField* force, const NoiseDraw* noise) {
    PairField y(T.N());
    const int N = T.N();
    auto update_mode = [&](std::size_t i) {
        const Mat2& e = prop.E[i];
        cplx u = e.a11 * x.u.a[i] + e.a12 * x.ut.a[i];
        cplx ut = e.a21 * x.u.a[i] + e.a22 * x.ut.a[i];
        if (force) {
            const Mat2& j = prop.J[i];
            u += j.a12 * force->a[i];
            ut += j.a22 * force->a[i];
        }
        if (noise) {
            u += noise->nu[i];
            ut += noise->nut[i];
        }
        y.u.a[i] = u;
        y.ut.a[i] = ut;
    };
    update_mode(prop.dc_index);
    y.u.a[prop.dc_index] = cplx(y.u.a[prop.dc_index].real(), 0.0);
    y.ut.a[prop.dc_index] = cplx(y.ut.a[prop.dc_index].real(), 0.0);
    for (std::size_t i : prop.half_modes) update_mode(i);
    for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            if (n1 == 0 && n2 <= 0) continue;
            y.u.at(-n1, -n2) = std::conj(y.u.at(n1, n2));
            y.ut.at(-n1, -n2) = std::conj(y.ut.at(n1, n2));
        }
    return y;
}

PairField ou_step(const Torus& T, const PairField& x, const ModePropagator& prop, RngStream& rng,
                  const NoiseDraw* noise) {
    NoiseDraw local;
    if (!noise) {
        local = draw_noise(T, prop, rng);
        noise = &local;
    }
    return propagate_pair(T, x, prop, nullptr, noise);
}

PairField sdnlw_step(const Torus& T, const PairField& x, const ModePropagator& prop,
                     const WickContext& ctx, const Polynomial& p, RngStream& rng,
                     const NoiseDraw* noise, const SpectralField* extra) {
    if (p.degree() > ctx.spec().two_k - 1)
        throw std::invalid_argument("sdnlw_step: deg p must be <= 2k-1");
    SpectralField force(T.N());
    if (!p.is_zero()) {
        force = wick_poly(T, p, x.u, ctx);
        scale(force, -1.0);
    }
    if (extra) axpy(force, kSqrt2, *extra);
    NoiseDraw local;
    if (!noise) {
        local = draw_noise(T, prop, rng);
        noise = &local;
    }
    const bool no_force = p.is_zero() && !extra;
    return propagate_pair(T, x, prop, no_force ? nullptr : &force, noise);
}

SpectralField sqe_step(const Torus& T, const SpectralField& u, double dt, const WickContext& ctx,
                       const Polynomial& p, RngStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sqe_step: dt > 0 required");
    SpectralField drift(T.N());
    if (!p.is_zero()) drift = wick_poly(T, p, u, ctx);
    SpectralField y(T.N());
    const int N = T.N();
    // DC mode
    {
        const std::size_t i = static_cast<std::size_t>(N * (2 * N + 1) + N);
        const double lam = 1.0;
        const double decay = std::exp(-lam * dt);
        const double resp = (1.0 - decay) / lam;
        const double var = (1.0 - decay * decay) / (2.0 * lam) * 2.0 * kDcStd * kDcStd;
        const double v = decay * u.a[i].real() - resp * drift.a[i].real() + std::sqrt(var) * rng.next_normal();
        y.a[i] = cplx(v, 0.0);
    }
    for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            if (n1 == 0 && n2 <= 0) continue;
            const std::size_t i = static_cast<std::size_t>((n1 + N) * (2 * N + 1) + (n2 + N));
            const double lam = 1.0 + double(n1) * n1 + double(n2) * n2;
            const double decay = std::exp(-lam * dt);
            const double resp = (1.0 - decay) / lam;
            // per real component: stationary 1/(8 pi^2 lam)
            const double std1 = std::sqrt((1.0 - decay * decay) / (2.0 * lam) * 2.0) * kHalfModeStd;
            const cplx noise(std1 * rng.next_normal(), std1 * rng.next_normal());
            y.a[i] = decay * u.a[i] - resp * drift.a[i] + noise;
            y.at(-n1, -n2) = std::conj(y.a[i]);
        }
    return y;
}

double energy(const Torus& T, const Polynomial& P, const PairField& x) {
    const int two_k = P.degree();
    const double a2k = P.leading();
    double nonlin = 0.0;
    if (two_k >= 1 && a2k != 0.0) {
        const Grid g = T.to_grid(x.u, false);
        double s = 0.0;
        for (double v : g) s += std::pow(v, two_k);
        nonlin = a2k / static_cast<double>(two_k) * kFourPiSq * s / static_cast<double>(g.size());
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < T.mode_count(); ++i) {
        quad += 0.5 * (T.nsq(i) + 1.0) * std::norm(x.u.a[i]);  // |grad u|^2 + u^2
        quad += 0.5 * std::norm(x.ut.a[i]);
    }
    return nonlin + kFourPiSq * quad;
}

ObservableRecord observe(const Torus& T, const Polynomial& P, const Polynomial& p,
                         const WickContext& ctx, const PairField& x, double t) {
    ObservableRecord r;
    r.t = t;
    r.energy = energy(T, P, x);
    r.wick_mass = wick_integral(T, Polynomial({0.0, 0.0, 1.0}), x.u, ctx);
    if (!p.is_zero()) {
        const SpectralField pw = wick_poly(T, p, x.u, ctx);
        r.p_hminus_eps = wsp(T, pw, -T.epsilon(), 2.0);
    }
    r.sob_minus_eps = sobolev(T, x, -T.epsilon());
    r.sob_one_minus_eps = sobolev(T, x, 1.0 - T.epsilon());
    return r;
}

BlowupError::BlowupError(double time)
    : std::runtime_error("trajectory left the finite-norm region at t = " + std::to_string(time)),
      t(time) {}

Trajectory simulate(const Torus& T, const ModePropagator& prop, const WickContext& ctx,
                    const Polynomial& P, const Polynomial& p, const PairField& x0,
                    const SimParams& sim, RngStream rng) {
    Trajectory traj;
    PairField x = x0;
    const long nsteps = static_cast<long>(std::llround(sim.T / sim.dt));
    traj.obs.push_back(observe(T, P, p, ctx, x, 0.0));
    std::vector<long> dump_steps;
    for (double td : sim.dump_times) dump_steps.push_back(static_cast<long>(std::llround(td / sim.dt)));
    for (long ds : dump_steps)
        if (ds == 0) traj.dumps.emplace_back(0.0, x);
    for (long m = 0; m < nsteps; ++m) {
        x = sdnlw_step(T, x, prop, ctx, p, rng);
        const double t = static_cast<double>(m + 1) * sim.dt;
        if (!all_finite(x) || sobolev(T, x, -T.epsilon()) > sim.blowup_threshold)
            throw BlowupError(t);
        if ((m + 1) % sim.obs_stride == 0 || m + 1 == nsteps)
            traj.obs.push_back(observe(T, P, p, ctx, x, t));
        for (std::size_t k = 0; k < dump_steps.size(); ++k)
            if (dump_steps[k] == m + 1) traj.dumps.emplace_back(t, x);
    }
    traj.final_state = std::move(x);
    return traj;
}

DpdResult dpd_split(const Torus& T, const ModePropagator& prop, const WickContext& ctx,
                    const Polynomial& p, const PairField& x0, const SimParams& sim, RngStream rng) {
    DpdResult res;
    PairField u = x0;
    PairField X = x0;
    PairField v(T.N());  // v(0) = 0
    const long nsteps = static_cast<long>(std::llround(sim.T / sim.dt));
    const double eps = T.epsilon();
    auto record = [&](double t) {
        res.times.push_back(t);
        res.sob_X.push_back(sobolev(T, X, 1.0 - eps));
        res.sob_v.push_back(sobolev(T, v, 1.0 - eps));
        PairField diff = u;
        axpy(diff, -1.0, X);
        axpy(diff, -1.0, v);
        res.max_split_residual = std::max(res.max_split_residual, sobolev(T, diff, -eps));
    };
    record(0.0);
    for (long m = 0; m < nsteps; ++m) {
        const NoiseDraw nd = draw_noise(T, prop, rng);
        // remainder equation: v' = A v - (0, :p(X+v):), X' = A X + noise
        PairField sum = X;
        axpy(sum, 1.0, v);
        SpectralField force(T.N());
        if (!p.is_zero()) {
            force = wick_poly(T, p, sum.u, ctx);
            scale(force, -1.0);
        }
        u = sdnlw_step(T, u, prop, ctx, p, rng, &nd);
        X = ou_step(T, X, prop, rng, &nd);
        {
            PairField vn(T.N());
            for (std::size_t i = 0; i < T.mode_count(); ++i) {
                const Mat2& e = prop.E[i];
                const Mat2& j = prop.J[i];
                vn.u.a[i] = e.a11 * v.u.a[i] + e.a12 * v.ut.a[i] + j.a12 * force.a[i];
                vn.ut.a[i] = e.a21 * v.u.a[i] + e.a22 * v.ut.a[i] + j.a22 * force.a[i];
            }
            v = std::move(vn);
        }
        const double t = static_cast<double>(m + 1) * sim.dt;
        if (!all_finite(u) || sobolev(T, u, -eps) > sim.blowup_threshold) throw BlowupError(t);
        if ((m + 1) % sim.obs_stride == 0 || m + 1 == nsteps) record(t);
    }
    res.u_final = std::move(u);
    res.X_final = std::move(X);
    res.v_final = std::move(v);
    return res;
}

}  // namespace hpq
