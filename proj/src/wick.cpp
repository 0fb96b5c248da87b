#include "hpq/wick.hpp"

#include <cmath>
#include <stdexcept>

#include "hpq/parallel.hpp"

namespace hpq {

int Polynomial::degree() const {
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        if (c[static_cast<std::size_t>(i)] != 0.0) return i;
    return -1;
}

double Polynomial::eval(double x) const {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    if (c.size() <= 1) return d;
    d.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = static_cast<double>(i) * c[i];
    return d;
}

double Polynomial::leading() const {
    const int d = degree();
    return d < 0 ? 0.0 : c[static_cast<std::size_t>(d)];
}

void validate_P(const Polynomial& P, int two_k) {
    if (P.degree() != two_k) throw std::invalid_argument("P must have degree 2k");
    if (P.leading() <= 0.0) throw std::invalid_argument("P must have positive leading coefficient");
}

double hermite(int n, double x, double sigma2) {
    if (n < 0) throw std::invalid_argument("hermite: n < 0");
    if (sigma2 < 0.0) throw std::invalid_argument("hermite: sigma2 < 0");
    double hm = 1.0;  // H_0
    if (n == 0) return hm;
    double h = x;  // H_1
    for (int k = 1; k < n; ++k) {
        const double hp = x * h - static_cast<double>(k) * sigma2 * hm;
        hm = h;
        h = hp;
    }
    return h;
}

double sigma_N(const TorusSpec& spec) {
    spec.validate();
    const int N = spec.N;
    const int B = 2 * N + 1;
    const double sum = deterministic_sum(static_cast<std::ptrdiff_t>(B) * B, [&](std::ptrdiff_t i) {
        const int n1 = static_cast<int>(i) / B - N;
        const int n2 = static_cast<int>(i) % B - N;
        return 1.0 / (1.0 + double(n1) * n1 + double(n2) * n2);
    });
    return sum / 39.478417604357434475337963999505;  // 1/(4 pi^2)
}

std::vector<Polynomial> taylor_shift(const Polynomial& q) {
    const int d = q.degree();
    if (d < 1) throw std::invalid_argument("taylor_shift: deg q >= 1 required");
    std::vector<Polynomial> out;
    Polynomial g = q;
    double hfact = 1.0;
    for (int h = 1; h <= d; ++h) {
        g = g.derivative();
        hfact *= static_cast<double>(h);
        Polynomial qh = g;
        for (double& ci : qh.c) ci /= hfact;
        out.push_back(std::move(qh));
    }
    return out;
}

WickContext::WickContext(const TorusSpec& spec, double sigma2_override) : spec_(spec) {
    spec_.validate();
    sigma2_ = sigma2_override >= 0.0 ? sigma2_override : sigma_N(spec_);
    // H_{n+1} = x H_n - n sigma^2 H_{n-1} on monomial coefficients
    herm_.resize(static_cast<std::size_t>(spec_.two_k) + 1);
    herm_[0].c = {1.0};
    if (spec_.two_k >= 1) herm_[1].c = {0.0, 1.0};
    for (int n = 1; n < spec_.two_k; ++n) {
        Polynomial next;
        next.c.assign(static_cast<std::size_t>(n) + 2, 0.0);
        const auto& hn = herm_[static_cast<std::size_t>(n)].c;
        const auto& hm = herm_[static_cast<std::size_t>(n) - 1].c;
        for (std::size_t i = 0; i < hn.size(); ++i) next.c[i + 1] += hn[i];
        for (std::size_t i = 0; i < hm.size(); ++i) next.c[i] -= static_cast<double>(n) * sigma2_ * hm[i];
        herm_[static_cast<std::size_t>(n) + 1] = std::move(next);
    }
}

const Polynomial& WickContext::hermite_poly(int j) const {
    if (j < 0 || j > spec_.two_k)
        throw std::invalid_argument("WickContext: degree outside built tables");
    return herm_[static_cast<std::size_t>(j)];
}

Polynomial WickContext::wick_transform(const Polynomial& q) const {
    if (q.degree() > spec_.two_k)
        throw std::invalid_argument("wick_transform: deg q > 2k");
    Polynomial w;
    w.c.assign(q.c.size() > 1 ? q.c.size() : 1, 0.0);
    for (std::size_t j = 0; j < q.c.size(); ++j) {
        if (q.c[j] == 0.0) continue;
        const auto& hj = herm_[j].c;
        for (std::size_t i = 0; i < hj.size(); ++i) w.c[i] += q.c[j] * hj[i];
    }
    return w;
}

namespace {

SpectralField eval_pointwise(const Torus& T, const Polynomial& W, const SpectralField& u) {
    T.require_dealiased();
    const Grid g = T.to_grid(u, false);
    Grid out(g.size());
    parallel_for(static_cast<std::ptrdiff_t>(g.size()), [&](std::ptrdiff_t j) {
        out[static_cast<std::size_t>(j)] = W.eval(g[static_cast<std::size_t>(j)]);
    });
    return T.from_grid(out);
}

}  // namespace

SpectralField wick_power(const Torus& T, const SpectralField& u, int j, const WickContext& ctx) {
    return eval_pointwise(T, ctx.hermite_poly(j), u);
}

SpectralField wick_poly(const Torus& T, const Polynomial& q, const SpectralField& u, const WickContext& ctx) {
    return eval_pointwise(T, ctx.wick_transform(q), u);
}

SpectralField wick_shift_expand(const Torus& T, const Polynomial& q, const SpectralField& u,
                                const SpectralField& v, const WickContext& ctx) {
    T.require_dealiased();
    const int d = q.degree();
    if (d > ctx.max_degree()) throw std::invalid_argument("wick_shift_expand: degree overflow");
    const Grid gu = T.to_grid(u, false);
    const Grid gv = T.to_grid(v, false);
    std::vector<Polynomial> wick_qh;
    wick_qh.push_back(ctx.wick_transform(q));
    if (d >= 1)
        for (const Polynomial& qh : taylor_shift(q)) wick_qh.push_back(ctx.wick_transform(qh));
    Grid out(gu.size());
    parallel_for(static_cast<std::ptrdiff_t>(gu.size()), [&](std::ptrdiff_t jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        double acc = 0.0;
        double vpow = 1.0;
        for (std::size_t h = 0; h < wick_qh.size(); ++h) {
            acc += wick_qh[h].eval(gu[j]) * vpow;
            vpow *= gv[j];
        }
        out[j] = acc;
    });
    return T.from_grid(out);
}

double wick_integral(const Torus& T, const Polynomial& q, const SpectralField& u, const WickContext& ctx) {
    const Polynomial W = ctx.wick_transform(q);
    const Grid g = T.to_grid(u, false);
    const double mean = deterministic_sum(static_cast<std::ptrdiff_t>(g.size()), [&](std::ptrdiff_t j) {
                            return W.eval(g[static_cast<std::size_t>(j)]);
                        }) /
                        static_cast<double>(g.size());
    return 39.478417604357434475337963999505 * mean;  // 4 pi^2 * grid average
}

}  // namespace hpq
