#include "hpq/torus.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

#include "hpq/parallel.hpp"

namespace hpq {

namespace {
std::mutex planner_mutex;  // FFTW planner is not thread-safe
}

void TorusSpec::validate() const {
    if (N < 1) throw std::invalid_argument("TorusSpec: N must be >= 1");
    if (two_k < 4 || two_k % 2 != 0) throw std::invalid_argument("TorusSpec: 2k must be even and >= 4");
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw std::invalid_argument("TorusSpec: require 0 < epsilon <= 1/2");
    if (collocation() < 2 * N + 1) throw std::invalid_argument("TorusSpec: require M >= 2N+1");
}

Torus::Torus(const TorusSpec& spec) : spec_(spec) {
    spec_.validate();
    M_ = spec_.collocation();
    const int B = spec_.band();
    nsq_.resize(static_cast<std::size_t>(B) * B);
    grid_slot_.resize(nsq_.size());
    for (int n1 = -spec_.N; n1 <= spec_.N; ++n1) {
        for (int n2 = -spec_.N; n2 <= spec_.N; ++n2) {
            const std::size_t i = static_cast<std::size_t>((n1 + spec_.N) * B + (n2 + spec_.N));
            nsq_[i] = double(n1) * n1 + double(n2) * n2;
            const int w1 = (n1 % M_ + M_) % M_;
            const int w2 = (n2 % M_ + M_) % M_;
            grid_slot_[i] = w1 * M_ + w2;
        }
    }
    gridfreq_nsq_.resize(static_cast<std::size_t>(M_) * M_);
    for (int j1 = 0; j1 < M_; ++j1) {
        const int m1 = j1 <= M_ / 2 ? j1 : j1 - M_;
        for (int j2 = 0; j2 < M_; ++j2) {
            const int m2 = j2 <= M_ / 2 ? j2 : j2 - M_;
            gridfreq_nsq_[static_cast<std::size_t>(j1) * M_ + j2] = double(m1) * m1 + double(m2) * m2;
        }
    }
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        std::vector<cplx> a(static_cast<std::size_t>(M_) * M_), b(a.size());
        plan_fwd_ = fftw_plan_dft_2d(M_, M_, reinterpret_cast<fftw_complex*>(a.data()),
                                     reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
        plan_bwd_ = fftw_plan_dft_2d(M_, M_, reinterpret_cast<fftw_complex*>(a.data()),
                                     reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
}

Torus::~Torus() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Torus::mode(std::size_t i, int& n1, int& n2) const {
    const int B = spec_.band();
    n1 = static_cast<int>(i) / B - spec_.N;
    n2 = static_cast<int>(i) % B - spec_.N;
}

void Torus::require_dealiased() const {
    if (!dealiased())
        throw std::invalid_argument("Torus: M >= 2kN+1 required for dealiased Wick products");
}

std::shared_ptr<const std::vector<double>> Torus::bessel_weights(double s) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = weight_cache_.find(s);
        if (it != weight_cache_.end()) return it->second;
    }
    auto w = std::make_shared<std::vector<double>>(nsq_.size());
    for (std::size_t i = 0; i < nsq_.size(); ++i) (*w)[i] = std::pow(1.0 + nsq_[i], s);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    weight_cache_.emplace(s, w);
    return weight_cache_[s];
}

double hermitian_error(const SpectralField& f) {
    double scale = 0.0;
    for (const cplx& c : f.a) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (int n1 = -f.N; n1 <= f.N; ++n1)
        for (int n2 = -f.N; n2 <= f.N; ++n2)
            worst = std::max(worst, std::abs(f.at(n1, n2) - std::conj(f.at(-n1, -n2))));
    return worst / scale;
}

void symmetrize(SpectralField& f) {
    for (int n1 = -f.N; n1 <= f.N; ++n1) {
        for (int n2 = -f.N; n2 <= f.N; ++n2) {
            if (n1 < 0 || (n1 == 0 && n2 < 0)) continue;
            if (n1 == 0 && n2 == 0) {
                f.at(0, 0) = cplx(f.at(0, 0).real(), 0.0);
                continue;
            }
            const cplx v = 0.5 * (f.at(n1, n2) + std::conj(f.at(-n1, -n2)));
            f.at(n1, n2) = v;
            f.at(-n1, -n2) = std::conj(v);
        }
    }
}

Grid Torus::to_grid(const SpectralField& f, bool check_symmetry) const {
    if (f.N != spec_.N) throw std::invalid_argument("to_grid: cutoff mismatch");
    if (check_symmetry && hermitian_error(f) > 1e-12)
        throw std::invalid_argument("to_grid: field violates Hermitian symmetry");
    std::vector<cplx> in(static_cast<std::size_t>(M_) * M_, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < f.a.size(); ++i) in[static_cast<std::size_t>(grid_slot_[i])] = f.a[i];
    std::vector<cplx> out(in.size());
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Grid g(in.size());
    for (std::size_t j = 0; j < out.size(); ++j) g[j] = out[j].real();
    return g;
}

SpectralField Torus::from_grid(const Grid& g) const {
    if (g.size() != static_cast<std::size_t>(M_) * M_) throw std::invalid_argument("from_grid: size mismatch");
    std::vector<cplx> spec = grid_spectrum(g);
    return band_from_spectrum(spec);
}

std::vector<cplx> Torus::grid_spectrum(const Grid& g) const {
    std::vector<cplx> in(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) in[j] = cplx(g[j], 0.0);
    std::vector<cplx> out(in.size());
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double inv = 1.0 / (static_cast<double>(M_) * M_);
    for (cplx& c : out) c *= inv;
    return out;
}

Grid Torus::grid_from_spectrum(const std::vector<cplx>& spec) const {
    std::vector<cplx> in(spec);
    std::vector<cplx> out(in.size());
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Grid g(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) g[j] = out[j].real();
    return g;
}

void Torus::grid_heat_multiplier(std::vector<cplx>& spec, double delta) const {
    if (delta < 0.0) throw std::invalid_argument("heat multiplier: delta < 0");
    if (delta == 0.0) return;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double w = std::isinf(delta) ? (gridfreq_nsq_[j] == 0.0 ? 1.0 : 0.0)
                                           : std::exp(-delta * gridfreq_nsq_[j]);
        spec[j] *= w;
    }
}

SpectralField Torus::band_from_spectrum(const std::vector<cplx>& spec) const {
    SpectralField f(spec_.N);
    for (std::size_t i = 0; i < f.a.size(); ++i) f.a[i] = spec[static_cast<std::size_t>(grid_slot_[i])];
    symmetrize(f);
    return f;
}

SpectralField project(const SpectralField& f, int Nprime) {
    if (Nprime > f.N) throw std::invalid_argument("project: N' > N");
    if (Nprime < 0) throw std::invalid_argument("project: N' < 0");
    SpectralField g = f;
    for (int n1 = -f.N; n1 <= f.N; ++n1)
        for (int n2 = -f.N; n2 <= f.N; ++n2)
            if (std::max(std::abs(n1), std::abs(n2)) > Nprime) g.at(n1, n2) = cplx(0.0, 0.0);
    return g;
}

SpectralField bessel(const Torus& T, const SpectralField& f, double s) {
    auto w = T.bessel_weights(s / 2.0);  // <n>^s = (<n>^2)^{s/2}
    SpectralField g = f;
    for (std::size_t i = 0; i < g.a.size(); ++i) g.a[i] *= (*w)[i];
    return g;
}

SpectralField heat_smooth(const Torus& T, const SpectralField& f, double delta) {
    if (delta < 0.0) throw std::invalid_argument("heat_smooth: delta < 0");
    SpectralField g = f;
    for (std::size_t i = 0; i < g.a.size(); ++i) {
        const double w = std::isinf(delta) ? (T.nsq(i) == 0.0 ? 1.0 : 0.0)
                                           : std::exp(-delta * T.nsq(i));
        g.a[i] *= w;
    }
    return g;
}

double l2_norm(const Torus& T, const SpectralField& f) {
    const double s = deterministic_sum(static_cast<std::ptrdiff_t>(f.a.size()),
                                       [&](std::ptrdiff_t i) { return std::norm(f.a[static_cast<std::size_t>(i)]); });
    (void)T;
    return std::sqrt(39.478417604357434475337963999505 * s);  // 4*pi^2 * sum |a|^2
}

double sobolev(const Torus& T, const PairField& x, double s) {
    auto wu = T.bessel_weights(s);
    auto wt = T.bessel_weights(s - 1.0);
    const double total = deterministic_sum(
        static_cast<std::ptrdiff_t>(x.u.a.size()), [&](std::ptrdiff_t ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            return (*wu)[i] * std::norm(x.u.a[i]) + (*wt)[i] * std::norm(x.ut.a[i]);
        });
    return std::sqrt(39.478417604357434475337963999505 * total);
}

double wsp(const Torus& T, const SpectralField& f, double s, double p) {
    SpectralField g = bessel(T, f, s);
    if (p == 2.0) return l2_norm(T, g);
    if (p == 4.0) {
        Grid gr = T.to_grid(g, false);
        const double cell = std::pow(6.283185307179586476925286766559 / T.M(), 2);
        const double s4 = deterministic_sum(static_cast<std::ptrdiff_t>(gr.size()), [&](std::ptrdiff_t j) {
            const double v = gr[static_cast<std::size_t>(j)];
            return v * v * v * v;
        });
        return std::pow(cell * s4, 0.25);
    }
    if (std::isinf(p)) {
        Grid gr = T.to_grid(g, false);
        double m = 0.0;
        for (double v : gr) m = std::max(m, std::abs(v));
        return m;
    }
    throw std::invalid_argument("wsp: p must be 2, 4, or inf");
}

void axpy(SpectralField& y, double alpha, const SpectralField& x) {
    for (std::size_t i = 0; i < y.a.size(); ++i) y.a[i] += alpha * x.a[i];
}

void scale(SpectralField& y, double alpha) {
    for (cplx& c : y.a) c *= alpha;
}

void axpy(PairField& y, double alpha, const PairField& x) {
    axpy(y.u, alpha, x.u);
    axpy(y.ut, alpha, x.ut);
}

void scale(PairField& y, double alpha) {
    scale(y.u, alpha);
    scale(y.ut, alpha);
}

bool all_finite(const PairField& x) {
    for (const cplx& c : x.u.a)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    for (const cplx& c : x.ut.a)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

}  // namespace hpq
