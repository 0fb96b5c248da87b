#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace hpq {

using cplx = std::complex<double>;

// Square torus (R/[0,2pi])^2, spectral cutoff |n|_inf <= N, collocation
// grid M x M. All integrals carry the physical area 4*pi^2.
struct TorusSpec {
    int N = 8;           // retained modes n with |n|_inf <= N
    int M = 0;           // collocation points per dimension; 0 = 2k*N + 1
    double epsilon = 0.1;
    int two_k = 4;       // even degree of P

    int collocation() const { return M > 0 ? M : two_k * N + 1; }
    int band() const { return 2 * N + 1; }
    void validate() const;
};

// Fourier coefficients of a real field, |n|_inf <= N, row-major over
// (n1, n2) with n1 the slow index, each running -N..N.
struct SpectralField {
    int N = 0;
    std::vector<cplx> a;

    SpectralField() = default;
    explicit SpectralField(int n) : N(n), a(static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)), cplx(0.0, 0.0)) {}

    int band() const { return 2 * N + 1; }
    std::size_t size() const { return a.size(); }
    std::size_t index(int n1, int n2) const {
        return static_cast<std::size_t>((n1 + N) * (2 * N + 1) + (n2 + N));
    }
    cplx& at(int n1, int n2) { return a[index(n1, n2)]; }
    const cplx& at(int n1, int n2) const { return a[index(n1, n2)]; }
};

struct PairField {
    SpectralField u;
    SpectralField ut;

    PairField() = default;
    explicit PairField(int n) : u(n), ut(n) {}
};

// Real-space samples on the M x M grid, row-major.
using Grid = std::vector<double>;

// Immutable per-resolution context: mode tables, FFT plans, multiplier
// caches. Construct once, share read-only across threads.
class Torus {
public:
    explicit Torus(const TorusSpec& spec);
    ~Torus();
    Torus(const Torus&) = delete;
    Torus& operator=(const Torus&) = delete;

    const TorusSpec& spec() const { return spec_; }
    int N() const { return spec_.N; }
    int M() const { return M_; }
    double epsilon() const { return spec_.epsilon; }
    std::size_t mode_count() const { return nsq_.size(); }

    // |n|^2 and <n>^2 = 1 + |n|^2 per mode index
    double nsq(std::size_t i) const { return nsq_[i]; }
    double jbsq(std::size_t i) const { return 1.0 + nsq_[i]; }
    void mode(std::size_t i, int& n1, int& n2) const;

    // degree-(2k-1) products of band-limited fields are alias-free iff
    // M >= 2kN + 1
    bool dealiased() const { return M_ >= spec_.two_k * spec_.N + 1; }
    void require_dealiased() const;

    // <n>^(2s) table, cached per s
    std::shared_ptr<const std::vector<double>> bessel_weights(double s) const;

    // grid <-> coefficients (backed by FFTW; thread-safe execute)
    Grid to_grid(const SpectralField& f, bool check_symmetry = true) const;
    SpectralField from_grid(const Grid& g) const;

    // full M-grid spectrum of real samples (wrapped frequencies), and back
    std::vector<cplx> grid_spectrum(const Grid& g) const;
    Grid grid_from_spectrum(const std::vector<cplx>& spec) const;

    // multiply the full M-grid spectrum by exp(-delta*|m|^2) in place
    void grid_heat_multiplier(std::vector<cplx>& spec, double delta) const;

    // extract the |n|_inf <= N band from an M-grid spectrum
    SpectralField band_from_spectrum(const std::vector<cplx>& spec) const;

private:
    TorusSpec spec_;
    int M_;
    std::vector<double> nsq_;
    std::vector<int> grid_slot_;  // mode index -> wrapped M-grid slot
    std::vector<double> gridfreq_nsq_;  // |m|^2 per M-grid slot
    mutable std::mutex cache_mutex_;
    mutable std::map<double, std::shared_ptr<const std::vector<double>>> weight_cache_;
    void* plan_fwd_ = nullptr;  // grid -> spectrum (e^{-i n x})
    void* plan_bwd_ = nullptr;  // spectrum -> grid (e^{+i n x})
};

// --- spectral operations ------------------------------------------------

// largest relative deviation from u(-n) = conj(u(n))
double hermitian_error(const SpectralField& f);
void symmetrize(SpectralField& f);

SpectralField project(const SpectralField& f, int Nprime);
SpectralField bessel(const Torus& T, const SpectralField& f, double s);
SpectralField heat_smooth(const Torus& T, const SpectralField& f, double delta);

double l2_norm(const Torus& T, const SpectralField& f);
double sobolev(const Torus& T, const PairField& x, double s);
double wsp(const Torus& T, const SpectralField& f, double s, double p);

// in-place algebra
void axpy(SpectralField& y, double alpha, const SpectralField& x);
void scale(SpectralField& y, double alpha);
void axpy(PairField& y, double alpha, const PairField& x);
void scale(PairField& y, double alpha);

bool all_finite(const PairField& x);

}  // namespace hpq
