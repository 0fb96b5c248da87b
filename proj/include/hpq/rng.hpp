#pragma once

#include <cstdint>
#include <cmath>

namespace hpq {

// splitmix64, used only to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with a Box-Muller normal on top. Self-contained so that
// streams are reproducible independently of the standard library.
//
// Stream derivation: stream (seed, purpose, index) expands
// seed ^ mix(purpose) ^ mix(index) through splitmix64 into the four state
// words. Index i always yields the same stream for a fixed (seed, purpose),
// no matter how many streams a run requests.
class RngStream {
public:
    RngStream() : RngStream(0, 0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
        std::uint64_t pm = purpose, im = index;
        std::uint64_t key = seed ^ splitmix64(pm) ^ splitmix64(im);
        for (auto& w : s_) w = splitmix64(key);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in (0,1); never returns 0
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller (cached spare)
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
    bool have_spare_;
    double spare_;
};

// Purpose tags for stream derivation. Fixed values; part of the
// reproducibility contract (see README).
namespace stream_purpose {
constexpr std::uint64_t rho0 = 1;
constexpr std::uint64_t gibbs_chain = 2;
constexpr std::uint64_t dynamics = 3;
constexpr std::uint64_t dynamics_half = 4;
constexpr std::uint64_t covariance = 5;
constexpr std::uint64_t coupling = 6;
constexpr std::uint64_t coupling_direct = 7;
constexpr std::uint64_t hmc_gate = 8;
constexpr std::uint64_t ediff = 9;
constexpr std::uint64_t sqe = 10;
constexpr std::uint64_t init_data = 11;
}  // namespace stream_purpose

}  // namespace hpq
