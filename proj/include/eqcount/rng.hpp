#pragma once

#include <cmath>
#include <cstdint>

namespace eqc {

// Counter-based generator: every output is a pure function of
// (seed, stream, counter), so any sample index can be generated on any
// thread with identical bits. Mixing is the splitmix64 finalizer applied
// to a Weyl-sequenced key.
namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::mix64(detail::mix64(seed) ^ (0xd2b74407b1ce6e93ULL + stream))), ctr_(0) {}

    // Child stream for sample index i: independent of this stream's position,
    // so parallel drivers can hand out substreams without synchronization.
    Rng fork(std::uint64_t i) const {
        Rng c(0);
        c.key_ = detail::mix64(key_ ^ detail::mix64(0x8bb84b93962eacc9ULL ^ i));
        c.ctr_ = 0;
        c.cached_ = false;
        return c;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

    // Uniform on (0,1]; never returns 0 so log() is safe.
    double next_unit() {
        return (double(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double next_gauss() {
        if (cached_) {
            cached_ = false;
            return cache_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        cached_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
    bool cached_ = false;
    double cache_ = 0.0;
};

} // namespace eqc
