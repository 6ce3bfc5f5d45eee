#ifndef SITSQ_RNG_HPP
#define SITSQ_RNG_HPP

#include <cstdint>

namespace sitsq {

// splitmix64, used only to expand seeds into generator state.
struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ with a dedicated stream per (master_seed, trajectory_index).
// The stream is a pure function of those two numbers, so trajectories are
// reproducible independent of thread scheduling.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) {
        SplitMix64 sm(master_seed ^ (0x9e3779b97f4a7c15ULL * (stream_index + 1)));
        for (auto& w : s_) w = sm.next();
        // avoid the all-zero state (probability ~2^-256, but cheap to rule out)
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
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

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via 128-layer ziggurat
    double normal();

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    double normal_from_tail(bool negative);

    std::uint64_t s_[4];
};

} // namespace sitsq

#endif
