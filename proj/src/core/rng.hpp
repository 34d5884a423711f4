#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace msrd {

// Philox4x32-10 block function.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

// Stream keyed by the master seed; counter words 2..3 hold the trajectory index,
// words 0..1 count blocks within the trajectory.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t trajectory)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          traj_(trajectory) {}

    std::uint64_t next_u64() {
        if (used_ == 2) refill();
        const std::uint64_t v = (static_cast<std::uint64_t>(block_[2 * used_]) << 32) | block_[2 * used_ + 1];
        ++used_;
        return v;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exp(rate) waiting time; rate > 0.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t blocks_used() const { return block_index_; }

private:
    void refill() {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(block_index_),
                                static_cast<std::uint32_t>(block_index_ >> 32),
                                static_cast<std::uint32_t>(traj_), static_cast<std::uint32_t>(traj_ >> 32)};
        block_ = philox4x32_10(ctr, key_);
        ++block_index_;
        used_ = 0;
    }

    PhiloxKey key_;
    std::uint64_t traj_;
    std::uint64_t block_index_ = 0;
    PhiloxCounter block_{};
    int used_ = 2;
};

}  // namespace msrd
