#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace atomlight {

/// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
/// The key is (seed, stream); each 256-bit counter block yields four words.
/// Streams with distinct ids are independent substreams of one seed.
class Philox4x64 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    Philox4x64(std::uint64_t seed, std::uint64_t stream = 0) : key_{seed, stream} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    static Block block(Block ctr, Key key) {
        constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
        constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
        for (int r = 0; r < 10; ++r) {
            const unsigned __int128 p0 = (unsigned __int128)M0 * ctr[0];
            const unsigned __int128 p1 = (unsigned __int128)M1 * ctr[2];
            const std::uint64_t hi0 = std::uint64_t(p0 >> 64), lo0 = std::uint64_t(p0);
            const std::uint64_t hi1 = std::uint64_t(p1 >> 64), lo1 = std::uint64_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

    result_type operator()() {
        if (idx_ == 4) {
            buf_ = block(ctr_, key_);
            for (auto& c : ctr_)
                if (++c != 0) break;
            idx_ = 0;
        }
        return buf_[idx_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal by the Box-Muller transform.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    Key key_;
    Block ctr_{0, 0, 0, 0};
    Block buf_{};
    int idx_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace atomlight
