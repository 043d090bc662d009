#ifndef FUNDSIM_RNG_HPP
#define FUNDSIM_RNG_HPP

// Counter-based random numbers (Philox 4x64, 10 rounds). Every draw is a pure
// function of (master seed, path, stock, step), so results never depend on
// thread count, evaluation order, or how many draws other paths consumed.
//
// Reference: Salmon, Moraes, Dror, Shaw. "Parallel random numbers: as easy as
// 1, 2, 3." SC 2011.

#include <array>
#include <cstdint>

namespace fundsim::rng {

namespace detail {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace detail

// One 10-round Philox 4x64 evaluation. Matches the Random123/NumPy stream for
// the same counter and key.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
    using namespace detail;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

// First output word of the block keyed by seed with counter (path, stock, step, 0).
// `step` 0 is reserved for the initial-state draw; transitions use 1..K.
inline std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t path, std::uint64_t stock,
                              std::uint64_t step) {
    return philox4x64({path, stock, step, 0}, {seed, 0})[0];
}

// Map 64 random bits to the open interval (0,1) on the grid (m + 1/2) * 2^-52.
// The grid is exactly closed under u -> 1-u, which keeps symmetric transforms
// of u (sign flips, normal quantiles) exactly antisymmetric.
inline double uniform_open01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

inline double draw_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t stock,
                           std::uint64_t step) {
    return uniform_open01(draw_u64(seed, path, stock, step));
}

}  // namespace fundsim::rng

#endif  // FUNDSIM_RNG_HPP
