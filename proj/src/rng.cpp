#include "volpath/rng.hpp"

#include <cmath>
#include <numbers>

namespace volpath {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

double uniform_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

void fill_normal_pairs(std::uint64_t seed, std::uint64_t path, std::uint64_t first_pair,
                       std::size_t n_pairs, double* out) {
    const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const std::uint64_t pair = first_pair + i;
        const PhiloxCounter r = philox4x32(
            {static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
             static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
            key);
        const double u1 = uniform_open((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
        const double u2 = uniform_open((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        out[2 * i] = rad * std::cos(ang);
        out[2 * i + 1] = rad * std::sin(ang);
    }
}

}  // namespace volpath
