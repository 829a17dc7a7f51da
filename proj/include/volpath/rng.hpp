#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace volpath {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function (Salmon et al. 2011).
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Two standard normals per counter value via Box-Muller on 52-bit uniforms.
// The counter is (pair index, path index), the key is the seed; any normal
// can therefore be regenerated without touching shared state.
void fill_normal_pairs(std::uint64_t seed, std::uint64_t path, std::uint64_t first_pair,
                       std::size_t n_pairs, double* out);

double uniform_open(std::uint64_t bits);

}  // namespace volpath
