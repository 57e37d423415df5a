#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hsnli {

using Engine = std::mt19937_64;

// Unbiased draw from [0, n) by rejection: raw 64-bit outputs below
// (2^64 - n) mod n are discarded, the remainder is reduced with `% n`.
// The standard distributions are implementation-defined, so every seeded
// procedure in the library goes through this function to stay reproducible
// across standard libraries.
std::uint64_t uniform_index(Engine& engine, std::uint64_t n);

// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform_unit(Engine& engine);

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace hsnli
