#pragma once

// Seeding and sampling helpers. Engines are std::mt19937_64, whose output
// sequence is fixed by the standard; the conversions below avoid the
// implementation-defined std distributions so runs are bit-reproducible
// across standard libraries.

#include <cstdint>
#include <random>

namespace bolt {

using Rng = std::mt19937_64;

/// Independent per-trial streams.
enum class Stream : std::uint64_t { kEnvironment = 1, kAgent = 2 };

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Substream seed = splitmix64(splitmix64(splitmix64(master) ^ trial) ^ stream).
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial,
                                    Stream stream) {
  return splitmix64(splitmix64(splitmix64(master_seed) ^ trial) ^
                    static_cast<std::uint64_t>(stream));
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t trial, Stream stream) {
  return Rng(derive_seed(master_seed, trial, stream));
}

/// Uniform on [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on {0, ..., n-1}; one draw, multiply-shift (bias below 2^-32 for
/// the small n used here).
inline int uniform_index(Rng& rng, int n) {
  const auto wide = static_cast<unsigned __int128>(rng()) * static_cast<std::uint64_t>(n);
  return static_cast<int>(wide >> 64);
}

}  // namespace bolt
