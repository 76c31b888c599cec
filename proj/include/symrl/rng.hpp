#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace symrl {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent seed for the named stream of a run, e.g.
/// `stream_seed(run_seed, "env", episode)`. Same inputs, same seed.
std::uint64_t stream_seed(std::uint64_t run_seed, std::string_view stream,
                          std::uint64_t index = 0) noexcept;

inline Rng make_rng(std::uint64_t run_seed, std::string_view stream,
                    std::uint64_t index = 0) {
  return Rng(stream_seed(run_seed, stream, index));
}

}  // namespace symrl
