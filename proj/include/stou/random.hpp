#pragma once

#include <cstdint>
#include <random>

namespace stou {

using Rng = std::mt19937_64;

/// Sub-stream seed for (master seed, dataset index, replication index).
/// SplitMix64 finalizer chained over the three words; documented in run
/// manifests so any dataset or replication can be replayed alone.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t dataset, std::uint64_t replication) noexcept;

inline Rng make_stream(std::uint64_t seed) { return Rng(seed); }

}  // namespace stou
