#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace spectral_causal {

// Worker count from SPECTRAL_CAUSAL_THREADS (0 or unset = hardware concurrency).
std::size_t thread_budget();

// Runs body(i) for i in [0, count). Work is split into contiguous blocks, so
// callers writing to disjoint output slots get scheduling-independent results.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

// SplitMix64 finalizer; used to derive independent sub-seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace spectral_causal
