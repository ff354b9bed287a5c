#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "sdsm/rng.hpp"

namespace sdsm {

// Runs body(rep, stream, out) for rep in [0, n) across width threads.  Each
// replicate gets the private stream (seed, rep, tag) and writes its
// values_per_rep results into the slot addressed by rep, so the returned
// layout does not depend on width or scheduling.
std::vector<double> parallel_replicates(
    long n, int width, std::uint64_t seed, std::uint32_t tag, int values_per_rep,
    const std::function<void(long rep, RngStream&, double* out)>& body);

// Stream tags partitioned by experiment component.
inline constexpr std::uint32_t kTagForward = 1;
inline constexpr std::uint32_t kTagDual = 2;
inline constexpr std::uint32_t kTagRescaleBase = 8;    // + theta_scale index
inline constexpr std::uint32_t kTagCatalystBase = 64;  // + 2*k index (+1 dual)

}  // namespace sdsm
