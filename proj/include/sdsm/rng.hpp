#pragma once
#include <cstdint>

namespace sdsm {

// Philox4x32-10 block output for one (key, counter) pair.
struct PhiloxBlock {
  uint32_t v[4];
};

PhiloxBlock philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                       uint32_t k0, uint32_t k1);

// Counter-based stream addressed by (seed, replicate, tag).  Streams with
// distinct triples are statistically independent and never share state, so
// replicate-level parallelism is race-free and the draw sequence for a given
// replicate does not depend on scheduling.
class RngStream {
public:
  RngStream(uint64_t seed, uint32_t replicate, uint32_t tag);

  uint32_t next_u32();
  uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Standard normal via 128-layer ziggurat.
  double normal();
  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate);
  // Uniform integer in [0, n), n >= 1.
  uint64_t below(uint64_t n);

private:
  void refill();
  double normal_fix(int32_t hz, uint32_t iz);

  uint32_t key0_, key1_;
  uint32_t ctr2_, ctr3_;
  uint64_t block_ = 0;
  uint32_t buf_[4];
  int buf_pos_ = 4;
};

}  // namespace sdsm
