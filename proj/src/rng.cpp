#include "sdsm/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace sdsm {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(uint32_t& c0, uint32_t& c1, uint32_t& c2, uint32_t& c3,
                         uint32_t k0, uint32_t k1) {
  uint64_t p0 = uint64_t(kMul0) * c0;
  uint64_t p1 = uint64_t(kMul1) * c2;
  uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
  uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
  uint32_t n0 = hi1 ^ c1 ^ k0;
  uint32_t n1 = lo1;
  uint32_t n2 = hi0 ^ c3 ^ k1;
  uint32_t n3 = lo0;
  c0 = n0; c1 = n1; c2 = n2; c3 = n3;
}

// Ziggurat tables for the standard normal, 128 layers (Marsaglia & Tsang).
struct ZigTables {
  uint32_t kn[128];
  double wn[128];
  double fn[128];
  ZigTables() {
    const double m1 = 2147483648.0;
    double dn = 3.442619855899, tn = dn;
    const double vn = 9.91256303526217e-3;
    double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = uint32_t((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = uint32_t((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

const ZigTables& zig() {
  static const ZigTables t;
  return t;
}

constexpr double kZigR = 3.442619855899;

}  // namespace

PhiloxBlock philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                       uint32_t k0, uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    philox_round(c0, c1, c2, c3, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

RngStream::RngStream(uint64_t seed, uint32_t replicate, uint32_t tag)
    : key0_(uint32_t(seed)), key1_(uint32_t(seed >> 32)),
      ctr2_(tag), ctr3_(replicate) {}

void RngStream::refill() {
  PhiloxBlock b = philox4x32(uint32_t(block_), uint32_t(block_ >> 32),
                             ctr2_, ctr3_, key0_, key1_);
  buf_[0] = b.v[0]; buf_[1] = b.v[1]; buf_[2] = b.v[2]; buf_[3] = b.v[3];
  ++block_;
  buf_pos_ = 0;
}

uint32_t RngStream::next_u32() {
  if (buf_pos_ >= 4) refill();
  return buf_[buf_pos_++];
}

uint64_t RngStream::next_u64() {
  uint64_t hi = next_u32();
  uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  int32_t hz = int32_t(next_u32());
  uint32_t iz = uint32_t(hz) & 127u;
  uint32_t mag = uint32_t(std::abs(int64_t(hz)));
  if (mag < zig().kn[iz]) return hz * zig().wn[iz];
  return normal_fix(hz, iz);
}

double RngStream::normal_fix(int32_t hz, uint32_t iz) {
  const ZigTables& t = zig();
  for (;;) {
    double x = hz * t.wn[iz];
    if (iz == 0) {
      // Tail beyond R, Marsaglia's exact method.
      double y;
      do {
        x = -std::log(1.0 - uniform()) / kZigR;
        y = -std::log(1.0 - uniform());
      } while (y + y < x * x);
      return hz > 0 ? kZigR + x : -kZigR - x;
    }
    if (t.fn[iz] + uniform() * (t.fn[iz - 1] - t.fn[iz]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
    hz = int32_t(next_u32());
    iz = uint32_t(hz) & 127u;
    uint32_t mag = uint32_t(std::abs(int64_t(hz)));
    if (mag < t.kn[iz]) return hz * t.wn[iz];
  }
}

double RngStream::exponential(double rate) {
  return -std::log(1.0 - uniform()) / rate;
}

uint64_t RngStream::below(uint64_t n) {
  return next_u64() % n;
}

}  // namespace sdsm
