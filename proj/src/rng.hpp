#pragma once
// Philox4x64-10 counter-based generator. A stream is identified by a
// 128-bit key (seed, stream id); draws walk the counter.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mst {

class Philox {
 public:
  using result_type = std::uint64_t;
  using block = std::array<std::uint64_t, 4>;

  Philox(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (idx_ == 4) {
      buf_ = bijection(ctr_, key_);
      if (++ctr_[0] == 0) ++ctr_[1];
      idx_ = 0;
    }
    return buf_[idx_++];
  }

  // uniform on (0,1), never 0 or 1
  double uniform() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t lim = max() - max() % n;
    std::uint64_t x;
    do x = (*this)();
    while (x >= lim);
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * 3.14159265358979323846 * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  static block bijection(block c, std::array<std::uint64_t, 2> k) {
    constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
    for (int r = 0; r < 10; ++r) {
      if (r) k[0] += W0, k[1] += W1;
      const unsigned __int128 p0 = (unsigned __int128)M0 * c[0];
      const unsigned __int128 p1 = (unsigned __int128)M1 * c[2];
      const std::uint64_t hi0 = p0 >> 64, lo0 = std::uint64_t(p0);
      const std::uint64_t hi1 = p1 >> 64, lo1 = std::uint64_t(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }

 private:
  std::array<std::uint64_t, 2> key_;
  block ctr_{0, 0, 0, 0};
  block buf_{};
  int idx_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mst
