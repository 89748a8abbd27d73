#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace evlogic {

// Deterministic, platform-independent random source.
//
// Generator: xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
// Every derived quantity is specified exactly in terms of the 64-bit output
// stream so that independent implementations reproduce it bit for bit:
//
//   next_u64 : raw xoshiro256++ output
//   uniform  : ((next_u64 >> 11) + 0.5) * 2^-53          -> (0, 1)
//   normal   : Box-Muller, z = sqrt(-2 ln u1) * cos(2 pi u2), one value per
//              pair of uniforms (the sine partner is discarded)
//   gumbel   : -log(-log(uniform))
//   index(n) : floor(uniform * n), clamped to n - 1
//
// Derived streams: derive(seed, stream) hashes seed XOR (stream + 1) *
// 0x9E3779B97F4A7C15 through splitmix64; used to give each (scenario,
// sample, ...) task its own independent stream from one master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL);
    return splitmix64(s);
  }

  Rng split(std::uint64_t stream) const {
    return Rng(derive(state_[0] ^ state_[3], stream));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double gumbel() { return -std::log(-std::log(uniform())); }

  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    const double u = uniform();
    auto i = static_cast<std::size_t>(u * static_cast<double>(n));
    return i >= n ? n - 1 : i;  // guards the u ~ 1 edge
  }

  std::array<std::uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace evlogic
