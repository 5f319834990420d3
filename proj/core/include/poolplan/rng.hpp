#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace poolplan::rng {

/// Stateless 64-bit finalizer (the splitmix64 output function). Used to turn
/// structured inputs such as (seed, counter) pairs into well-scrambled state.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// One splitmix64 step: advances the state and returns the next value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(state);
}

/// Derives an independent sub-seed from a master seed and a counter. The
/// mapping is pure, so stream i of seed s is the same on every run and on
/// every worker thread.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t counter) {
  std::uint64_t state = master_seed ^ mix64(counter + 0x632be59bd9b4e019ULL);
  return splitmix64(state);
}

/// xoshiro256** generator seeded via a counter-based mix of (master seed,
/// stream index). Self-contained so sequences are identical across standard
/// libraries and platforms; std::shuffle and the std distributions are not
/// reproducible across implementations and must not be used with it.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t state = derive_seed(master_seed, stream_index);
    for (auto& word : state_) word = splitmix64(state);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Unbiased uniform integer in [0, bound); bound must be positive.
  /// Lemire multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using uint128 = unsigned __int128;
    uint128 m = static_cast<uint128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Fisher-Yates shuffle over raw storage.
  template <typename T>
  void shuffle(T* data, std::size_t n) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      const T tmp = data[i - 1];
      data[i - 1] = data[j];
      data[j] = tmp;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    shuffle(v.data(), v.size());
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace poolplan::rng
