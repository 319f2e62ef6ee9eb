#pragma once

// Counter-based random streams. A stream is identified by a 64-bit key and
// produces mix64(key + gamma * i) for i = 1, 2, ...; keys for independent
// substreams are derived by hashing a parent key with a component index, so
// any (seed, cell, repetition, attempt) tuple maps to its own stream without
// shared state between workers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>

namespace reprindt {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t component) noexcept {
  const std::uint64_t salted = mix64(component * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL);
  return mix64((parent ^ salted) + kGoldenGamma);
}

constexpr std::uint64_t substream_key(std::uint64_t master,
                                      std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(master + kGoldenGamma);
  for (std::uint64_t component : path) key = derive_key(key, component);
  return key;
}

// Tags keep streams drawn for different purposes apart even when the numeric
// path components coincide.
enum class StreamPurpose : std::uint64_t {
  sampling = 0x5a4d50,
  tree = 0x545245,
  importance = 0x494d50,
  synthetic = 0x53594e,
};

constexpr std::uint64_t purpose_tag(StreamPurpose purpose) noexcept {
  return static_cast<std::uint64_t>(purpose);
}

class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr std::uint64_t next() noexcept { return mix64(key_ + kGoldenGamma * ++counter_); }

  // Unbiased integer in [0, bound), Lemire's multiply-and-reject method.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t floor = (0 - bound) % bound;
      while (low < floor) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one draw per call.
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Moves a uniformly chosen k-subset into the first k positions.
  template <class T>
  void partial_shuffle(std::span<T> items, std::size_t k) noexcept {
    const std::size_t n = items.size();
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
      std::swap(items[i], items[j]);
    }
  }

  template <class T>
  void shuffle(std::span<T> items) noexcept {
    partial_shuffle(items, items.size());
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace reprindt
