#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace fcg {

// Portable seeded generator.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so every
// draw below is derived from raw 64-bit outputs with explicit arithmetic.
//
// Seeding discipline: a stream is identified by a root seed plus a path of
// integer labels (for example {seed, kEnvStream, env_index}). Each label is
// folded into the key with one SplitMix64 round, and the final key seeds the
// engine directly. Two different paths give statistically independent streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t splitmix64(std::uint64_t x);
  static std::uint64_t derive(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> path);
  static Rng stream(std::uint64_t seed,
                    std::initializer_list<std::uint64_t> path) {
    return Rng(derive(seed, path));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform in (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller (one value per call).
  double normal();
  // Categorical draw from a probability vector that sums to ~1.
  std::size_t categorical(std::span<const double> probs);

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stream labels used across the project.
inline constexpr std::uint64_t kStreamEnv = 0x656e76;       // "env"
inline constexpr std::uint64_t kStreamAgent = 0x6167;       // "ag"
inline constexpr std::uint64_t kStreamSample = 0x736d70;    // "smp"
inline constexpr std::uint64_t kStreamShuffle = 0x736866;   // "shf"
inline constexpr std::uint64_t kStreamEval = 0x6576616c;    // "eval"
inline constexpr std::uint64_t kStreamVerify = 0x766572;    // "ver"

}  // namespace fcg
