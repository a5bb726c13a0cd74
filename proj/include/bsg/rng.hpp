// Deterministic random number streams for reproducible simulations.
//
// Generator: SplitMix64. The state advances by a fixed odd constant
// (the 64-bit golden gamma) and each output is a bijective mix of the
// state, so the k-th draw is a pure function of (seed, k). Identical
// seeds give identical sequences on every platform.
//
// Stream-splitting rule: a simulation owns one root seed. The stream
// for (replication r, purpose p) is seeded with
//
//   mix64(root ^ mix64((r + 1) * 0x9E3779B97F4A7C15 + p))
//
// where `purpose` is a small enum tag (type draws, leader-action draws,
// and so on). Streams for distinct (r, p) pairs are independent for all
// practical purposes and can be consumed concurrently.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bsg {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Finalizer from the SplitMix64 reference implementation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return next_u64() % n;
  }

 private:
  std::uint64_t state_;
};

enum class StreamPurpose : std::uint64_t {
  kTypes = 1,        // per-round type-profile draws
  kLeaderAction = 2, // per-round realized leader action
  kGenerator = 3,    // instance generation
  kAux = 4,          // anything test-local
};

inline SplitMix64 make_stream(std::uint64_t root, std::uint64_t replication,
                              StreamPurpose purpose) {
  const std::uint64_t tag =
      mix64((replication + 1) * kGolden + static_cast<std::uint64_t>(purpose));
  return SplitMix64(mix64(root ^ tag));
}

// Inverse-CDF draw from an explicit probability vector. Probabilities may
// carry rounding slack; the final index absorbs it.
inline int sample_index(SplitMix64& rng, std::span<const double> probs) {
  if (probs.empty()) throw std::invalid_argument("sample_index: empty support");
  const double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

// Uniform point on the probability simplex (Dirichlet(1,...,1)) via
// normalized exponentials.
inline std::vector<double> sample_simplex(SplitMix64& rng, int dim) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (auto& v : x) {
    double u = rng.next_double();
    if (u <= 0.0) u = std::numeric_limits<double>::min();
    v = -std::log(u);
    total += v;
  }
  for (auto& v : x) v /= total;
  return x;
}

}  // namespace bsg
