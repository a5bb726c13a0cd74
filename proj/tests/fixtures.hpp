// Shared instance constructions for the unit and acceptance suites, so both
// exercise exactly the same frozen seed suites.

#pragma once

#include "bsg/harness.hpp"

namespace bsg::fixtures {

// Random-instance mix for the offline oracle-equivalence suite:
// n <= 2, K <= 3, A = 2, L in {2, 3}, alternating distribution kinds.
inline GameInstance oracle_suite_instance(int seed) {
  SplitMix64 pick = make_stream(static_cast<std::uint64_t>(seed), 0,
                                StreamPurpose::kAux);
  const int n = 1 + static_cast<int>(pick.next_below(2));
  const int K = 1 + static_cast<int>(pick.next_below(3));
  const int L = 2 + static_cast<int>(pick.next_below(2));
  const DistKind kind = (seed % 2) ? DistKind::kGeneral : DistKind::kIndependent;
  return gen_random_instance(n, L, 2, K, kind, static_cast<std::uint64_t>(seed));
}

// Tiny-instance mix for the LP-reformulation cross-check:
// n = 1, K <= 2, A = 2, L = 2.
inline GameInstance tiny_suite_instance(int seed) {
  return gen_random_instance(1, 2, 2, 1 + (seed % 2), DistKind::kGeneral,
                             static_cast<std::uint64_t>(7000 + seed));
}

}  // namespace bsg::fixtures
