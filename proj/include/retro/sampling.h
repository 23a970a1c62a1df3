//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_SAMPLING_H_
#define RETRO_SAMPLING_H_

#include <cstdint>
#include <random>
#include <vector>

namespace retro {

// All randomized operations draw from std::mt19937_64, whose output
// sequence is fixed by the C++ standard. The library distributions are
// not portable, so bounded integers are derived by hand:
//
//   uniform_below(n): threshold = (2^64 - n) mod n; draw x until
//   x >= threshold; return x mod n.
//
// Rejecting the low `threshold` values leaves a multiple of n outcomes,
// so the result is exactly uniform.
using Rng = std::mt19937_64;

std::uint64_t uniform_below(Rng &rng, std::uint64_t n);

// Draws `k` distinct indices from [0, n) by a partial Fisher-Yates shuffle
// over the identity array: for i in 0..k-1, swap position i with
// i + uniform_below(n - i). Returns the first k positions in draw order.
// Throws std::invalid_argument when k > n.
std::vector<std::size_t> sample_without_replacement(Rng &rng, std::size_t n,
                                                    std::size_t k);

} // namespace retro

#endif // RETRO_SAMPLING_H_
