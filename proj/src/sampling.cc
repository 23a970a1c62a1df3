//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/sampling.h"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace retro {

std::uint64_t uniform_below(Rng &rng, std::uint64_t n) {
  if (n == 0)
    throw std::invalid_argument("uniform_below needs n >= 1");
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold)
      return x % n;
  }
}

std::vector<std::size_t> sample_without_replacement(Rng &rng, std::size_t n,
                                                    std::size_t k) {
  if (k > n)
    throw std::invalid_argument("sample size " + std::to_string(k)
                                + " exceeds population " + std::to_string(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t { 0 });
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_below(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

} // namespace retro
