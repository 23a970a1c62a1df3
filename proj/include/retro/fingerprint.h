//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_FINGERPRINT_H_
#define RETRO_FINGERPRINT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "retro/molgraph.h"

namespace retro {

// Fixed-width bit vector. Width is a power of two and at least 64.
class Fingerprint {
public:
  explicit Fingerprint(int nbits = 1024);

  int width() const { return width_; }
  int count() const { return nbits_set_; }
  bool test(int bit) const;
  void set(int bit);
  std::vector<int> on_bits() const;

  const std::vector<std::uint64_t> &words() const { return words_; }

  friend bool operator==(const Fingerprint &,
                         const Fingerprint &) = default;

private:
  int width_;
  int nbits_set_ = 0;
  std::vector<std::uint64_t> words_;
};

// 64-bit avalanche mixer (splitmix64 finalizer):
//   x ^= x >> 30; x *= 0xbf58476d1ce4e5b9;
//   x ^= x >> 27; x *= 0x94d049bb133111eb;
//   x ^= x >> 31;
std::uint64_t mix64(std::uint64_t x);

// combine(seed, v) = mix64(seed ^ mix64(v + 0x9e3779b97f4a7c15)).
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v);

// Circular (ECFP-like) fingerprint.
//
// Radius-0 identifier of an atom: hash_combine folded left from seed 0 over
// (atomic number, charge, heavy degree, explicit H, aromatic, in-ring),
// negative charges as two's complement. In-ring means the atom touches a
// bond that is not a bridge. Iteration k (1..radius) replaces each
// identifier by the fold of (previous identifier, k, then the sorted pairs
// bond-order code and neighbour identifier). Every identifier of every
// iteration 0..radius sets bit (id & (nbits - 1)).
Fingerprint morgan_fingerprint(const MolGraph &mol, int radius = 2,
                               int nbits = 1024);

// |a & b| / |a | b|; 1.0 when both are empty. Throws std::invalid_argument
// on width mismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

// Bond-level ring membership (true for bonds that are not bridges).
std::vector<bool> ring_bonds(const MolGraph &mol);

struct Cluster {
  int centroid;
  // Centroid first, then the remaining members in ascending index order.
  std::vector<int> members;
};

struct Clustering {
  std::vector<Cluster> clusters;
};

using DistanceFn = std::function<double(int, int)>;

// Sphere-exclusion (Butina) clustering. Neighbours are pairs with distance
// <= cutoff. The centroid at every step is the unassigned item with the
// most unassigned neighbours, lowest index on ties; it takes every
// unassigned neighbour with it.
Clustering butina_cluster(int n, const DistanceFn &distance, double cutoff);

// Same, from precomputed neighbour lists (each list excludes the item).
Clustering butina_cluster(const std::vector<std::vector<int>> &neighbors);

// Neighbour lists for 1 - Tanimoto <= cutoff, computed in parallel over
// rows.
std::vector<std::vector<int>>
tanimoto_neighbors(const std::vector<Fingerprint> &fps, double cutoff,
                   int threads = 0);

} // namespace retro

#endif // RETRO_FINGERPRINT_H_
