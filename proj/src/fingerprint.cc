//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/fingerprint.h"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace retro {

Fingerprint::Fingerprint(int nbits): width_(nbits) {
  if (nbits < 64 || (nbits & (nbits - 1)) != 0)
    throw std::invalid_argument("fingerprint width must be a power of two "
                                ">= 64");
  words_.assign(static_cast<std::size_t>(nbits / 64), 0);
}

bool Fingerprint::test(int bit) const {
  return (words_[bit >> 6] >> (bit & 63)) & 1U;
}

void Fingerprint::set(int bit) {
  std::uint64_t &w = words_[bit >> 6];
  const std::uint64_t mask = std::uint64_t { 1 } << (bit & 63);
  if ((w & mask) == 0) {
    w |= mask;
    ++nbits_set_;
  }
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < width_; ++i) {
    if (test(i))
      bits.push_back(i);
  }
  return bits;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ mix64(v + 0x9e3779b97f4a7c15ULL));
}

std::vector<bool> ring_bonds(const MolGraph &mol) {
  // Iterative Tarjan bridge finding.
  const int n = mol.num_atoms();
  std::vector<bool> ring(mol.num_bonds(), true);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int s = 0; s < n; ++s) {
    if (disc[s] >= 0)
      continue;
    disc[s] = low[s] = timer++;
    stack.push_back({ s, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto nbrs = mol.neighbors(f.atom);
      if (f.next < nbrs.size()) {
        const MolGraph::Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({ nb.atom, nb.bond, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
        continue;
      }
      const Frame done = f;
      stack.pop_back();
      if (!stack.empty()) {
        const int parent = stack.back().atom;
        low[parent] = std::min(low[parent], low[done.atom]);
        if (low[done.atom] > disc[parent])
          ring[done.parent_bond] = false;
      }
    }
  }
  return ring;
}

Fingerprint morgan_fingerprint(const MolGraph &mol, int radius, int nbits) {
  if (radius < 0)
    throw std::invalid_argument("radius must be >= 0");
  Fingerprint fp(nbits);
  const int n = mol.num_atoms();
  const std::uint64_t mask = static_cast<std::uint64_t>(nbits - 1);

  const std::vector<bool> ring = ring_bonds(mol);
  std::vector<std::uint64_t> ids(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = mol.atom(i);
    int heavy = 0;
    bool in_ring = false;
    for (const MolGraph::Neighbor &nb: mol.neighbors(i)) {
      if (mol.atom(nb.atom).atomic_number != 1)
        ++heavy;
      if (ring[nb.bond])
        in_ring = true;
    }
    std::uint64_t h = 0;
    h = hash_combine(h, a.atomic_number);
    h = hash_combine(h, static_cast<std::uint64_t>(
                            static_cast<std::int64_t>(a.charge)));
    h = hash_combine(h, static_cast<std::uint64_t>(heavy));
    h = hash_combine(h, a.hydrogens);
    h = hash_combine(h, a.aromatic ? 1 : 0);
    h = hash_combine(h, in_ring ? 1 : 0);
    ids[i] = h;
    fp.set(static_cast<int>(h & mask));
  }

  std::vector<std::uint64_t> next(n);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int k = 1; k <= radius; ++k) {
    for (int i = 0; i < n; ++i) {
      env.clear();
      for (const MolGraph::Neighbor &nb: mol.neighbors(i)) {
        env.emplace_back(static_cast<std::uint64_t>(mol.bond(nb.bond).order),
                         ids[nb.atom]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(0, ids[i]);
      h = hash_combine(h, static_cast<std::uint64_t>(k));
      for (const auto &[order, id]: env) {
        h = hash_combine(h, order);
        h = hash_combine(h, id);
      }
      next[i] = h;
      fp.set(static_cast<int>(h & mask));
    }
    ids.swap(next);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width())
    throw std::invalid_argument("fingerprint width mismatch");
  int both = 0;
  int either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (either == 0)
    return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

Clustering butina_cluster(const std::vector<std::vector<int>> &neighbors) {
  const int n = static_cast<int>(neighbors.size());
  std::vector<int> open_count(n);
  for (int i = 0; i < n; ++i)
    open_count[i] = static_cast<int>(neighbors[i].size());
  std::vector<char> assigned(n, 0);

  auto take = [&](int item) {
    assigned[item] = 1;
    for (int nb: neighbors[item])
      --open_count[nb];
  };

  Clustering result;
  int remaining = n;
  while (remaining > 0) {
    int centroid = -1;
    for (int i = 0; i < n; ++i) {
      if (!assigned[i] && (centroid < 0 || open_count[i] > open_count[centroid]))
        centroid = i;
    }
    Cluster cluster { centroid, { centroid } };
    take(centroid);
    std::vector<int> members;
    for (int nb: neighbors[centroid]) {
      if (!assigned[nb])
        members.push_back(nb);
    }
    std::sort(members.begin(), members.end());
    for (int m: members)
      take(m);
    cluster.members.insert(cluster.members.end(), members.begin(),
                           members.end());
    remaining -= static_cast<int>(cluster.members.size());
    result.clusters.push_back(std::move(cluster));
  }
  return result;
}

Clustering butina_cluster(int n, const DistanceFn &distance, double cutoff) {
  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(i, j) <= cutoff) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  return butina_cluster(neighbors);
}

std::vector<std::vector<int>>
tanimoto_neighbors(const std::vector<Fingerprint> &fps, double cutoff,
                   int threads) {
  const int n = static_cast<int>(fps.size());
  if (threads <= 0)
    threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  std::vector<std::vector<int>> rows(n);
  auto work = [&](int t) {
    for (int i = t; i < n; i += threads) {
      for (int j = 0; j < n; ++j) {
        if (j != i && 1.0 - tanimoto(fps[i], fps[j]) <= cutoff)
          rows[i].push_back(j);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t)
    pool.emplace_back(work, t);
  work(0);
  for (std::thread &th: pool)
    th.join();
  return rows;
}

} // namespace retro
