//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.h"
#include "retro/fingerprint.h"

namespace retro {
namespace {

Fingerprint bits(std::initializer_list<int> on, int width = 64) {
  Fingerprint fp(width);
  for (int b: on)
    fp.set(b);
  return fp;
}

TEST(Fingerprint, WidthMustBePowerOfTwo) {
  EXPECT_THROW(Fingerprint(100), std::invalid_argument);
  EXPECT_THROW(Fingerprint(32), std::invalid_argument);
  EXPECT_NO_THROW(Fingerprint(64));
}

TEST(Fingerprint, CountTracksSetBits) {
  Fingerprint fp(128);
  fp.set(3);
  fp.set(3);
  fp.set(127);
  EXPECT_EQ(fp.count(), 2);
  EXPECT_EQ(fp.on_bits(), (std::vector<int> { 3, 127 }));
}

TEST(Mixing, FrozenValues) {
  // Any change here silently changes every fingerprint.
  EXPECT_EQ(mix64(0), 0u);
  EXPECT_EQ(mix64(1), 0x5692161d100b05e5ULL);
  EXPECT_EQ(hash_combine(0, 0), mix64(mix64(0x9e3779b97f4a7c15ULL)));
}

TEST(Morgan, SingleAtomSetsABit) {
  EXPECT_GE(morgan_fingerprint(parse_smiles("C"), 0, 1024).count(), 1);
}

TEST(Morgan, DistinguishesEthanolFromPropane) {
  EXPECT_NE(morgan_fingerprint(parse_smiles("CCO")),
            morgan_fingerprint(parse_smiles("CCC")));
}

TEST(Morgan, LargerRadiusIsASuperset) {
  for (const char *s: { "CCO", "c1ccccc1O", "CC(=O)Oc1ccccc1C(=O)O" }) {
    const Fingerprint r0 = morgan_fingerprint(parse_smiles(s), 0);
    const Fingerprint r2 = morgan_fingerprint(parse_smiles(s), 2);
    for (int b: r0.on_bits())
      EXPECT_TRUE(r2.test(b)) << s;
  }
}

TEST(Morgan, PermutationInvariant) {
  std::mt19937_64 rng(5);
  const auto corpus =
      testing::load_corpus(std::string(RETRO_TEST_DATA_DIR) + "/corpus.smi");
  for (const std::string &s: corpus) {
    const MolGraph m = parse_smiles(s);
    const Fingerprint fp = morgan_fingerprint(m);
    for (int k = 0; k < 5; ++k)
      ASSERT_EQ(morgan_fingerprint(testing::random_permutation(m, rng)), fp)
          << s;
  }
}

TEST(Morgan, FrozenBitsForEthanol) {
  // Frozen on first implementation; guards the documented hash scheme.
  const std::vector<int> got =
      morgan_fingerprint(parse_smiles("CCO"), 2, 1024).on_bits();
  EXPECT_EQ(got, (std::vector<int> { 42, 183, 271, 536, 589, 590, 674, 742,
                                     977 }));
  EXPECT_EQ(got, morgan_fingerprint(parse_smiles("OCC"), 2, 1024).on_bits());
}

TEST(RingBonds, BridgesAreNotRingBonds) {
  const MolGraph m = parse_smiles("C1CC1CC");
  const std::vector<bool> ring = ring_bonds(m);
  EXPECT_EQ(std::count(ring.begin(), ring.end(), true), 3);
}

TEST(Tanimoto, SetArithmetic) {
  const Fingerprint a = bits({ 1, 2 });
  const Fingerprint b = bits({ 2, 3 });
  EXPECT_DOUBLE_EQ(tanimoto(a, b), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(tanimoto(a, a), 1.0);
  EXPECT_DOUBLE_EQ(tanimoto(bits({ 1 }), bits({ 2 })), 0.0);
  EXPECT_DOUBLE_EQ(tanimoto(bits({}), bits({})), 1.0);
  EXPECT_THROW(tanimoto(Fingerprint(64), Fingerprint(128)),
               std::invalid_argument);
}

TEST(Butina, IdenticalItemsFormOneCluster) {
  const Clustering c = butina_cluster(5, [](int, int) { return 0.0; }, 0.1);
  ASSERT_EQ(c.clusters.size(), 1u);
  EXPECT_EQ(c.clusters[0].members, (std::vector<int> { 0, 1, 2, 3, 4 }));
}

TEST(Butina, DistantItemsAreSingletons) {
  const Clustering c = butina_cluster(4, [](int, int) { return 1.0; }, 0.5);
  ASSERT_EQ(c.clusters.size(), 4u);
  for (int i = 0; i < 4; ++i)
    EXPECT_EQ(c.clusters[i].centroid, i);
}

TEST(Butina, HandCheckedFivePoints) {
  // Points on a line at 0, 1, 2, 5, 6 with cutoff 1: item 1 has two
  // neighbours and goes first; 3 and 4 tie, lowest index wins.
  const std::vector<double> x = { 0, 1, 2, 5, 6 };
  std::vector<std::vector<double>> d(5, std::vector<double>(5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      d[i][j] = std::abs(x[i] - x[j]);
  const Clustering c = butina_cluster(
      5, [&](int i, int j) { return d[i][j]; }, 1.0);
  ASSERT_EQ(c.clusters.size(), 2u);
  EXPECT_EQ(c.clusters[0].centroid, 1);
  EXPECT_EQ(c.clusters[0].members, (std::vector<int> { 1, 0, 2 }));
  EXPECT_EQ(c.clusters[1].centroid, 3);
  EXPECT_EQ(c.clusters[1].members, (std::vector<int> { 3, 4 }));
  const Clustering ref = testing::reference_butina(d, 1.0);
  ASSERT_EQ(ref.clusters.size(), 2u);
  EXPECT_EQ(ref.clusters[0].members, c.clusters[0].members);
}

TEST(Butina, MatchesReferenceOnRandomMatrices) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        d[i][j] = d[j][i] = static_cast<double>(rng() % 9) / 8.0;
    const double cutoff = static_cast<double>(rng() % 9) / 8.0;
    const Clustering got =
        butina_cluster(n, [&](int i, int j) { return d[i][j]; }, cutoff);
    const Clustering want = testing::reference_butina(d, cutoff);
    ASSERT_EQ(got.clusters.size(), want.clusters.size());
    std::vector<int> seen(n, 0);
    for (std::size_t c = 0; c < got.clusters.size(); ++c) {
      EXPECT_EQ(got.clusters[c].centroid, want.clusters[c].centroid);
      EXPECT_EQ(got.clusters[c].members, want.clusters[c].members);
      for (int m: got.clusters[c].members) {
        ++seen[m];
        EXPECT_LE(d[got.clusters[c].centroid][m], cutoff);
      }
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), n);
  }
}

TEST(Butina, TanimotoNeighboursAgreeAcrossThreadCounts) {
  const auto corpus =
      testing::load_corpus(std::string(RETRO_TEST_DATA_DIR) + "/corpus.smi");
  std::vector<Fingerprint> fps;
  for (const std::string &s: corpus)
    fps.push_back(morgan_fingerprint(parse_smiles(s)));
  const auto one = tanimoto_neighbors(fps, 0.6, 1);
  const auto four = tanimoto_neighbors(fps, 0.6, 4);
  EXPECT_EQ(one, four);
  const Clustering c = butina_cluster(one);
  std::size_t total = 0;
  for (const Cluster &cl: c.clusters)
    total += cl.members.size();
  EXPECT_EQ(total, fps.size());
}

} // namespace
} // namespace retro
