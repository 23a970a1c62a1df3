//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "oracles.h"
#include "retro/molgraph.h"

namespace retro {
namespace {

using testing::load_corpus;
using testing::random_permutation;

std::vector<std::string> corpus() {
  return load_corpus(std::string(RETRO_TEST_DATA_DIR) + "/corpus.smi");
}

TEST(CanonicalKey, TraversalOrderDoesNotMatter) {
  EXPECT_EQ(canonicalize("CCO"), canonicalize("OCC"));
  EXPECT_EQ(canonicalize("C(O)C"), canonicalize("OCC"));
  EXPECT_EQ(canonicalize("[Na+].[Cl-]"), canonicalize("[Cl-].[Na+]"));
  EXPECT_NE(canonicalize("CC"), canonicalize("CCC"));
}

TEST(CanonicalKey, EveryRingRotationAgrees) {
  // Start the ring walk at each of the six atoms, in both directions; the
  // substituent sits at the atom's position along the walk.
  std::set<CanonicalKey> keys;
  for (int start = 0; start < 6; ++start) {
    for (int dir: { 1, -1 }) {
      std::string s;
      for (int step = 0; step < 6; ++step) {
        const int atom = ((start + dir * step) % 6 + 6) % 6;
        s += "c";
        if (step == 0)
          s += "1";
        if (atom == 0)
          s += "(C)";
      }
      s += "1";
      keys.insert(canonicalize(s));
    }
  }
  keys.insert(canonicalize("Cc1ccccc1"));
  EXPECT_EQ(keys.size(), 1u);
  EXPECT_EQ(canonicalize("c1ccccc1"), canonicalize("c%10ccccc%10"));
}

TEST(CanonicalKey, AromaticAndKekuleFormsDiffer) {
  EXPECT_NE(canonicalize("c1ccccc1"), canonicalize("C1=CC=CC=C1"));
}

TEST(CanonicalKey, StereoParticipates) {
  EXPECT_NE(canonicalize("F/C=C/F"), canonicalize("F/C=C\\F"));
  EXPECT_EQ(canonicalize("F/C=C/F"), canonicalize("F\\C=C\\F"));
  EXPECT_NE(canonicalize("N[C@@H](C)O"), canonicalize("N[C@H](C)O"));
}

TEST(CanonicalKey, AtomMapsAreIgnored) {
  EXPECT_EQ(canonicalize("[CH3:1][OH:2]"), canonicalize("[CH3][OH]"));
}

TEST(CanonicalKey, IsotopesAndChargesParticipate) {
  EXPECT_NE(canonicalize("[13CH4]"), canonicalize("C"));
  EXPECT_NE(canonicalize("[NH4+]"), canonicalize("N"));
}

TEST(CanonicalKey, PermutationInvariantOnCorpus) {
  std::mt19937_64 rng(20240611);
  const std::vector<std::string> smiles = corpus();
  ASSERT_GE(smiles.size(), 100u);
  for (const std::string &s: smiles) {
    const MolGraph m = parse_smiles(s);
    const CanonicalKey key = canonical_key(m);
    for (int k = 0; k < 20; ++k)
      ASSERT_EQ(canonical_key(random_permutation(m, rng)), key) << s;
  }
}

TEST(CanonicalKey, RoundTripPreservesGraphAndKey) {
  for (const std::string &s: corpus()) {
    const MolGraph m = parse_smiles(s);
    const std::string written = write_canonical_smiles(m);
    const MolGraph back = parse_smiles(written);
    EXPECT_EQ(back.num_atoms(), m.num_atoms()) << s;
    EXPECT_EQ(back.num_bonds(), m.num_bonds()) << s;
    EXPECT_EQ(back.total_charge(), m.total_charge()) << s;
    EXPECT_EQ(canonical_key(back), canonical_key(m)) << s << " -> " << written;
    EXPECT_EQ(write_canonical_smiles(back), written) << s;
  }
}

TEST(CanonicalKey, WritesAreByteIdenticalAcrossPermutations) {
  const MolGraph m = parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)O");
  ASSERT_GE(m.num_atoms(), 12);
  const std::string expected = write_canonical_smiles(m);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k)
    ASSERT_EQ(write_canonical_smiles(random_permutation(m, rng)), expected);
}

TEST(CanonicalKey, TwoFragmentsGiveOneDot) {
  const std::string s = write_canonical_smiles(parse_smiles("[Na+].[Cl-]"));
  EXPECT_EQ(std::count(s.begin(), s.end(), '.'), 1);
}

TEST(CanonicalKey, CorpusKeysAreDistinctForDistinctAtomMultisets) {
  std::map<CanonicalKey, std::string> seen;
  for (const std::string &s: corpus()) {
    const CanonicalKey key = canonicalize(s);
    auto [it, fresh] = seen.emplace(key, s);
    if (!fresh) {
      // Only spellings of one molecule may collide.
      const MolGraph a = parse_smiles(s);
      const MolGraph b = parse_smiles(it->second);
      EXPECT_EQ(a.num_atoms(), b.num_atoms()) << s << " vs " << it->second;
    }
  }
}

TEST(CanonicalKey, SymmetricCagesTerminate) {
  // Highly symmetric graphs exercise the orbit pruning.
  const CanonicalKey cubane = canonicalize("C12C3C4C1C5C2C3C45");
  std::mt19937_64 rng(11);
  const MolGraph m = parse_smiles(cubane.str());
  for (int k = 0; k < 20; ++k)
    EXPECT_EQ(canonical_key(random_permutation(m, rng)), cubane);
}

TEST(CanonicalRanks, AreAPermutationPerComponent) {
  const MolGraph m = parse_smiles("CCO.NC=O");
  const std::vector<int> ranks = canonical_ranks(m);
  std::vector<int> a, b;
  for (int i = 0; i < m.num_atoms(); ++i)
    (m.component_of(i) == 0 ? a : b).push_back(ranks[i]);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, (std::vector<int> { 0, 1, 2 }));
  EXPECT_EQ(b, (std::vector<int> { 0, 1, 2 }));
}

} // namespace
} // namespace retro
