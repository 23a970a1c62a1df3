//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

// Brute-force reference implementations and fixture generators shared by
// the unit tests and the acceptance runner. They favour obviousness over
// speed and are only meant for small inputs.

#ifndef RETRO_TESTS_ORACLES_H_
#define RETRO_TESTS_ORACLES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "retro/fingerprint.h"
#include "retro/molgraph.h"
#include "retro/predictor.h"
#include "retro/retrostar.h"
#include "retro/routes.h"
#include "retro/stock.h"

namespace retro::testing {

// A toy reaction network: product -> list of (reactants, prior).
struct Network {
  CanonicalKey target;
  std::vector<CanonicalKey> molecules;
  std::map<CanonicalKey, std::vector<std::pair<std::vector<CanonicalKey>, double>>>
      reactions;
  std::set<CanonicalKey> stock;

  Stock make_stock() const;
  // Writes the network as a reaction file (counts proportional to priors
  // are not preserved; use NetworkPredictor for exact priors).
  std::string reaction_file() const;
};

// Serves a Network's reactions with their exact priors.
class NetworkPredictor final: public Predictor {
public:
  explicit NetworkPredictor(const Network &net);

  std::vector<Prediction> predict(const CanonicalKey &product,
                                  int top_k) override;

  int calls() const { return calls_; }

private:
  std::map<CanonicalKey, std::vector<Prediction>> table_;
  int calls_ = 0;
};

// Deterministic distinct molecule for an index (small chain-like SMILES).
CanonicalKey toy_molecule(int index);

struct NetworkShape {
  int molecules = 20;       // <= 30
  int max_reactions = 4;    // per product
  int max_reactants = 3;    // per reaction
  double stock_fraction = 0.35;
  double back_edge = 0.1;   // chance a reactant may point upstream
};

// Random network whose full expansion stays small. Every product gets
// 0..max_reactions reactions with distinct reactant multisets and priors
// drawn from (0, 1]; the target is never in stock.
Network random_network(std::mt19937_64 &rng, const NetworkShape &shape);

struct OracleRoute {
  Route route;
  std::string hash;
  double cost = 0.0;
};

// Every acyclic route from the target to stock within `max_depth`
// reactions, by exhaustive depth-first enumeration. Stock molecules are
// always leaves. Returns nullopt when more than `limit` routes exist.
std::optional<std::map<std::string, OracleRoute>>
enumerate_routes(const Network &net, int max_depth, double epsilon,
                 std::size_t limit = 20000);

// Number of molecule nodes a full expansion of the network produces,
// stopping early once it exceeds `limit`.
std::size_t expansion_size(const Network &net, int max_depth,
                           std::size_t limit);

// Random search tree with at most `max_mols` molecule nodes and reaction
// costs that are multiples of 1/8, so every sum is exact.
SearchTree random_search_tree(std::mt19937_64 &rng, int max_mols = 30,
                              int max_depth = 5);

// For every molecule node, the minimum cost over all partial solution
// trees of the root containing it (infinity when none is finite or the
// node is not reachable), by enumerating every partial solution tree.
std::vector<double> brute_force_priorities(const SearchTree &tree);

// Frontier node of minimal finite brute-force priority, ties to lower
// depth and then lower index.
std::optional<int> brute_force_selection(const SearchTree &tree);

// Tree edit distance by the textbook forest recursion (rightmost roots),
// memoized on forest encodings.
double naive_tree_edit_distance(const OrderedTree &a, const OrderedTree &b,
                                const RelabelCost &relabel);

// Random ordered tree with `n` nodes.
OrderedTree random_ordered_tree(std::mt19937_64 &rng, int n);

// Random route over `pool` molecules with at most `max_nodes` molecule
// nodes and no molecule repeated on a path.
Route random_route(std::mt19937_64 &rng, const std::vector<CanonicalKey> &pool,
                   int max_nodes);

// Sphere exclusion replayed literally from a full distance matrix.
Clustering reference_butina(const std::vector<std::vector<double>> &dist,
                            double cutoff);

// A hand-written set of varied SMILES (rings, branches, charges, isotopes,
// stereo marks, aromatic atoms, several fragments).
std::vector<std::string> load_corpus(const std::string &path);

// A uniformly random relabelling of the atoms of `mol`.
MolGraph random_permutation(const MolGraph &mol, std::mt19937_64 &rng);

} // namespace retro::testing

#endif // RETRO_TESTS_ORACLES_H_
