//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_RETROSTAR_H_
#define RETRO_RETROSTAR_H_

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "retro/molgraph.h"
#include "retro/predictor.h"
#include "retro/routes.h"
#include "retro/stock.h"

namespace retro {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class ConfigError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SearchConfig {
  int iteration_limit = 200;
  double time_limit_s = 28800.0;
  int top_k = 50;
  int max_depth = 7;
  double epsilon = 1e-10;
  int route_cap = 5000;
  // Collapse routes sharing a leaf set instead of routes sharing a hash.
  bool dedupe_by_leaf_set = false;

  static constexpr int kParoutesMaxDepth = 10;

  // Throws ConfigError when a limit is below 1 or epsilon is outside (0, 1).
  void validate() const;

  // Missing keys keep their defaults; unknown keys and mistyped values are
  // rejected.
  static SearchConfig from_json(const nlohmann::json &doc);
  nlohmann::json to_json() const;

  friend bool operator==(const SearchConfig &,
                         const SearchConfig &) = default;
};

// -ln(clamp(prior, epsilon, 1)).
double reaction_cost(double prior, double epsilon);

enum class MolState { kFrontier, kExpanded, kStock, kDead };

struct MolNode {
  CanonicalKey molecule;
  int depth = 0;
  MolState state = MolState::kFrontier;
  double value = 0.0;
  int parent = -1; // reaction index, -1 at the root
  std::vector<int> reactions;
};

struct RxnNode {
  int parent = -1; // molecule index
  double prior = 0.0;
  int rank = 0;
  double cost = 0.0;
  double value = 0.0; // cost + sum of child values
  std::vector<int> children;
};

// The AND/OR search tree. Molecules and reactions live in arenas indexed
// by insertion order; identical molecules in different branches are
// distinct nodes.
class SearchTree {
public:
  explicit SearchTree(CanonicalKey root, MolState state = MolState::kFrontier);

  // Attaches a reaction below `mol`, which becomes expanded.
  int add_reaction(int mol, double prior, int rank, double cost);
  // Attaches a reactant node; `state` is kFrontier, kStock or kDead.
  int add_reactant(int rxn, CanonicalKey molecule, MolState state);
  // An expanded molecule that kept no reaction.
  void mark_dead(int mol);

  // Recomputes every value bottom-up.
  void update_values();

  // Cost of the cheapest partial solution tree of the root that contains
  // `mol`, under current values. Requires update_values().
  std::vector<double> priorities() const;

  // Frontier node of minimal finite priority, ties to lower depth and then
  // lower index; nullopt when none is left.
  std::optional<int> select_frontier() const;

  // True when `molecule` equals `mol` or one of its ancestors.
  bool on_path(int mol, const CanonicalKey &molecule) const;

  // Throws std::logic_error when a structural or value invariant fails.
  void audit(int max_depth = std::numeric_limits<int>::max()) const;

  const MolNode &mol(int i) const { return mols_[i]; }
  const RxnNode &rxn(int i) const { return rxns_[i]; }
  std::size_t num_mols() const { return mols_.size(); }
  std::size_t num_rxns() const { return rxns_.size(); }

  // Cost of the cheapest fully solved subtree of every molecule (infinity
  // when unsolved).
  std::vector<double> solved_costs() const;

private:
  std::vector<MolNode> mols_;
  std::vector<RxnNode> rxns_;
};

struct ScoredRoute {
  Route route;
  double cost = 0.0; // sum of reaction costs, added smallest first
  int reactions = 0;
  std::string hash;
};

// Solved routes of `tree` enumerated cheapest-first, deduplicated by
// route hash (or leaf set), capped at `route_cap`, then ranked by (cost,
// reaction count, hash).
std::vector<ScoredRoute> extract_routes(const SearchTree &tree, int route_cap,
                                        bool dedupe_by_leaf_set = false);

// Route cost with a fixed summation order: reaction costs ascending.
double route_cost(const Route &route, double epsilon);

enum class Termination { kIterations, kTime, kExhausted, kTransportError };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct SearchResult {
  CanonicalKey target;
  bool solved = false;
  std::vector<ScoredRoute> routes;
  int iterations = 0;
  int model_calls = 0;
  double search_time_s = 0.0;
  double extraction_time_s = 0.0;
  double wall_time_s = 0.0;
  Termination termination = Termination::kExhausted;
  std::string error; // transport error message, if any
  std::size_t tree_mols = 0;
};

struct SearchOptions {
  // Run SearchTree::audit after every iteration.
  bool audit = false;
};

SearchResult search(const CanonicalKey &target, Predictor &predictor,
                    const Stock &stock, const SearchConfig &config,
                    const SearchOptions &options = {});

// Canonicalizes `target` first; throws ParseError when it does not parse.
SearchResult search(std::string_view target, Predictor &predictor,
                    const Stock &stock, const SearchConfig &config,
                    const SearchOptions &options = {});

} // namespace retro

#endif // RETRO_RETROSTAR_H_
