//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_ROUTES_H_
#define RETRO_ROUTES_H_

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "retro/fingerprint.h"
#include "retro/molgraph.h"

namespace retro {

struct RouteMol;

struct RouteRxn {
  std::optional<double> prior;
  std::optional<int> rank;
  std::vector<RouteMol> children;
};

struct RouteMol {
  CanonicalKey molecule;
  bool in_stock = false;
  std::optional<RouteRxn> reaction;
};

// A synthesis tree: every non-leaf molecule has exactly one reaction.
// `partial` is set when some leaf is not in stock.
struct Route {
  RouteMol root;
  bool partial = false;
};

class RouteError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Reads a route document
//   {"type":"mol","smiles":"...","in_stock":true|false,
//    "children":[{"type":"reaction","metadata":{"prior":p,"rank":r},
//                 "children":[<mol>, ...]}]}
// canonicalising every SMILES. Throws RouteError on schema violations,
// unparsable SMILES or a molecule repeated along a root-to-leaf path.
Route parse_route(const nlohmann::json &doc);

// A route file is a JSON array of route documents.
std::vector<Route> parse_route_file(const std::string &path);

nlohmann::json route_to_json(const Route &route);

// Throws RouteError when a molecule repeats on a root-to-leaf path or a
// reaction has no reactants. Recomputes nothing.
void validate_route(const Route &route);

// Recursive structural hash (hex SHA-256). Leaves hash ("leaf", key);
// internal molecules hash ("mol", key, sorted child hashes). Priors,
// ranks and stock flags do not participate.
std::string route_hash(const Route &route);
std::string route_hash(const RouteMol &mol);

// The two hash cases, for callers that assemble hashes bottom-up.
std::string leaf_route_hash(const CanonicalKey &key);
std::string mol_route_hash(const CanonicalKey &key,
                           std::vector<std::string> child_hashes);

// Distinct leaf keys, sorted.
std::vector<CanonicalKey> leaf_set(const Route &route);

int reaction_count(const Route &route);

struct RouteStats {
  int max_depth = 0;
  int n_building_blocks = 0;
  std::vector<int> reactants_per_reaction;
};

RouteStats route_stats(const Route &route);

// Predicted routes per target in rank order.
using RouteRanking = std::unordered_map<CanonicalKey, std::vector<Route>>;

// Percentage of gold targets whose gold route hash appears among the top-n
// predicted routes, for every n. Targets missing from `predicted` miss.
std::map<int, double> route_accuracy(const RouteRanking &predicted,
                                     std::span<const Route> gold,
                                     std::span<const int> ns);

// As route_accuracy, but matches on the set of leaf keys only.
std::map<int, double> building_block_accuracy(const RouteRanking &predicted,
                                              std::span<const Route> gold,
                                              std::span<const int> ns);

// Ordered labelled tree for edit distance: node 0 is the root and
// children lists are ordered.
struct OrderedTree {
  std::vector<std::vector<int>> children;

  int size() const { return static_cast<int>(children.size()); }
};

using RelabelCost = std::function<double(int, int)>;

// Zhang-Shasha ordered tree edit distance with unit insert and delete
// costs; relabel(i, j) is the cost of mapping node i of `a` onto node j of
// `b`. Empty trees are allowed.
double tree_edit_distance(const OrderedTree &a, const OrderedTree &b,
                          const RelabelCost &relabel);

// The molecule-only tree of a route (reaction nodes collapsed), children
// ordered by canonical key and then by subtree hash. `labels[i]` receives
// the molecule of node i.
OrderedTree route_tree(const Route &route, std::vector<CanonicalKey> *labels);

struct TedResult {
  double raw = 0.0;
  double normalized = 0.0;
};

// Ordered tree edit distance between molecule-only trees (reaction nodes
// collapsed, children ordered by canonical key). Insert and delete cost 1;
// relabelling costs 1 - Tanimoto of radius-2 / 1024-bit fingerprints.
// normalized = raw / (|a| + |b|).
class RouteDistance {
public:
  TedResult operator()(const Route &a, const Route &b);

  // 1 - Tanimoto of the two molecules, rounded to a multiple of 2^-32 so
  // that sums of costs are exact and the distance does not depend on the
  // order the algorithm adds them in. Zero for identical molecules.
  double relabel_cost(const CanonicalKey &a, const CanonicalKey &b);

  const Fingerprint &fingerprint(const CanonicalKey &key);

private:
  std::unordered_map<CanonicalKey, Fingerprint> cache_;
};

TedResult route_ted(const Route &a, const Route &b);

struct LabeledRoute {
  Route route;
  std::string label;
};

struct RouteClustering {
  Clustering clustering;
  // Distinct member labels per cluster, sorted.
  std::vector<std::vector<std::string>> labels;
};

// Butina clustering of one target's routes on normalized TED.
RouteClustering cluster_routes(std::span<const LabeledRoute> routes,
                               double cutoff = 0.5);

// For every non-empty subset of `models` (all labels seen when empty), the
// number of clusters whose label set is exactly that subset. Keys join the
// sorted labels with '+'.
std::map<std::string, int>
cluster_overlap_counts(std::span<const RouteClustering> clusterings,
                       std::vector<std::string> models = {});

} // namespace retro

#endif // RETRO_ROUTES_H_
