//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/routes.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <utility>

#include <openssl/evp.h>

namespace retro {
namespace {

std::string sha256_hex(const std::string &data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr)
      != 1)
    throw std::runtime_error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

RouteMol parse_mol(const nlohmann::json &doc, std::vector<CanonicalKey> &path,
                   bool &partial) {
  if (!doc.is_object())
    throw RouteError("route node is not an object");
  if (!doc.contains("type") || doc["type"] != "mol")
    throw RouteError("expected a node with \"type\":\"mol\"");
  if (!doc.contains("smiles") || !doc["smiles"].is_string())
    throw RouteError("molecule node without a \"smiles\" string");

  RouteMol mol;
  const std::string smiles = doc["smiles"].get<std::string>();
  try {
    mol.molecule = canonicalize(smiles);
  } catch (const ParseError &e) {
    throw RouteError("unparsable SMILES '" + smiles + "': " + e.what());
  }
  if (doc.contains("in_stock")) {
    if (!doc["in_stock"].is_boolean())
      throw RouteError("\"in_stock\" must be a boolean");
    mol.in_stock = doc["in_stock"].get<bool>();
  }
  if (std::find(path.begin(), path.end(), mol.molecule) != path.end())
    throw RouteError("molecule " + mol.molecule.str()
                     + " repeats along a route path");

  const nlohmann::json *children = nullptr;
  if (doc.contains("children")) {
    children = &doc["children"];
    if (!children->is_array())
      throw RouteError("\"children\" must be an array");
    if (children->size() > 1)
      throw RouteError("molecule " + mol.molecule.str()
                       + " has more than one reaction");
  }

  if (children == nullptr || children->empty()) {
    if (!mol.in_stock)
      partial = true;
    return mol;
  }

  const nlohmann::json &rdoc = (*children)[0];
  if (!rdoc.is_object() || !rdoc.contains("type")
      || rdoc["type"] != "reaction")
    throw RouteError("expected a node with \"type\":\"reaction\"");
  RouteRxn rxn;
  if (rdoc.contains("metadata")) {
    const nlohmann::json &meta = rdoc["metadata"];
    if (!meta.is_object())
      throw RouteError("\"metadata\" must be an object");
    if (meta.contains("prior") && meta["prior"].is_number())
      rxn.prior = meta["prior"].get<double>();
    if (meta.contains("rank") && meta["rank"].is_number_integer())
      rxn.rank = meta["rank"].get<int>();
  }
  if (!rdoc.contains("children") || !rdoc["children"].is_array()
      || rdoc["children"].empty())
    throw RouteError("reaction without reactants");

  path.push_back(mol.molecule);
  for (const nlohmann::json &c: rdoc["children"])
    rxn.children.push_back(parse_mol(c, path, partial));
  path.pop_back();
  mol.reaction = std::move(rxn);
  return mol;
}

nlohmann::json mol_to_json(const RouteMol &mol) {
  nlohmann::json doc = { { "type", "mol" },
                         { "smiles", mol.molecule.str() },
                         { "in_stock", mol.in_stock } };
  if (mol.reaction) {
    nlohmann::json meta = nlohmann::json::object();
    if (mol.reaction->prior)
      meta["prior"] = *mol.reaction->prior;
    if (mol.reaction->rank)
      meta["rank"] = *mol.reaction->rank;
    nlohmann::json kids = nlohmann::json::array();
    for (const RouteMol &c: mol.reaction->children)
      kids.push_back(mol_to_json(c));
    doc["children"] = nlohmann::json::array(
        { { { "type", "reaction" },
            { "metadata", std::move(meta) },
            { "children", std::move(kids) } } });
  } else {
    doc["children"] = nlohmann::json::array();
  }
  return doc;
}

void validate_mol(const RouteMol &mol, std::vector<CanonicalKey> &path) {
  if (std::find(path.begin(), path.end(), mol.molecule) != path.end())
    throw RouteError("molecule " + mol.molecule.str()
                     + " repeats along a route path");
  if (!mol.reaction)
    return;
  if (mol.reaction->children.empty())
    throw RouteError("reaction without reactants");
  path.push_back(mol.molecule);
  for (const RouteMol &c: mol.reaction->children)
    validate_mol(c, path);
  path.pop_back();
}

void collect_leaves(const RouteMol &mol, std::vector<CanonicalKey> &out) {
  if (!mol.reaction) {
    out.push_back(mol.molecule);
    return;
  }
  for (const RouteMol &c: mol.reaction->children)
    collect_leaves(c, out);
}

int depth_of(const RouteMol &mol) {
  if (!mol.reaction)
    return 0;
  int best = 0;
  for (const RouteMol &c: mol.reaction->children)
    best = std::max(best, depth_of(c));
  return best + 1;
}

void collect_reactant_counts(const RouteMol &mol, std::vector<int> &out) {
  if (!mol.reaction)
    return;
  out.push_back(static_cast<int>(mol.reaction->children.size()));
  for (const RouteMol &c: mol.reaction->children)
    collect_reactant_counts(c, out);
}

template <typename Matcher>
std::map<int, double> accuracy(const RouteRanking &predicted,
                               std::span<const Route> gold,
                               std::span<const int> ns, Matcher &&matches) {
  std::map<int, double> out;
  for (int n: ns)
    out[n] = 0.0;
  if (gold.empty())
    return out;
  std::map<int, int> hits;
  for (const Route &g: gold) {
    if (g.partial)
      throw RouteError("gold route for " + g.root.molecule.str()
                       + " is not complete");
    auto it = predicted.find(g.root.molecule);
    if (it == predicted.end())
      continue;
    const std::vector<Route> &ranked = it->second;
    // Position of the first match; every n beyond it is a hit.
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (matches(ranked[i], g)) {
        first = i;
        break;
      }
    }
    if (!first)
      continue;
    for (int n: ns) {
      if (n > 0 && *first < static_cast<std::size_t>(n))
        ++hits[n];
    }
  }
  for (int n: ns)
    out[n] = 100.0 * hits[n] / static_cast<double>(gold.size());
  return out;
}

} // namespace

Route parse_route(const nlohmann::json &doc) {
  Route route;
  std::vector<CanonicalKey> path;
  route.root = parse_mol(doc, path, route.partial);
  return route;
}

std::vector<Route> parse_route_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw RouteError("cannot open route file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw RouteError(path + ": " + e.what());
  }
  if (!doc.is_array())
    throw RouteError(path + ": expected a JSON array of routes");
  std::vector<Route> routes;
  for (const nlohmann::json &r: doc)
    routes.push_back(parse_route(r));
  return routes;
}

nlohmann::json route_to_json(const Route &route) {
  return mol_to_json(route.root);
}

void validate_route(const Route &route) {
  std::vector<CanonicalKey> path;
  validate_mol(route.root, path);
}

std::string leaf_route_hash(const CanonicalKey &key) {
  return sha256_hex("leaf\x1f" + key.str());
}

std::string mol_route_hash(const CanonicalKey &key,
                           std::vector<std::string> child_hashes) {
  std::sort(child_hashes.begin(), child_hashes.end());
  std::string data = "mol\x1f" + key.str();
  for (const std::string &h: child_hashes) {
    data.push_back('\x1f');
    data += h;
  }
  return sha256_hex(data);
}

std::string route_hash(const RouteMol &mol) {
  if (!mol.reaction)
    return leaf_route_hash(mol.molecule);
  std::vector<std::string> kids;
  for (const RouteMol &c: mol.reaction->children)
    kids.push_back(route_hash(c));
  return mol_route_hash(mol.molecule, std::move(kids));
}

std::string route_hash(const Route &route) {
  return route_hash(route.root);
}

std::vector<CanonicalKey> leaf_set(const Route &route) {
  std::vector<CanonicalKey> leaves;
  collect_leaves(route.root, leaves);
  std::sort(leaves.begin(), leaves.end());
  leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());
  return leaves;
}

int reaction_count(const Route &route) {
  std::vector<int> counts;
  collect_reactant_counts(route.root, counts);
  return static_cast<int>(counts.size());
}

RouteStats route_stats(const Route &route) {
  RouteStats stats;
  stats.max_depth = depth_of(route.root);
  stats.n_building_blocks = static_cast<int>(leaf_set(route).size());
  collect_reactant_counts(route.root, stats.reactants_per_reaction);
  return stats;
}

std::map<int, double> route_accuracy(const RouteRanking &predicted,
                                     std::span<const Route> gold,
                                     std::span<const int> ns) {
  std::unordered_map<const Route *, std::string> gold_hash;
  for (const Route &g: gold)
    gold_hash[&g] = route_hash(g);
  return accuracy(predicted, gold, ns,
                  [&](const Route &candidate, const Route &g) {
                    return route_hash(candidate) == gold_hash.at(&g);
                  });
}

std::map<int, double> building_block_accuracy(const RouteRanking &predicted,
                                              std::span<const Route> gold,
                                              std::span<const int> ns) {
  return accuracy(predicted, gold, ns,
                  [](const Route &candidate, const Route &g) {
                    return leaf_set(candidate) == leaf_set(g);
                  });
}

RouteClustering cluster_routes(std::span<const LabeledRoute> routes,
                               double cutoff) {
  const int n = static_cast<int>(routes.size());
  for (int i = 1; i < n; ++i) {
    if (routes[i].route.root.molecule != routes[0].route.root.molecule)
      throw RouteError("cluster_routes expects routes of one target");
  }
  RouteDistance distance;
  std::vector<std::vector<int>> neighbors(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(routes[i].route, routes[j].route).normalized <= cutoff) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  RouteClustering out;
  out.clustering = butina_cluster(neighbors);
  for (const Cluster &c: out.clustering.clusters) {
    std::set<std::string> labels;
    for (int m: c.members)
      labels.insert(routes[m].label);
    out.labels.emplace_back(labels.begin(), labels.end());
  }
  return out;
}

std::map<std::string, int>
cluster_overlap_counts(std::span<const RouteClustering> clusterings,
                       std::vector<std::string> models) {
  if (models.empty()) {
    std::set<std::string> seen;
    for (const RouteClustering &rc: clusterings) {
      for (const auto &labels: rc.labels)
        seen.insert(labels.begin(), labels.end());
    }
    models.assign(seen.begin(), seen.end());
  }
  std::sort(models.begin(), models.end());
  models.erase(std::unique(models.begin(), models.end()), models.end());
  if (models.size() > 20)
    throw std::invalid_argument("too many model labels for subset counts");

  auto join = [](const std::vector<std::string> &labels) {
    std::string key;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0)
        key.push_back('+');
      key += labels[i];
    }
    return key;
  };

  std::map<std::string, int> counts;
  const std::size_t m = models.size();
  for (std::size_t mask = 1; mask < (std::size_t { 1 } << m); ++mask) {
    std::vector<std::string> subset;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::size_t { 1 } << i))
        subset.push_back(models[i]);
    }
    counts[join(subset)] = 0;
  }
  for (const RouteClustering &rc: clusterings) {
    for (const auto &labels: rc.labels) {
      if (!labels.empty())
        ++counts[join(labels)];
    }
  }
  return counts;
}

} // namespace retro
