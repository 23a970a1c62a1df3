//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace retro::testing {
namespace {

int uniform_int(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(std::mt19937_64 &rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

} // namespace

Stock Network::make_stock() const {
  return Stock::from_keys(std::vector<CanonicalKey>(stock.begin(), stock.end()),
                          "network");
}

std::string Network::reaction_file() const {
  std::ostringstream out;
  for (const auto &[product, list]: reactions) {
    for (const auto &[reactants, prior]: list) {
      out << product.str() << '\t';
      for (std::size_t i = 0; i < reactants.size(); ++i)
        out << (i ? "." : "") << reactants[i].str();
      out << '\t' << std::max(1L, std::lround(prior * 100)) << '\n';
    }
  }
  return out.str();
}

NetworkPredictor::NetworkPredictor(const Network &net) {
  for (const auto &[product, list]: net.reactions) {
    std::vector<RawPrediction> raw;
    for (const auto &[reactants, prior]: list) {
      RawPrediction r;
      for (const CanonicalKey &k: reactants)
        r.reactants.push_back(k.str());
      r.prior = prior;
      raw.push_back(std::move(r));
    }
    table_[product] = normalize_predictions(product, raw);
  }
}

std::vector<Prediction> NetworkPredictor::predict(const CanonicalKey &product,
                                                  int top_k) {
  ++calls_;
  auto it = table_.find(product);
  if (it == table_.end())
    return {};
  std::vector<Prediction> out = it->second;
  if (out.size() > static_cast<std::size_t>(top_k))
    out.resize(top_k);
  return out;
}

CanonicalKey toy_molecule(int index) {
  static const char *const kSuffix[] = { "", "O", "N", "Cl" };
  const std::string smiles =
      std::string(static_cast<std::size_t>(index / 4 + 1), 'C')
      + kSuffix[index % 4];
  return canonicalize(smiles);
}

Network random_network(std::mt19937_64 &rng, const NetworkShape &shape) {
  const int n = std::clamp(shape.molecules, 2, 30);
  Network net;
  for (int i = 0; i < n; ++i)
    net.molecules.push_back(toy_molecule(i));
  net.target = net.molecules[0];

  for (int i = 0; i < n; ++i) {
    const int n_rxn = uniform_int(rng, i == 0 ? 1 : 0, shape.max_reactions);
    std::set<std::vector<CanonicalKey>> seen;
    auto &list = net.reactions[net.molecules[i]];
    for (int r = 0; r < n_rxn; ++r) {
      const int n_reactants = uniform_int(rng, 1, shape.max_reactants);
      std::vector<CanonicalKey> reactants;
      for (int k = 0; k < n_reactants; ++k) {
        int j;
        if (chance(rng, shape.back_edge) || i == n - 1) {
          j = uniform_int(rng, 0, n - 1);
        } else {
          j = uniform_int(rng, i + 1, n - 1);
        }
        if (j == i)
          continue;
        reactants.push_back(net.molecules[j]);
      }
      std::sort(reactants.begin(), reactants.end());
      if (reactants.empty() || !seen.insert(reactants).second)
        continue;
      const double prior = uniform_int(rng, 1, 1000) / 1000.0;
      list.emplace_back(std::move(reactants), prior);
    }
    if (list.empty())
      net.reactions.erase(net.molecules[i]);
  }

  for (int i = 1; i < n; ++i) {
    const bool leafish = net.reactions.count(net.molecules[i]) == 0;
    if (chance(rng, leafish ? 0.7 : shape.stock_fraction))
      net.stock.insert(net.molecules[i]);
  }
  return net;
}

std::optional<std::map<std::string, OracleRoute>>
enumerate_routes(const Network &net, int max_depth, double epsilon,
                 std::size_t limit) {
  bool overflow = false;
  std::vector<CanonicalKey> path;

  std::function<std::vector<RouteMol>(const CanonicalKey &, int)> expand =
      [&](const CanonicalKey &mol, int depth) -> std::vector<RouteMol> {
    if (net.stock.count(mol) != 0) {
      RouteMol leaf;
      leaf.molecule = mol;
      leaf.in_stock = true;
      return { leaf };
    }
    if (depth >= max_depth || overflow)
      return {};
    auto it = net.reactions.find(mol);
    if (it == net.reactions.end())
      return {};
    std::vector<RouteMol> out;
    path.push_back(mol);
    for (const auto &[reactants, prior]: it->second) {
      const bool cycles = std::any_of(
          reactants.begin(), reactants.end(), [&](const CanonicalKey &r) {
            return std::find(path.begin(), path.end(), r) != path.end();
          });
      if (cycles)
        continue;
      std::vector<std::vector<RouteMol>> options;
      bool dead = false;
      for (const CanonicalKey &r: reactants) {
        options.push_back(expand(r, depth + 1));
        if (options.back().empty()) {
          dead = true;
          break;
        }
      }
      if (dead)
        continue;
      // Cartesian product of the reactants' alternatives.
      std::vector<std::size_t> pick(options.size(), 0);
      while (true) {
        RouteMol node;
        node.molecule = mol;
        RouteRxn rxn;
        rxn.prior = prior;
        for (std::size_t c = 0; c < options.size(); ++c)
          rxn.children.push_back(options[c][pick[c]]);
        node.reaction = std::move(rxn);
        out.push_back(std::move(node));
        if (out.size() > limit) {
          overflow = true;
          break;
        }
        std::size_t c = 0;
        while (c < pick.size() && ++pick[c] == options[c].size())
          pick[c++] = 0;
        if (c == pick.size())
          break;
      }
      if (overflow)
        break;
    }
    path.pop_back();
    return out;
  };

  std::vector<RouteMol> roots = expand(net.target, 0);
  if (overflow)
    return std::nullopt;
  std::map<std::string, OracleRoute> routes;
  for (RouteMol &root: roots) {
    OracleRoute r;
    r.route.root = std::move(root);
    r.hash = route_hash(r.route);
    r.cost = route_cost(r.route, epsilon);
    routes.emplace(r.hash, std::move(r));
  }
  return routes;
}

std::size_t expansion_size(const Network &net, int max_depth,
                           std::size_t limit) {
  std::size_t count = 0;
  std::vector<CanonicalKey> path;
  std::function<void(const CanonicalKey &, int)> visit =
      [&](const CanonicalKey &mol, int depth) {
        ++count;
        if (count > limit || net.stock.count(mol) != 0 || depth >= max_depth)
          return;
        auto it = net.reactions.find(mol);
        if (it == net.reactions.end())
          return;
        path.push_back(mol);
        for (const auto &[reactants, prior]: it->second) {
          const bool cycles = std::any_of(
              reactants.begin(), reactants.end(), [&](const CanonicalKey &r) {
                return std::find(path.begin(), path.end(), r) != path.end();
              });
          if (cycles)
            continue;
          for (const CanonicalKey &r: reactants)
            visit(r, depth + 1);
        }
        path.pop_back();
      };
  visit(net.target, 0);
  return count;
}

SearchTree random_search_tree(std::mt19937_64 &rng, int max_mols,
                              int max_depth) {
  int next_key = 0;
  SearchTree tree(toy_molecule(next_key++));
  for (int step = 0; step < 200; ++step) {
    std::vector<int> frontier;
    for (std::size_t i = 0; i < tree.num_mols(); ++i) {
      const MolNode &m = tree.mol(static_cast<int>(i));
      if (m.state == MolState::kFrontier && m.depth < max_depth)
        frontier.push_back(static_cast<int>(i));
    }
    if (frontier.empty()
        || static_cast<int>(tree.num_mols()) >= max_mols)
      break;
    const int f = frontier[uniform_int(rng, 0, frontier.size() - 1)];
    if (f != 0 && chance(rng, 0.1)) {
      tree.mark_dead(f);
      continue;
    }
    const int child_depth = tree.mol(f).depth + 1;
    const int n_rxn = uniform_int(rng, 1, 3);
    for (int r = 0; r < n_rxn; ++r) {
      const int room = max_mols - static_cast<int>(tree.num_mols());
      if (room <= 0)
        break;
      const double cost = uniform_int(rng, 0, 24) / 8.0;
      const int rxn = tree.add_reaction(f, std::exp(-cost), r + 1, cost);
      const int n_children = uniform_int(rng, 1, std::min(3, room));
      for (int c = 0; c < n_children; ++c) {
        const double u = std::uniform_real_distribution<double>(0, 1)(rng);
        MolState state = MolState::kFrontier;
        if (u >= 0.55 || child_depth >= max_depth)
          state = u < 0.85 ? MolState::kStock : MolState::kDead;
        tree.add_reactant(rxn, toy_molecule(next_key++), state);
      }
    }
  }
  tree.update_values();
  return tree;
}

std::vector<double> brute_force_priorities(const SearchTree &tree) {
  struct Partial {
    double cost;
    std::vector<int> nodes;
  };
  std::function<std::vector<Partial>(int)> partials =
      [&](int mol) -> std::vector<Partial> {
    const MolNode &m = tree.mol(mol);
    if (m.state != MolState::kExpanded) {
      const double v = m.state == MolState::kDead ? kInfinity : 0.0;
      return { { v, { mol } } };
    }
    std::vector<Partial> out;
    for (int ri: m.reactions) {
      const RxnNode &r = tree.rxn(ri);
      std::vector<Partial> acc = { { r.cost, { mol } } };
      for (int c: r.children) {
        const std::vector<Partial> sub = partials(c);
        std::vector<Partial> next;
        for (const Partial &a: acc) {
          for (const Partial &b: sub) {
            Partial p { a.cost + b.cost, a.nodes };
            p.nodes.insert(p.nodes.end(), b.nodes.begin(), b.nodes.end());
            next.push_back(std::move(p));
          }
        }
        acc = std::move(next);
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
    return out;
  };

  std::vector<double> best(tree.num_mols(), kInfinity);
  for (const Partial &p: partials(0)) {
    for (int n: p.nodes)
      best[n] = std::min(best[n], p.cost);
  }
  return best;
}

std::optional<int> brute_force_selection(const SearchTree &tree) {
  const std::vector<double> prio = brute_force_priorities(tree);
  std::optional<int> best;
  for (std::size_t i = 0; i < tree.num_mols(); ++i) {
    const int n = static_cast<int>(i);
    if (tree.mol(n).state != MolState::kFrontier || std::isinf(prio[n]))
      continue;
    if (!best || prio[n] < prio[*best]
        || (prio[n] == prio[*best] && tree.mol(n).depth < tree.mol(*best).depth))
      best = n;
  }
  return best;
}

double naive_tree_edit_distance(const OrderedTree &a, const OrderedTree &b,
                                const RelabelCost &relabel) {
  using Forest = std::vector<int>;
  std::function<int(const OrderedTree &, int)> size_of =
      [&](const OrderedTree &t, int n) {
        int s = 1;
        for (int c: t.children[n])
          s += size_of(t, c);
        return s;
      };
  auto forest_size = [&](const OrderedTree &t, const Forest &f) {
    int s = 0;
    for (int n: f)
      s += size_of(t, n);
    return s;
  };
  auto encode = [](const Forest &f, const Forest &g) {
    std::string key;
    for (int n: f)
      key += std::to_string(n) + ",";
    key += "|";
    for (int n: g)
      key += std::to_string(n) + ",";
    return key;
  };

  std::unordered_map<std::string, double> memo;
  std::function<double(const Forest &, const Forest &)> dist =
      [&](const Forest &f, const Forest &g) -> double {
    if (f.empty())
      return forest_size(b, g);
    if (g.empty())
      return forest_size(a, f);
    const std::string key = encode(f, g);
    auto it = memo.find(key);
    if (it != memo.end())
      return it->second;
    const int v = f.back();
    const int w = g.back();

    Forest f_minus_v(f.begin(), f.end() - 1);
    f_minus_v.insert(f_minus_v.end(), a.children[v].begin(),
                     a.children[v].end());
    Forest g_minus_w(g.begin(), g.end() - 1);
    g_minus_w.insert(g_minus_w.end(), b.children[w].begin(),
                     b.children[w].end());
    const Forest f_rest(f.begin(), f.end() - 1);
    const Forest g_rest(g.begin(), g.end() - 1);

    const double del = dist(f_minus_v, g) + 1.0;
    const double ins = dist(f, g_minus_w) + 1.0;
    const double match = dist(a.children[v], b.children[w])
                         + dist(f_rest, g_rest) + relabel(v, w);
    const double d = std::min({ del, ins, match });
    memo.emplace(key, d);
    return d;
  };

  Forest fa, fb;
  if (a.size() > 0)
    fa.push_back(0);
  if (b.size() > 0)
    fb.push_back(0);
  return dist(fa, fb);
}

OrderedTree random_ordered_tree(std::mt19937_64 &rng, int n) {
  OrderedTree t;
  t.children.resize(n);
  for (int i = 1; i < n; ++i)
    t.children[uniform_int(rng, 0, i - 1)].push_back(i);
  return t;
}

Route random_route(std::mt19937_64 &rng, const std::vector<CanonicalKey> &pool,
                   int max_nodes) {
  int budget = max_nodes - 1;
  std::vector<CanonicalKey> path;
  std::function<RouteMol(const CanonicalKey &)> grow =
      [&](const CanonicalKey &mol) {
        RouteMol node;
        node.molecule = mol;
        std::vector<CanonicalKey> allowed;
        path.push_back(mol);
        for (const CanonicalKey &k: pool) {
          if (std::find(path.begin(), path.end(), k) == path.end())
            allowed.push_back(k);
        }
        if (budget > 0 && !allowed.empty() && chance(rng, 0.6)) {
          const int k = uniform_int(rng, 1, std::min(3, budget));
          budget -= k;
          RouteRxn rxn;
          rxn.prior = uniform_int(rng, 1, 100) / 100.0;
          rxn.rank = uniform_int(rng, 1, 50);
          for (int c = 0; c < k; ++c)
            rxn.children.push_back(
                grow(allowed[uniform_int(rng, 0, allowed.size() - 1)]));
          node.reaction = std::move(rxn);
        } else {
          node.in_stock = true;
        }
        path.pop_back();
        return node;
      };
  Route route;
  route.root = grow(pool[uniform_int(rng, 0, pool.size() - 1)]);
  return route;
}

Clustering reference_butina(const std::vector<std::vector<double>> &dist,
                            double cutoff) {
  const int n = static_cast<int>(dist.size());
  std::vector<bool> open(n, true);
  Clustering out;
  while (std::count(open.begin(), open.end(), true) > 0) {
    int centroid = -1;
    int centroid_count = -1;
    for (int i = 0; i < n; ++i) {
      if (!open[i])
        continue;
      int count = 0;
      for (int j = 0; j < n; ++j) {
        if (j != i && open[j] && dist[i][j] <= cutoff)
          ++count;
      }
      if (count > centroid_count) {
        centroid = i;
        centroid_count = count;
      }
    }
    Cluster c { centroid, { centroid } };
    open[centroid] = false;
    for (int j = 0; j < n; ++j) {
      if (open[j] && dist[centroid][j] <= cutoff) {
        c.members.push_back(j);
        open[j] = false;
      }
    }
    out.clusters.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> load_corpus(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open corpus " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string smiles;
    if (fields >> smiles && smiles[0] != '#')
      out.push_back(smiles);
  }
  return out;
}

MolGraph random_permutation(const MolGraph &mol, std::mt19937_64 &rng) {
  std::vector<int> perm(mol.num_atoms());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return mol.permuted(perm);
}

} // namespace retro::testing
