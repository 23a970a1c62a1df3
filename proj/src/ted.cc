//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <vector>

#include "retro/routes.h"

namespace retro {
namespace {

// Postorder numbering with Zhang-Shasha bookkeeping.
struct Postorder {
  std::vector<int> node;     // postorder position -> tree node
  std::vector<int> leftmost; // leftmost leaf descendant, postorder
  std::vector<int> keyroots; // ascending
};

int visit(const OrderedTree &tree, int n, Postorder &post) {
  int first_leaf = -1;
  for (int c: tree.children[n]) {
    const int idx = visit(tree, c, post);
    if (first_leaf < 0)
      first_leaf = post.leftmost[idx];
  }
  const int self = static_cast<int>(post.node.size());
  post.node.push_back(n);
  post.leftmost.push_back(first_leaf < 0 ? self : first_leaf);
  return self;
}

Postorder postorder(const OrderedTree &tree) {
  Postorder post;
  if (tree.size() == 0)
    return post;
  visit(tree, 0, post);
  const int n = static_cast<int>(post.node.size());
  if (n != tree.size())
    throw std::invalid_argument("ordered tree is not connected from node 0");
  // A keyroot is the highest node sharing its leftmost leaf.
  std::vector<int> highest(n, -1);
  for (int i = 0; i < n; ++i)
    highest[post.leftmost[i]] = i;
  for (int i = 0; i < n; ++i) {
    if (highest[i] >= 0)
      post.keyroots.push_back(highest[i]);
  }
  std::sort(post.keyroots.begin(), post.keyroots.end());
  return post;
}

struct OrderedChild {
  const RouteMol *mol;
  std::string hash;
};

int add_route_node(const RouteMol &mol, OrderedTree &tree,
                   std::vector<CanonicalKey> *labels) {
  const int self = tree.size();
  tree.children.emplace_back();
  if (labels != nullptr)
    labels->push_back(mol.molecule);
  if (!mol.reaction)
    return self;
  std::vector<OrderedChild> kids;
  for (const RouteMol &c: mol.reaction->children)
    kids.push_back({ &c, route_hash(c) });
  std::sort(kids.begin(), kids.end(),
            [](const OrderedChild &a, const OrderedChild &b) {
              if (a.mol->molecule != b.mol->molecule)
                return a.mol->molecule < b.mol->molecule;
              return a.hash < b.hash;
            });
  for (const OrderedChild &k: kids) {
    const int idx = add_route_node(*k.mol, tree, labels);
    tree.children[self].push_back(idx);
  }
  return self;
}

} // namespace

double tree_edit_distance(const OrderedTree &a, const OrderedTree &b,
                          const RelabelCost &relabel) {
  const Postorder pa = postorder(a);
  const Postorder pb = postorder(b);
  const int na = a.size();
  const int nb = b.size();
  if (na == 0 || nb == 0)
    return static_cast<double>(na + nb);

  std::vector<std::vector<double>> cost(na, std::vector<double>(nb));
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j)
      cost[i][j] = relabel(pa.node[i], pb.node[j]);
  }

  std::vector<std::vector<double>> td(na, std::vector<double>(nb, 0.0));
  std::vector<std::vector<double>> fd(na + 1, std::vector<double>(nb + 1));
  for (int ki: pa.keyroots) {
    for (int kj: pb.keyroots) {
      const int li = pa.leftmost[ki];
      const int lj = pb.leftmost[kj];
      // fd[x][y]: forest of the first x nodes from li against the first y
      // nodes from lj.
      fd[0][0] = 0.0;
      for (int x = 1; x <= ki - li + 1; ++x)
        fd[x][0] = fd[x - 1][0] + 1.0;
      for (int y = 1; y <= kj - lj + 1; ++y)
        fd[0][y] = fd[0][y - 1] + 1.0;
      for (int x = 1; x <= ki - li + 1; ++x) {
        const int i = li + x - 1;
        for (int y = 1; y <= kj - lj + 1; ++y) {
          const int j = lj + y - 1;
          const double del = fd[x - 1][y] + 1.0;
          const double ins = fd[x][y - 1] + 1.0;
          if (pa.leftmost[i] == li && pb.leftmost[j] == lj) {
            fd[x][y] = std::min({ del, ins, fd[x - 1][y - 1] + cost[i][j] });
            td[i][j] = fd[x][y];
          } else {
            const int px = pa.leftmost[i] - li;
            const int py = pb.leftmost[j] - lj;
            fd[x][y] = std::min({ del, ins, fd[px][py] + td[i][j] });
          }
        }
      }
    }
  }
  return td[na - 1][nb - 1];
}

OrderedTree route_tree(const Route &route, std::vector<CanonicalKey> *labels) {
  OrderedTree tree;
  if (labels != nullptr)
    labels->clear();
  add_route_node(route.root, tree, labels);
  return tree;
}

const Fingerprint &RouteDistance::fingerprint(const CanonicalKey &key) {
  auto it = cache_.find(key);
  if (it != cache_.end())
    return it->second;
  Fingerprint fp = morgan_fingerprint(parse_smiles(key.str()), 2, 1024);
  return cache_.emplace(key, std::move(fp)).first->second;
}

double RouteDistance::relabel_cost(const CanonicalKey &a,
                                   const CanonicalKey &b) {
  if (a == b)
    return 0.0;
  const double d = 1.0 - tanimoto(fingerprint(a), fingerprint(b));
  return std::ldexp(std::round(std::ldexp(d, 32)), -32);
}

TedResult RouteDistance::operator()(const Route &a, const Route &b) {
  std::vector<CanonicalKey> la, lb;
  const OrderedTree ta = route_tree(a, &la);
  const OrderedTree tb = route_tree(b, &lb);
  TedResult result;
  result.raw = tree_edit_distance(ta, tb, [&](int i, int j) {
    return relabel_cost(la[i], lb[j]);
  });
  result.normalized = result.raw / static_cast<double>(ta.size() + tb.size());
  return result;
}

TedResult route_ted(const Route &a, const Route &b) {
  RouteDistance distance;
  return distance(a, b);
}

} // namespace retro
