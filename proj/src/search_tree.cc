//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_set>
#include <utility>

#include "retro/retrostar.h"

namespace retro {

SearchTree::SearchTree(CanonicalKey root, MolState state) {
  if (state == MolState::kExpanded)
    throw std::invalid_argument("a new root cannot be expanded");
  MolNode node;
  node.molecule = std::move(root);
  node.state = state;
  node.value = state == MolState::kDead ? kInfinity : 0.0;
  mols_.push_back(std::move(node));
}

int SearchTree::add_reaction(int mol, double prior, int rank, double cost) {
  MolNode &m = mols_.at(mol);
  if (m.state != MolState::kFrontier && m.state != MolState::kExpanded)
    throw std::logic_error("reactions attach to frontier molecules only");
  if (!(cost >= 0.0))
    throw std::invalid_argument("reaction cost must be >= 0");
  m.state = MolState::kExpanded;
  RxnNode r;
  r.parent = mol;
  r.prior = prior;
  r.rank = rank;
  r.cost = cost;
  r.value = cost;
  const int index = static_cast<int>(rxns_.size());
  rxns_.push_back(std::move(r));
  m.reactions.push_back(index);
  return index;
}

int SearchTree::add_reactant(int rxn, CanonicalKey molecule, MolState state) {
  if (state == MolState::kExpanded)
    throw std::invalid_argument("new reactants cannot be expanded");
  RxnNode &r = rxns_.at(rxn);
  MolNode node;
  node.molecule = std::move(molecule);
  node.depth = mols_[r.parent].depth + 1;
  node.state = state;
  node.value = state == MolState::kDead ? kInfinity : 0.0;
  node.parent = rxn;
  const int index = static_cast<int>(mols_.size());
  mols_.push_back(std::move(node));
  r.children.push_back(index);
  return index;
}

void SearchTree::mark_dead(int mol) {
  MolNode &m = mols_.at(mol);
  if (!m.reactions.empty())
    throw std::logic_error("molecule with reactions cannot be dead");
  m.state = MolState::kDead;
  m.value = kInfinity;
}

void SearchTree::update_values() {
  // Children always have larger indices than their parents.
  for (int i = static_cast<int>(mols_.size()) - 1; i >= 0; --i) {
    MolNode &m = mols_[i];
    switch (m.state) {
    case MolState::kFrontier:
    case MolState::kStock:
      m.value = 0.0;
      break;
    case MolState::kDead:
      m.value = kInfinity;
      break;
    case MolState::kExpanded: {
      double best = kInfinity;
      for (int ri: m.reactions) {
        RxnNode &r = rxns_[ri];
        double v = r.cost;
        for (int c: r.children)
          v += mols_[c].value;
        r.value = v;
        best = std::min(best, v);
      }
      m.value = best;
      break;
    }
    }
  }
}

std::vector<double> SearchTree::priorities() const {
  // outside[m]: cost of the cheapest partial solution tree containing m,
  // excluding the subtree below m.
  std::vector<double> outside(mols_.size(), kInfinity);
  outside[0] = 0.0;
  for (std::size_t i = 0; i < mols_.size(); ++i) {
    const MolNode &m = mols_[i];
    for (int ri: m.reactions) {
      const RxnNode &r = rxns_[ri];
      for (std::size_t a = 0; a < r.children.size(); ++a) {
        double o = outside[i] + r.cost;
        for (std::size_t b = 0; b < r.children.size(); ++b) {
          if (b != a)
            o += mols_[r.children[b]].value;
        }
        outside[r.children[a]] = o;
      }
    }
  }
  std::vector<double> prio(mols_.size());
  for (std::size_t i = 0; i < mols_.size(); ++i)
    prio[i] = outside[i] + mols_[i].value;
  return prio;
}

std::optional<int> SearchTree::select_frontier() const {
  const std::vector<double> prio = priorities();
  std::optional<int> best;
  for (std::size_t i = 0; i < mols_.size(); ++i) {
    if (mols_[i].state != MolState::kFrontier || std::isinf(prio[i]))
      continue;
    if (!best
        || std::tie(prio[i], mols_[i].depth)
               < std::tie(prio[*best], mols_[*best].depth))
      best = static_cast<int>(i);
  }
  return best;
}

bool SearchTree::on_path(int mol, const CanonicalKey &molecule) const {
  while (mol >= 0) {
    const MolNode &m = mols_[mol];
    if (m.molecule == molecule)
      return true;
    mol = m.parent < 0 ? -1 : rxns_[m.parent].parent;
  }
  return false;
}

void SearchTree::audit(int max_depth) const {
  auto fail = [](const std::string &what) { throw std::logic_error(what); };
  for (std::size_t i = 0; i < mols_.size(); ++i) {
    const MolNode &m = mols_[i];
    const std::string where = "molecule node " + std::to_string(i) + ": ";
    if (m.depth > max_depth)
      fail(where + "depth exceeds the limit");
    if (i == 0) {
      if (m.parent != -1 || m.depth != 0)
        fail(where + "bad root");
    } else {
      if (m.parent < 0 || m.parent >= static_cast<int>(rxns_.size()))
        fail(where + "bad parent");
      const RxnNode &pr = rxns_[m.parent];
      if (m.depth != mols_[pr.parent].depth + 1)
        fail(where + "bad depth");
      if (std::count(pr.children.begin(), pr.children.end(),
                     static_cast<int>(i))
          != 1)
        fail(where + "not listed by its parent");
      if (on_path(pr.parent, m.molecule))
        fail(where + "repeats an ancestor");
    }
    switch (m.state) {
    case MolState::kFrontier:
      if (m.value != 0.0 || !m.reactions.empty() || m.depth >= max_depth)
        fail(where + "bad frontier node");
      break;
    case MolState::kStock:
      if (m.value != 0.0 || !m.reactions.empty())
        fail(where + "bad stock node");
      break;
    case MolState::kDead:
      if (!std::isinf(m.value) || !m.reactions.empty())
        fail(where + "bad dead node");
      break;
    case MolState::kExpanded: {
      if (m.reactions.empty())
        fail(where + "expanded without reactions");
      double best = kInfinity;
      for (int ri: m.reactions) {
        const RxnNode &r = rxns_[ri];
        if (r.parent != static_cast<int>(i))
          fail(where + "reaction parent mismatch");
        if (!(r.cost >= 0.0))
          fail(where + "negative reaction cost");
        if (r.children.empty())
          fail(where + "reaction without reactants");
        double v = r.cost;
        for (int c: r.children)
          v += mols_[c].value;
        if (v != r.value)
          fail(where + "stale reaction value");
        best = std::min(best, v);
      }
      if (best != m.value)
        fail(where + "value is not the minimum over its reactions");
      break;
    }
    }
  }
}

std::vector<double> SearchTree::solved_costs() const {
  std::vector<double> s(mols_.size(), kInfinity);
  for (int i = static_cast<int>(mols_.size()) - 1; i >= 0; --i) {
    const MolNode &m = mols_[i];
    if (m.state == MolState::kStock) {
      s[i] = 0.0;
    } else if (m.state == MolState::kExpanded) {
      for (int ri: m.reactions) {
        const RxnNode &r = rxns_[ri];
        double v = r.cost;
        for (int c: r.children)
          v += s[c];
        s[i] = std::min(s[i], v);
      }
    }
  }
  return s;
}

namespace {

// Lazy k-best enumeration of solved subtrees. Every molecule keeps a
// cheapest-first list of distinct sub-routes; every reaction keeps a
// cheapest-first list of combinations of its reactants' sub-routes.
class RouteEnumerator {
public:
  explicit RouteEnumerator(const SearchTree &tree)
      : tree_(tree), solved_(tree.solved_costs()), mols_(tree.num_mols()),
        rxns_(tree.num_rxns()) { }

  struct Derivation {
    double cost = 0.0;
    int rxn = -1; // -1 for a stock leaf
    std::vector<int> picks;
    std::string hash;
  };

  // The k-th distinct sub-route of `mol`, or nullptr when there are fewer.
  const Derivation *mol_item(int mol, std::size_t k) {
    MolList &list = mols_[mol];
    if (!list.started)
      start_mol(mol);
    while (mols_[mol].items.size() <= k && !mols_[mol].heap.empty()) {
      const MolCand cand = mols_[mol].heap.top();
      mols_[mol].heap.pop();
      const int ri = tree_.mol(mol).reactions[cand.slot];
      if (rxn_item(ri, cand.index + 1) != nullptr) {
        const Combo &next = rxns_[ri].items[cand.index + 1];
        mols_[mol].heap.push({ next.cost, cand.slot, cand.index + 1 });
      }
      const Combo combo = rxns_[ri].items[cand.index];
      std::vector<std::string> child_hashes;
      const RxnNode &r = tree_.rxn(ri);
      for (std::size_t c = 0; c < r.children.size(); ++c)
        child_hashes.push_back(
            mol_item(r.children[c], combo.picks[c])->hash);
      std::string hash =
          mol_route_hash(tree_.mol(mol).molecule, std::move(child_hashes));
      MolList &ml = mols_[mol];
      if (!ml.seen.insert(hash).second)
        continue;
      ml.items.push_back({ combo.cost, ri, combo.picks, std::move(hash) });
    }
    const MolList &ml = mols_[mol];
    return k < ml.items.size() ? &ml.items[k] : nullptr;
  }

  RouteMol materialize(int mol, std::size_t k, std::vector<double> &costs) {
    const Derivation d = *mol_item(mol, k);
    const MolNode &m = tree_.mol(mol);
    RouteMol out;
    out.molecule = m.molecule;
    out.in_stock = m.state == MolState::kStock;
    if (d.rxn >= 0) {
      const RxnNode &r = tree_.rxn(d.rxn);
      costs.push_back(r.cost);
      RouteRxn rxn;
      rxn.prior = r.prior;
      rxn.rank = r.rank;
      for (std::size_t c = 0; c < r.children.size(); ++c)
        rxn.children.push_back(materialize(r.children[c], d.picks[c], costs));
      out.reaction = std::move(rxn);
    }
    return out;
  }

private:
  struct Combo {
    double cost;
    std::vector<int> picks;
  };
  struct ComboOrder {
    bool operator()(const Combo &a, const Combo &b) const {
      return std::tie(a.cost, a.picks) > std::tie(b.cost, b.picks);
    }
  };
  struct RxnList {
    bool started = false;
    std::vector<Combo> items;
    std::priority_queue<Combo, std::vector<Combo>, ComboOrder> heap;
    std::set<std::vector<int>> visited;
  };
  struct MolCand {
    double cost;
    std::size_t slot;  // position in the molecule's reaction list
    std::size_t index; // position in that reaction's combination list
    bool operator>(const MolCand &o) const {
      return std::tie(cost, slot, index) > std::tie(o.cost, o.slot, o.index);
    }
  };
  struct MolList {
    bool started = false;
    std::vector<Derivation> items;
    std::priority_queue<MolCand, std::vector<MolCand>, std::greater<>> heap;
    std::unordered_set<std::string> seen;
  };

  void start_mol(int mol) {
    mols_[mol].started = true;
    const MolNode &m = tree_.mol(mol);
    if (m.state == MolState::kStock) {
      mols_[mol].items.push_back(
          { 0.0, -1, {}, leaf_route_hash(m.molecule) });
      return;
    }
    if (m.state != MolState::kExpanded || std::isinf(solved_[mol]))
      return;
    for (std::size_t slot = 0; slot < m.reactions.size(); ++slot) {
      const Combo *first = rxn_item(m.reactions[slot], 0);
      if (first != nullptr)
        mols_[mol].heap.push({ first->cost, slot, 0 });
    }
  }

  double combo_cost(const RxnNode &r, const std::vector<int> &picks) {
    double cost = r.cost;
    for (std::size_t c = 0; c < r.children.size(); ++c)
      cost += mol_item(r.children[c], picks[c])->cost;
    return cost;
  }

  const Combo *rxn_item(int rxn, std::size_t k) {
    const RxnNode &r = tree_.rxn(rxn);
    if (!rxns_[rxn].started) {
      rxns_[rxn].started = true;
      bool solved = true;
      for (int c: r.children)
        solved = solved && !std::isinf(solved_[c]);
      if (solved) {
        std::vector<int> zero(r.children.size(), 0);
        rxns_[rxn].visited.insert(zero);
        rxns_[rxn].heap.push({ combo_cost(r, zero), zero });
      }
    }
    while (rxns_[rxn].items.size() <= k && !rxns_[rxn].heap.empty()) {
      Combo top = rxns_[rxn].heap.top();
      rxns_[rxn].heap.pop();
      for (std::size_t c = 0; c < r.children.size(); ++c) {
        std::vector<int> next = top.picks;
        ++next[c];
        if (rxns_[rxn].visited.count(next) != 0)
          continue;
        if (mol_item(r.children[c], next[c]) == nullptr)
          continue;
        rxns_[rxn].visited.insert(next);
        const double cost = combo_cost(r, next);
        rxns_[rxn].heap.push({ cost, std::move(next) });
      }
      rxns_[rxn].items.push_back(std::move(top));
    }
    const RxnList &rl = rxns_[rxn];
    return k < rl.items.size() ? &rl.items[k] : nullptr;
  }

  const SearchTree &tree_;
  std::vector<double> solved_;
  std::vector<MolList> mols_;
  std::vector<RxnList> rxns_;
};

double sorted_sum(std::vector<double> costs) {
  std::sort(costs.begin(), costs.end());
  double total = 0.0;
  for (double c: costs)
    total += c;
  return total;
}

void collect_costs(const RouteMol &mol, double epsilon,
                   std::vector<double> &costs) {
  if (!mol.reaction)
    return;
  if (!mol.reaction->prior)
    throw RouteError("reaction below " + mol.molecule.str()
                     + " has no prior");
  costs.push_back(reaction_cost(*mol.reaction->prior, epsilon));
  for (const RouteMol &c: mol.reaction->children)
    collect_costs(c, epsilon, costs);
}

} // namespace

double route_cost(const Route &route, double epsilon) {
  std::vector<double> costs;
  collect_costs(route.root, epsilon, costs);
  return sorted_sum(std::move(costs));
}

std::vector<ScoredRoute> extract_routes(const SearchTree &tree, int route_cap,
                                        bool dedupe_by_leaf_set) {
  std::vector<ScoredRoute> out;
  if (route_cap < 1)
    return out;
  RouteEnumerator routes(tree);
  std::set<std::vector<CanonicalKey>> leaf_sets;
  for (std::size_t k = 0; static_cast<int>(out.size()) < route_cap; ++k) {
    const RouteEnumerator::Derivation *d = routes.mol_item(0, k);
    if (d == nullptr)
      break;
    const std::string hash = d->hash;
    std::vector<double> costs;
    ScoredRoute scored;
    scored.route.root = routes.materialize(0, k, costs);
    if (dedupe_by_leaf_set
        && !leaf_sets.insert(leaf_set(scored.route)).second)
      continue;
    scored.reactions = static_cast<int>(costs.size());
    scored.cost = sorted_sum(std::move(costs));
    scored.hash = hash;
    out.push_back(std::move(scored));
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredRoute &a, const ScoredRoute &b) {
              return std::tie(a.cost, a.reactions, a.hash)
                     < std::tie(b.cost, b.reactions, b.hash);
            });
  return out;
}

} // namespace retro
