//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <stdexcept>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "retro/molgraph.h"

namespace retro {
namespace {

int directed_stereo(const Bond &b, int from) {
  if (b.stereo == BondStereo::kNone || b.begin == from)
    return static_cast<int>(b.stereo);
  return b.stereo == BondStereo::kUp ? static_cast<int>(BondStereo::kDown)
                                     : static_cast<int>(BondStereo::kUp);
}

// Bond label as seen from `from`; direction-aware for '/' and '\'.
int bond_code(const Bond &b, int from) {
  return static_cast<int>(b.order) * 3 + directed_stereo(b, from);
}

class UnionFind {
public:
  explicit UnionFind(int n): parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
  std::vector<int> parent_;
};

// Canonical labelling of one connected component.
//
// Cells of the partition are identified by their start position in the
// sorted order, so individualising an atom v of cell r gives v rank r and
// the rest of the cell rank r + 1. Refinement is the usual iterated
// neighbourhood-signature split until the number of cells is stable.
// Remaining ties are resolved by trying every atom of the first
// non-singleton cell and keeping the labelling with the smallest encoded
// graph; automorphisms discovered at equal leaves prune branches that lie
// in the same orbit.
class ComponentCanon {
public:
  ComponentCanon(const MolGraph &mol, const std::vector<int> &atoms)
      : n_(static_cast<int>(atoms.size())) {
    std::vector<int> local(mol.num_atoms(), -1);
    for (int i = 0; i < n_; ++i)
      local[atoms[i]] = i;

    offsets_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i)
      offsets_[i + 1] = offsets_[i] + mol.degree(atoms[i]);
    nbr_.resize(offsets_[n_]);
    code_.resize(offsets_[n_]);
    for (int i = 0; i < n_; ++i) {
      int k = offsets_[i];
      for (const MolGraph::Neighbor &nb: mol.neighbors(atoms[i])) {
        nbr_[k] = local[nb.atom];
        code_[k] = bond_code(mol.bond(nb.bond), atoms[i]);
        ++k;
      }
    }

    using Invariant = std::tuple<int, int, int, int, int, int, int>;
    std::vector<Invariant> inv(n_);
    for (int i = 0; i < n_; ++i) {
      const Atom &a = mol.atom(atoms[i]);
      inv[i] = { a.atomic_number,        a.charge,    mol.degree(atoms[i]),
                 a.hydrogens,            a.isotope.value_or(-1),
                 a.aromatic ? 1 : 0,     a.chirality };
    }
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return inv[x] < inv[y]; });
    initial_.assign(n_, 0);
    for (int p = 0; p < n_; ++p) {
      if (p > 0 && inv[order[p]] == inv[order[p - 1]])
        initial_[order[p]] = initial_[order[p - 1]];
      else
        initial_[order[p]] = p;
    }
  }

  std::vector<int> run() {
    if (n_ == 1)
      return { 0 };
    std::vector<int> prefix;
    search(initial_, prefix);
    return best_ranks_;
  }

private:
  int refine(std::vector<int> &ranks) {
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> sig(nbr_.size());
    int cells = count_cells(ranks);
    while (cells < n_) {
      for (int i = 0; i < n_; ++i) {
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
          sig[k] = (static_cast<std::uint64_t>(code_[k]) << 32)
                   | static_cast<std::uint32_t>(ranks[nbr_[k]]);
        }
        std::sort(sig.begin() + offsets_[i], sig.begin() + offsets_[i + 1]);
      }
      auto less = [&](int x, int y) {
        if (ranks[x] != ranks[y])
          return ranks[x] < ranks[y];
        return std::lexicographical_compare(
            sig.begin() + offsets_[x], sig.begin() + offsets_[x + 1],
            sig.begin() + offsets_[y], sig.begin() + offsets_[y + 1]);
      };
      std::sort(order.begin(), order.end(), less);
      std::vector<int> next(n_);
      int next_cells = 0;
      for (int p = 0; p < n_; ++p) {
        if (p > 0 && !less(order[p - 1], order[p])) {
          next[order[p]] = next[order[p - 1]];
        } else {
          next[order[p]] = p;
          ++next_cells;
        }
      }
      ranks.swap(next);
      if (next_cells == cells)
        break;
      cells = next_cells;
    }
    return cells;
  }

  int count_cells(const std::vector<int> &ranks) const {
    std::vector<char> seen(n_, 0);
    int cells = 0;
    for (int r: ranks) {
      if (!seen[r]) {
        seen[r] = 1;
        ++cells;
      }
    }
    return cells;
  }

  std::vector<std::uint64_t> encode(const std::vector<int> &ranks) const {
    std::vector<int> atom_at(n_);
    for (int i = 0; i < n_; ++i)
      atom_at[ranks[i]] = i;
    std::vector<std::uint64_t> form;
    form.reserve(n_ + nbr_.size() / 2);
    for (int p = 0; p < n_; ++p)
      form.push_back(static_cast<std::uint64_t>(initial_[atom_at[p]]));
    std::vector<std::uint64_t> edges;
    for (int p = 0; p < n_; ++p) {
      const int i = atom_at[p];
      edges.clear();
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        const int q = ranks[nbr_[k]];
        if (q > p)
          edges.push_back((static_cast<std::uint64_t>(p) << 40)
                          | (static_cast<std::uint64_t>(q) << 8)
                          | static_cast<std::uint64_t>(code_[k]));
      }
      std::sort(edges.begin(), edges.end());
      form.insert(form.end(), edges.begin(), edges.end());
    }
    return form;
  }

  void leaf(const std::vector<int> &ranks) {
    std::vector<std::uint64_t> form = encode(ranks);
    if (best_form_.empty() || form < best_form_) {
      best_form_ = std::move(form);
      best_ranks_ = ranks;
      return;
    }
    if (form == best_form_) {
      // ranks and best_ranks_ give the same labelled graph, so mapping
      // each atom to the atom holding its label in the best leaf is an
      // automorphism.
      std::vector<int> best_atom_at(n_);
      for (int i = 0; i < n_; ++i)
        best_atom_at[best_ranks_[i]] = i;
      std::vector<int> perm(n_);
      for (int i = 0; i < n_; ++i)
        perm[i] = best_atom_at[ranks[i]];
      automorphisms_.push_back(std::move(perm));
    }
  }

  bool same_orbit(int v, const std::vector<int> &explored,
                  const std::vector<int> &prefix) const {
    if (explored.empty() || automorphisms_.empty())
      return false;
    UnionFind uf(n_);
    bool any = false;
    for (const std::vector<int> &g: automorphisms_) {
      bool fixes = std::all_of(prefix.begin(), prefix.end(),
                               [&](int p) { return g[p] == p; });
      if (!fixes)
        continue;
      any = true;
      for (int i = 0; i < n_; ++i)
        uf.unite(i, g[i]);
    }
    if (!any)
      return false;
    const int root = uf.find(v);
    return std::any_of(explored.begin(), explored.end(),
                       [&](int u) { return uf.find(u) == root; });
  }

  void search(std::vector<int> ranks, std::vector<int> &prefix) {
    if (refine(ranks) == n_) {
      leaf(ranks);
      return;
    }

    std::vector<int> count(n_, 0);
    for (int r: ranks)
      ++count[r];
    int target = -1;
    for (int r = 0; r < n_; ++r) {
      if (count[r] > 1) {
        target = r;
        break;
      }
    }

    std::vector<int> cell;
    for (int i = 0; i < n_; ++i) {
      if (ranks[i] == target)
        cell.push_back(i);
    }

    std::vector<int> explored;
    for (int v: cell) {
      if (same_orbit(v, explored, prefix))
        continue;
      std::vector<int> child = ranks;
      for (int u: cell) {
        if (u != v)
          child[u] = target + 1;
      }
      prefix.push_back(v);
      search(std::move(child), prefix);
      prefix.pop_back();
      explored.push_back(v);
    }
  }

  int n_;
  std::vector<int> offsets_;
  std::vector<int> nbr_;
  std::vector<int> code_;
  std::vector<int> initial_;
  std::vector<std::uint64_t> best_form_;
  std::vector<int> best_ranks_;
  std::vector<std::vector<int>> automorphisms_;
};

bool is_organic_subset(int z) {
  switch (z) {
  case 0:
  case 5:
  case 6:
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 35:
  case 53:
    return true;
  default:
    return false;
  }
}

void append_atom(std::string &out, const Atom &a) {
  const bool bare = is_organic_subset(a.atomic_number) && a.charge == 0
                    && a.hydrogens == 0 && !a.isotope && a.chirality == 0;
  std::string symbol(element_symbol(a.atomic_number));
  if (a.aromatic)
    symbol[0] = static_cast<char>(symbol[0] - 'A' + 'a');
  if (bare) {
    out += symbol;
    return;
  }
  out.push_back('[');
  if (a.isotope)
    out += std::to_string(*a.isotope);
  out += symbol;
  if (a.chirality != 0)
    out += chirality_tags()[a.chirality];
  if (a.hydrogens > 0) {
    out.push_back('H');
    if (a.hydrogens > 1)
      out += std::to_string(a.hydrogens);
  }
  if (a.charge != 0) {
    out.push_back(a.charge > 0 ? '+' : '-');
    const int mag = a.charge > 0 ? a.charge : -a.charge;
    if (mag > 1)
      out += std::to_string(mag);
  }
  out.push_back(']');
}

void append_bond(std::string &out, const MolGraph &mol, const Bond &b,
                 int from, int to) {
  const bool both_aromatic = mol.atom(from).aromatic && mol.atom(to).aromatic;
  switch (b.order) {
  case BondOrder::kSingle: {
    const int stereo = directed_stereo(b, from);
    if (stereo == static_cast<int>(BondStereo::kUp))
      out.push_back('/');
    else if (stereo == static_cast<int>(BondStereo::kDown))
      out.push_back('\\');
    else if (both_aromatic)
      out.push_back('-');
    break;
  }
  case BondOrder::kDouble:
    out.push_back('=');
    break;
  case BondOrder::kTriple:
    out.push_back('#');
    break;
  case BondOrder::kAromatic:
    if (!both_aromatic)
      out.push_back(':');
    break;
  }
}

void append_ring_number(std::string &out, int number) {
  if (number < 10) {
    out.push_back(static_cast<char>('0' + number));
  } else {
    out.push_back('%');
    out.push_back(static_cast<char>('0' + number / 10));
    out.push_back(static_cast<char>('0' + number % 10));
  }
}

// Depth-first SMILES writer driven by canonical ranks: the traversal starts
// at rank 0 and visits neighbours in rank order, so the output depends only
// on the labelled graph.
class ComponentWriter {
public:
  ComponentWriter(const MolGraph &mol, const std::vector<int> &atoms,
                  const std::vector<int> &rank_of)
      : mol_(mol), rank_of_(rank_of) {
    start_ = *std::min_element(atoms.begin(), atoms.end(), [&](int x, int y) {
      return rank_of_[x] < rank_of_[y];
    });
  }

  std::string write() {
    const int n = mol_.num_atoms();
    visit_index_.assign(n, -1);
    tree_parent_bond_.assign(n, -1);
    children_.assign(n, {});
    ring_events_.assign(n, {});
    bond_is_ring_.assign(mol_.num_bonds(), 0);
    discover(start_);

    std::string out;
    digit_of_bond_.assign(mol_.num_bonds(), -1);
    emit(start_, out);
    return out;
  }

private:
  struct RingEvent {
    int bond;
    int partner;
    bool opening;
  };

  std::vector<MolGraph::Neighbor> ordered_neighbors(int u) const {
    auto span = mol_.neighbors(u);
    std::vector<MolGraph::Neighbor> nbrs(span.begin(), span.end());
    std::sort(nbrs.begin(), nbrs.end(),
              [&](const MolGraph::Neighbor &x, const MolGraph::Neighbor &y) {
                return rank_of_[x.atom] < rank_of_[y.atom];
              });
    return nbrs;
  }

  void discover(int u) {
    visit_index_[u] = counter_++;
    for (const MolGraph::Neighbor &nb: ordered_neighbors(u)) {
      if (nb.bond == tree_parent_bond_[u])
        continue;
      if (visit_index_[nb.atom] < 0) {
        tree_parent_bond_[nb.atom] = nb.bond;
        children_[u].push_back(nb);
        discover(nb.atom);
      } else if (!bond_is_ring_[nb.bond]) {
        // nb.atom is an ancestor still on the stack: it opens, u closes.
        bond_is_ring_[nb.bond] = 1;
        ring_events_[nb.atom].push_back({ nb.bond, u, true });
        ring_events_[u].push_back({ nb.bond, nb.atom, false });
      }
    }
  }

  void emit(int u, std::string &out) {
    append_atom(out, mol_.atom(u));

    std::vector<RingEvent> &events = ring_events_[u];
    std::stable_sort(events.begin(), events.end(),
                     [&](const RingEvent &x, const RingEvent &y) {
                       if (x.opening != y.opening)
                         return !x.opening;
                       return visit_index_[x.partner]
                              < visit_index_[y.partner];
                     });
    std::vector<int> released;
    for (const RingEvent &ev: events) {
      if (!ev.opening) {
        const int digit = digit_of_bond_[ev.bond];
        append_ring_number(out, digit);
        released.push_back(digit);
        continue;
      }
      int digit = 1;
      while (digit < 100 && digit_in_use_[digit])
        ++digit;
      if (digit >= 100)
        throw std::runtime_error("too many open ring bonds to write SMILES");
      digit_in_use_[digit] = 1;
      digit_of_bond_[ev.bond] = digit;
      append_bond(out, mol_, mol_.bond(ev.bond), u, ev.partner);
      append_ring_number(out, digit);
    }
    for (int d: released)
      digit_in_use_[d] = 0;

    const auto &kids = children_[u];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch)
        out.push_back('(');
      append_bond(out, mol_, mol_.bond(kids[i].bond), u, kids[i].atom);
      emit(kids[i].atom, out);
      if (branch)
        out.push_back(')');
    }
  }

  const MolGraph &mol_;
  const std::vector<int> &rank_of_;
  int start_ = 0;
  int counter_ = 0;
  std::vector<int> visit_index_;
  std::vector<int> tree_parent_bond_;
  std::vector<std::vector<MolGraph::Neighbor>> children_;
  std::vector<std::vector<RingEvent>> ring_events_;
  std::vector<char> bond_is_ring_;
  std::vector<int> digit_of_bond_;
  std::array<char, 100> digit_in_use_ {};
};

std::vector<std::vector<int>> component_atoms(const MolGraph &mol) {
  std::vector<std::vector<int>> comps(mol.num_components());
  for (int i = 0; i < mol.num_atoms(); ++i)
    comps[mol.component_of(i)].push_back(i);
  return comps;
}

} // namespace

std::vector<int> canonical_ranks(const MolGraph &mol) {
  std::vector<int> ranks(mol.num_atoms(), 0);
  for (const std::vector<int> &atoms: component_atoms(mol)) {
    std::vector<int> local = ComponentCanon(mol, atoms).run();
    for (std::size_t i = 0; i < atoms.size(); ++i)
      ranks[atoms[i]] = local[i];
  }
  return ranks;
}

std::string write_canonical_smiles(const MolGraph &mol) {
  const std::vector<int> ranks = canonical_ranks(mol);
  std::vector<std::string> parts;
  for (const std::vector<int> &atoms: component_atoms(mol))
    parts.push_back(ComponentWriter(mol, atoms, ranks).write());
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0)
      out.push_back('.');
    out += parts[i];
  }
  return out;
}

CanonicalKey canonical_key(const MolGraph &mol) {
  return CanonicalKey(write_canonical_smiles(mol));
}

} // namespace retro
