//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/molgraph.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

namespace retro {
namespace {

constexpr std::array<std::string_view, 119> kElements = {
  "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
  "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
  "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
  "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
  "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
  "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
  "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
  "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
  "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

std::vector<std::string_view> make_chirality_tags() {
  static std::vector<std::string> storage;
  std::vector<std::string_view> tags = { "", "@", "@@" };
  auto add_class = [&](std::string_view cls, int count) {
    for (int i = 1; i <= count; ++i)
      storage.push_back(std::string("@") + std::string(cls)
                        + std::to_string(i));
  };
  add_class("TH", 2);
  add_class("AL", 2);
  add_class("SP", 3);
  add_class("TB", 20);
  add_class("OH", 30);
  for (const std::string &s: storage)
    tags.push_back(s);
  return tags;
}

bool has_aromatic_spelling(int z) {
  switch (z) {
  case 5:  // b
  case 6:  // c
  case 7:  // n
  case 8:  // o
  case 15: // p
  case 16: // s
  case 33: // as
  case 34: // se
  case 52: // te
    return true;
  default:
    return false;
  }
}

} // namespace

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 0
      || atomic_number >= static_cast<int>(kElements.size()))
    return {};
  return kElements[atomic_number];
}

int atomic_number_of(std::string_view symbol) {
  for (std::size_t z = 0; z < kElements.size(); ++z) {
    if (kElements[z] == symbol)
      return static_cast<int>(z);
  }
  return -1;
}

std::span<const std::string_view> chirality_tags() {
  static const std::vector<std::string_view> tags = make_chirality_tags();
  return tags;
}

ParseError::ParseError(std::string_view message, std::size_t offset)
    : std::runtime_error("SMILES parse error at byte " + std::to_string(offset)
                         + ": " + std::string(message)),
      reason_(message), offset_(offset) { }

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = num_atoms();
  for (const Atom &a: atoms_) {
    if (a.atomic_number >= kElements.size())
      throw std::invalid_argument("atomic number out of range");
    if (a.aromatic && !has_aromatic_spelling(a.atomic_number))
      throw std::invalid_argument("aromatic flag on element "
                                  + std::string(kElements[a.atomic_number]));
    if (a.chirality >= chirality_tags().size())
      throw std::invalid_argument("unknown chirality tag");
  }

  std::vector<int> degree(n, 0);
  for (const Bond &b: bonds_) {
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n)
      throw std::invalid_argument("bond endpoint out of range");
    if (b.begin == b.end)
      throw std::invalid_argument("self bond");
    if (b.stereo != BondStereo::kNone && b.order != BondOrder::kSingle)
      throw std::invalid_argument("directional marker on non-single bond");
    ++degree[b.begin];
    ++degree[b.end];
  }

  offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (int i = 0; i < num_bonds(); ++i) {
    const Bond &b = bonds_[i];
    adjacency_[fill[b.begin]++] = { b.end, i };
    adjacency_[fill[b.end]++] = { b.begin, i };
  }
  for (int i = 0; i < n; ++i) {
    auto first = adjacency_.begin() + offsets_[i];
    auto last = adjacency_.begin() + offsets_[i + 1];
    std::sort(first, last, [](const Neighbor &x, const Neighbor &y) {
      return x.atom < y.atom;
    });
    if (std::adjacent_find(first, last,
                           [](const Neighbor &x, const Neighbor &y) {
                             return x.atom == y.atom;
                           })
        != last)
      throw std::invalid_argument("duplicate bond");
  }

  component_.assign(n, -1);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i) {
    if (component_[i] >= 0)
      continue;
    component_[i] = num_components_;
    stack.push_back(i);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: neighbors(u)) {
        if (component_[nb.atom] < 0) {
          component_[nb.atom] = num_components_;
          stack.push_back(nb.atom);
        }
      }
    }
    ++num_components_;
  }
}

int MolGraph::total_charge() const {
  return std::accumulate(atoms_.begin(), atoms_.end(), 0,
                         [](int acc, const Atom &a) { return acc + a.charge; });
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != num_atoms())
    throw std::invalid_argument("permutation size mismatch");
  std::vector<Atom> atoms(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    atoms[perm[i]] = atoms_[i];
  std::vector<Bond> bonds = bonds_;
  for (Bond &b: bonds) {
    b.begin = perm[b.begin];
    b.end = perm[b.end];
  }
  return { std::move(atoms), std::move(bonds) };
}

} // namespace retro
