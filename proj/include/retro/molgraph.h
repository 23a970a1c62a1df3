//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_MOLGRAPH_H_
#define RETRO_MOLGRAPH_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace retro {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Directional single-bond marker, read from `Bond::begin` towards
// `Bond::end`. kUp is '/', kDown is '\'.
enum class BondStereo : std::uint8_t {
  kNone = 0,
  kUp = 1,
  kDown = 2,
};

struct Atom {
  // 0 is the '*' wildcard.
  std::uint8_t atomic_number = 6;
  std::int8_t charge = 0;
  // Explicit bracket hydrogens only; implicit hydrogens are never computed.
  std::uint8_t hydrogens = 0;
  bool aromatic = false;
  std::optional<int> isotope;
  // Index into chirality_tags(); 0 means no tag.
  std::uint8_t chirality = 0;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  BondStereo stereo = BondStereo::kNone;

  friend bool operator==(const Bond &, const Bond &) = default;
};

// Parsed molecular graph. Immutable once constructed; the constructor
// validates the structural invariants (bond endpoints in range, no self or
// duplicate bonds, aromatic flags only on elements that have an aromatic
// SMILES spelling).
class MolGraph {
public:
  struct Neighbor {
    int atom;
    int bond;
  };

  MolGraph() = default;
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int idx) const { return atoms_[idx]; }
  const Bond &bond(int idx) const { return bonds_[idx]; }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  int num_components() const { return num_components_; }
  int component_of(int atom) const { return component_[atom]; }

  std::span<const Neighbor> neighbors(int atom) const {
    return { adjacency_.data() + offsets_[atom],
             adjacency_.data() + offsets_[atom + 1] };
  }
  int degree(int atom) const { return offsets_[atom + 1] - offsets_[atom]; }

  int total_charge() const;

  // Relabels atom i as perm[i]. Bond directions are carried over.
  MolGraph permuted(std::span<const int> perm) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<int> offsets_ = { 0 };
  std::vector<Neighbor> adjacency_;
  std::vector<int> component_;
  int num_components_ = 0;
};

// Error raised by parse_smiles. `offset()` is the byte offset in the input
// at which the problem was detected.
class ParseError: public std::runtime_error {
public:
  ParseError(std::string_view message, std::size_t offset);

  std::size_t offset() const { return offset_; }
  const std::string &reason() const { return reason_; }

private:
  std::string reason_;
  std::size_t offset_;
};

// Order-invariant molecule identity. The value is the canonical SMILES of
// the graph, so keys are human readable and parse back to the same key.
class CanonicalKey {
public:
  CanonicalKey() = default;
  explicit CanonicalKey(std::string value): value_(std::move(value)) { }

  const std::string &str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend bool operator==(const CanonicalKey &,
                         const CanonicalKey &) = default;
  friend auto operator<=>(const CanonicalKey &,
                          const CanonicalKey &) = default;

private:
  std::string value_;
};

MolGraph parse_smiles(std::string_view text);

// Canonical SMILES: components are written individually from their
// canonical atom ranking and joined by '.' in lexicographic order.
std::string write_canonical_smiles(const MolGraph &mol);

CanonicalKey canonical_key(const MolGraph &mol);

// parse_smiles followed by canonical_key.
CanonicalKey canonicalize(std::string_view smiles);

// Non-throwing variant; nullopt when the text does not parse.
std::optional<CanonicalKey> try_canonicalize(std::string_view smiles);

// Canonical atom ranking of a graph: rank[i] is the position of atom i in
// the canonical order. Ranks restart from 0 in every component.
std::vector<int> canonical_ranks(const MolGraph &mol);

std::string_view element_symbol(int atomic_number);
// Returns -1 for unknown symbols.
int atomic_number_of(std::string_view symbol);
std::span<const std::string_view> chirality_tags();

} // namespace retro

template <>
struct std::hash<retro::CanonicalKey> {
  std::size_t operator()(const retro::CanonicalKey &key) const noexcept {
    return std::hash<std::string>()(key.str());
  }
};

#endif // RETRO_MOLGRAPH_H_
