//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_STOCK_H_
#define RETRO_STOCK_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "retro/molgraph.h"

namespace retro {

class StockError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct StockLoadReport {
  std::size_t lines = 0;
  std::size_t unparsable = 0;
  std::size_t duplicates = 0;
};

// Purchasable building blocks with exact membership on canonical keys.
// Immutable after load.
class Stock {
public:
  Stock() = default;

  // One SMILES per line (anything after the first whitespace is ignored);
  // files ending in ".gz" are read through zlib. Unparsable lines are
  // counted; more than half of the non-empty lines failing is an error.
  static Stock load(const std::string &path,
                    std::optional<std::size_t> limit = std::nullopt,
                    int threads = 0);

  static Stock from_smiles(std::span<const std::string> smiles,
                           std::string label = "<memory>");
  static Stock from_keys(std::vector<CanonicalKey> keys,
                         std::string label = "<memory>");

  bool contains(const CanonicalKey &key) const {
    return keys_.find(key) != keys_.end();
  }

  std::size_t size() const { return keys_.size(); }
  const std::string &source() const { return source_; }
  const StockLoadReport &report() const { return report_; }

private:
  std::unordered_set<CanonicalKey> keys_;
  std::string source_;
  StockLoadReport report_;
};

// Writes a key set one per line, sorted.
void write_stock_file(const std::string &path,
                      const std::vector<CanonicalKey> &keys);

} // namespace retro

#endif // RETRO_STOCK_H_
