//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/predictor.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

namespace retro {
namespace {

bool keys_less(const std::vector<CanonicalKey> &a,
               const std::vector<CanonicalKey> &b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void sort_and_rank(std::vector<Prediction> &preds) {
  std::sort(preds.begin(), preds.end(),
            [](const Prediction &x, const Prediction &y) {
              if (x.prior != y.prior)
                return x.prior > y.prior;
              return keys_less(x.reactants, y.reactants);
            });
  for (std::size_t i = 0; i < preds.size(); ++i)
    preds[i].rank = static_cast<int>(i) + 1;
}

// Splits dot-joined reactant SMILES into canonical component keys.
std::optional<std::vector<CanonicalKey>>
reactant_keys(const std::vector<std::string> &smiles) {
  std::vector<CanonicalKey> keys;
  try {
    for (const std::string &s: smiles) {
      MolGraph mol = parse_smiles(s);
      std::string canon = write_canonical_smiles(mol);
      std::string_view view(canon);
      while (!view.empty()) {
        std::size_t dot = view.find('.');
        keys.emplace_back(std::string(view.substr(0, dot)));
        if (dot == std::string_view::npos)
          break;
        view.remove_prefix(dot + 1);
      }
    }
  } catch (const ParseError &) {
    return std::nullopt;
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (true) {
    std::size_t p = s.find(sep);
    out.emplace_back(s.substr(0, p));
    if (p == std::string_view::npos)
      break;
    s.remove_prefix(p + 1);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

} // namespace

std::vector<Prediction> normalize_predictions(const CanonicalKey &product,
                                              std::span<const RawPrediction> raw,
                                              NormalizeStats *stats) {
  NormalizeStats local;
  NormalizeStats &st = stats ? *stats : local;

  std::map<std::vector<CanonicalKey>, double> best;
  for (const RawPrediction &r: raw) {
    if (!(r.prior > 0.0 && r.prior <= 1.0)) {
      ++st.bad_prior;
      continue;
    }
    auto keys = reactant_keys(r.reactants);
    if (!keys) {
      ++st.unparsable;
      continue;
    }
    if (keys->empty()) {
      ++st.empty;
      continue;
    }
    if (std::find(keys->begin(), keys->end(), product) != keys->end()) {
      ++st.identity_loop;
      continue;
    }
    auto [it, inserted] = best.try_emplace(std::move(*keys), r.prior);
    if (!inserted) {
      ++st.duplicates;
      it->second = std::max(it->second, r.prior);
    }
  }

  std::vector<Prediction> out;
  out.reserve(best.size());
  for (auto &[keys, prior]: best)
    out.push_back({ keys, prior, 0 });
  sort_and_rank(out);
  return out;
}

std::vector<ReactionRow> read_reaction_rows(std::istream &in,
                                            const std::string &source) {
  std::vector<ReactionRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#')
      continue;
    std::vector<std::string> fields = split(view, '\t');
    if (fields.size() < 2 || fields.size() > 3)
      throw ReactionFileError(source + ":" + std::to_string(lineno)
                              + ": expected 2 or 3 tab-separated fields");
    ReactionRow row;
    row.line = lineno;
    row.product = std::string(trim(fields[0]));
    std::string reactants(trim(fields[1]));
    if (row.product.empty() || reactants.empty())
      throw ReactionFileError(source + ":" + std::to_string(lineno)
                              + ": empty product or reactants");
    row.reactants = split(reactants, '.');
    if (fields.size() == 3) {
      std::string_view c = trim(fields[2]);
      long count = 0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
      if (ec != std::errc() || ptr != c.data() + c.size() || count < 1)
        throw ReactionFileError(source + ":" + std::to_string(lineno)
                                + ": count must be an integer >= 1");
      row.count = count;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::shared_ptr<const TablePredictor>
TablePredictor::from_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ReactionFileError("cannot open reaction file: " + path);
  return from_stream(in, path);
}

std::shared_ptr<const TablePredictor>
TablePredictor::from_stream(std::istream &in, const std::string &source) {
  std::vector<ReactionRow> rows = read_reaction_rows(in, source);
  if (rows.empty())
    throw ReactionFileError(source + ": no reactions");

  struct Entry {
    long total = 0;
    std::map<std::vector<CanonicalKey>, long> counts;
  };
  std::unordered_map<CanonicalKey, Entry> entries;
  for (const ReactionRow &row: rows) {
    std::optional<CanonicalKey> product = try_canonicalize(row.product);
    auto keys = reactant_keys(row.reactants);
    if (!product || !keys || keys->empty())
      throw ReactionFileError(source + ":" + std::to_string(row.line)
                              + ": unparsable SMILES");
    Entry &e = entries[*product];
    e.total += row.count;
    e.counts[std::move(*keys)] += row.count;
  }

  std::unordered_map<CanonicalKey, std::vector<Prediction>> table;
  for (auto &[product, entry]: entries) {
    std::vector<Prediction> preds;
    for (auto &[keys, count]: entry.counts) {
      // Identity loops stay in the denominator but are never offered.
      if (std::find(keys.begin(), keys.end(), product) != keys.end())
        continue;
      preds.push_back({ keys,
                        static_cast<double>(count)
                            / static_cast<double>(entry.total),
                        0 });
    }
    sort_and_rank(preds);
    table.emplace(product, std::move(preds));
  }
  return std::shared_ptr<const TablePredictor>(
      new TablePredictor(std::move(table)));
}

std::vector<Prediction> TablePredictor::lookup(const CanonicalKey &product,
                                               int top_k) const {
  if (top_k < 1)
    throw std::invalid_argument("top_k must be >= 1");
  auto it = table_.find(product);
  if (it == table_.end())
    return {};
  const std::size_t k = std::min<std::size_t>(it->second.size(), top_k);
  return { it->second.begin(), it->second.begin() + k };
}

std::vector<Prediction> TablePredictor::predict(const CanonicalKey &product,
                                                int top_k) {
  return lookup(product, top_k);
}

PredictorFactory make_predictor_factory(const std::string &uri,
                                        double timeout_s) {
  if (uri.rfind("table:", 0) == 0) {
    auto table = TablePredictor::from_file(uri.substr(6));
    return [table]() -> std::unique_ptr<Predictor> {
      return std::make_unique<SharedTablePredictor>(table);
    };
  }
  if (uri.rfind("cmd:", 0) == 0) {
    std::string command = uri.substr(4);
    if (command.empty())
      throw std::invalid_argument("empty predictor command");
    return [command, timeout_s]() -> std::unique_ptr<Predictor> {
      return ExternalPredictor::spawn(command, timeout_s);
    };
  }
  throw std::invalid_argument("predictor must be table:<path> or "
                              "cmd:<command>, got '"
                              + uri + "'");
}

} // namespace retro
