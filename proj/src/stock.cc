//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/stock.h"

#include <algorithm>
#include <fstream>
#include <string_view>
#include <thread>
#include <utility>

#include <zlib.h>

namespace retro {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size()
         && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view first_token(std::string_view line) {
  std::size_t b = 0;
  while (b < line.size() && (line[b] == ' ' || line[b] == '\t'))
    ++b;
  std::size_t e = b;
  while (e < line.size() && line[e] != ' ' && line[e] != '\t'
         && line[e] != '\r' && line[e] != '\n')
    ++e;
  return line.substr(b, e - b);
}

std::vector<std::string> read_lines(const std::string &path,
                                    std::optional<std::size_t> limit) {
  std::vector<std::string> lines;
  auto keep = [&](std::string_view raw) {
    std::string_view tok = first_token(raw);
    if (tok.empty())
      return true;
    lines.emplace_back(tok);
    return !limit || lines.size() < *limit;
  };

  if (ends_with(path, ".gz")) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (gz == nullptr)
      throw StockError("cannot open stock file: " + path);
    std::string pending;
    char buf[1 << 16];
    int n;
    bool more = true;
    while (more && (n = gzread(gz, buf, sizeof buf)) > 0) {
      pending.append(buf, static_cast<std::size_t>(n));
      std::size_t start = 0, nl;
      while ((nl = pending.find('\n', start)) != std::string::npos) {
        if (!keep(std::string_view(pending).substr(start, nl - start))) {
          more = false;
          break;
        }
        start = nl + 1;
      }
      pending.erase(0, start);
    }
    int err = 0;
    const char *msg = gzerror(gz, &err);
    if (err != Z_OK && err != Z_STREAM_END) {
      std::string what = msg ? msg : "gzip error";
      gzclose(gz);
      throw StockError("error reading " + path + ": " + what);
    }
    if (more && !pending.empty())
      keep(pending);
    gzclose(gz);
    return lines;
  }

  std::ifstream in(path);
  if (!in)
    throw StockError("cannot open stock file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (!keep(line))
      break;
  }
  if (in.bad())
    throw StockError("error reading " + path);
  return lines;
}

std::vector<std::optional<CanonicalKey>>
canonicalize_all(std::span<const std::string> smiles, int threads) {
  std::vector<std::optional<CanonicalKey>> keys(smiles.size());
  if (threads <= 0)
    threads = static_cast<int>(
        std::max(1U, std::thread::hardware_concurrency()));
  const std::size_t n = smiles.size();
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      keys[i] = try_canonicalize(smiles[i]);
  };
  if (threads == 1 || n < 4096) {
    work(0, n);
    return keys;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    const std::size_t b = std::min(n, chunk * t);
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back(work, b, e);
  }
  work(0, std::min(n, chunk));
  for (std::thread &th: pool)
    th.join();
  return keys;
}

} // namespace

Stock Stock::load(const std::string &path, std::optional<std::size_t> limit,
                  int threads) {
  std::vector<std::string> lines = read_lines(path, limit);
  std::vector<std::optional<CanonicalKey>> keys =
      canonicalize_all(lines, threads);

  Stock stock;
  stock.source_ = path;
  stock.report_.lines = lines.size();
  stock.keys_.reserve(lines.size());
  for (std::optional<CanonicalKey> &k: keys) {
    if (!k) {
      ++stock.report_.unparsable;
      continue;
    }
    if (!stock.keys_.insert(std::move(*k)).second)
      ++stock.report_.duplicates;
  }
  if (stock.report_.lines > 0
      && stock.report_.unparsable * 2 > stock.report_.lines)
    throw StockError(path + ": " + std::to_string(stock.report_.unparsable)
                     + " of " + std::to_string(stock.report_.lines)
                     + " lines are not valid SMILES");
  return stock;
}

Stock Stock::from_smiles(std::span<const std::string> smiles,
                         std::string label) {
  Stock stock;
  stock.source_ = std::move(label);
  stock.report_.lines = smiles.size();
  for (const std::string &s: smiles) {
    std::optional<CanonicalKey> k = try_canonicalize(s);
    if (!k) {
      ++stock.report_.unparsable;
      continue;
    }
    if (!stock.keys_.insert(std::move(*k)).second)
      ++stock.report_.duplicates;
  }
  return stock;
}

Stock Stock::from_keys(std::vector<CanonicalKey> keys, std::string label) {
  Stock stock;
  stock.source_ = std::move(label);
  stock.report_.lines = keys.size();
  for (CanonicalKey &k: keys) {
    if (!stock.keys_.insert(std::move(k)).second)
      ++stock.report_.duplicates;
  }
  return stock;
}

void write_stock_file(const std::string &path,
                      const std::vector<CanonicalKey> &keys) {
  std::vector<CanonicalKey> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::ofstream out(path);
  if (!out)
    throw StockError("cannot write stock file: " + path);
  for (const CanonicalKey &k: sorted)
    out << k.str() << '\n';
}

} // namespace retro
