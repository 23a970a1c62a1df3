//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retro/evalharness.h"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "retro/sampling.h"

namespace retro {
namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw HarnessError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// Drops a trailing partial line so appends start on a fresh line.
void truncate_partial_line(const std::string &path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    return;
  const std::string data = read_file(path);
  if (data.empty() || data.back() == '\n')
    return;
  const std::size_t keep = data.rfind('\n') == std::string::npos
                               ? 0
                               : data.rfind('\n') + 1;
  std::filesystem::resize_file(path, keep, ec);
  if (ec)
    throw HarnessError("cannot truncate " + path + ": " + ec.message());
}

std::vector<CanonicalKey> split_reactants(const std::vector<std::string> &raw) {
  std::vector<CanonicalKey> keys;
  for (const std::string &r: raw) {
    std::size_t start = 0;
    while (start <= r.size()) {
      std::size_t dot = r.find('.', start);
      if (dot == std::string::npos)
        dot = r.size();
      keys.push_back(canonicalize(std::string_view(r).substr(start, dot - start)));
      start = dot + 1;
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

template <typename Field>
double mean_of(std::span<const BenchmarkRecord> records, Field field) {
  double total = 0.0;
  for (const BenchmarkRecord &r: records)
    total += field(r);
  return total / static_cast<double>(records.size());
}

} // namespace

nlohmann::json BenchmarkRecord::to_json(bool with_timing) const {
  nlohmann::json doc = { { "target", target },
                         { "solved", solved },
                         { "n_solved_routes", n_solved_routes },
                         { "iterations", iterations },
                         { "model_calls", model_calls },
                         { "termination", termination } };
  if (!error.empty())
    doc["error"] = error;
  if (with_timing) {
    doc["wall_time_s"] = wall_time_s;
    doc["search_time_s"] = search_time_s;
    doc["extraction_time_s"] = extraction_time_s;
  }
  nlohmann::json routes_doc = nlohmann::json::array();
  for (const Route &r: routes)
    routes_doc.push_back(route_to_json(r));
  doc["routes"] = std::move(routes_doc);
  return doc;
}

BenchmarkRecord BenchmarkRecord::from_json(const nlohmann::json &doc) {
  BenchmarkRecord r;
  try {
    r.target = doc.at("target").get<std::string>();
    r.solved = doc.at("solved").get<bool>();
    r.n_solved_routes = doc.at("n_solved_routes").get<int>();
    r.iterations = doc.at("iterations").get<int>();
    r.model_calls = doc.at("model_calls").get<int>();
    r.termination = doc.at("termination").get<std::string>();
    r.error = doc.value("error", std::string());
    r.wall_time_s = doc.value("wall_time_s", 0.0);
    r.search_time_s = doc.value("search_time_s", 0.0);
    r.extraction_time_s = doc.value("extraction_time_s", 0.0);
    if (doc.contains("routes")) {
      for (const nlohmann::json &route: doc.at("routes"))
        r.routes.push_back(parse_route(route));
    }
  } catch (const nlohmann::json::exception &e) {
    throw HarnessError(std::string("malformed record: ") + e.what());
  }
  if (r.solved != (r.n_solved_routes >= 1))
    throw HarnessError("record for " + r.target
                       + " has inconsistent solved flag");
  return r;
}

BenchmarkRecord make_record(const SearchResult &result, int max_routes) {
  BenchmarkRecord r;
  r.target = result.target.str();
  r.solved = result.solved;
  r.n_solved_routes = static_cast<int>(result.routes.size());
  r.iterations = result.iterations;
  r.model_calls = result.model_calls;
  r.termination = std::string(to_string(result.termination));
  r.error = result.error;
  r.wall_time_s = result.wall_time_s;
  r.search_time_s = result.search_time_s;
  r.extraction_time_s = result.extraction_time_s;
  const std::size_t n =
      std::min(result.routes.size(), static_cast<std::size_t>(
                                         std::max(0, max_routes)));
  for (std::size_t i = 0; i < n; ++i)
    r.routes.push_back(result.routes[i].route);
  return r;
}

std::vector<BenchmarkRecord> read_records(const std::string &path) {
  const std::string data = read_file(path);
  std::vector<BenchmarkRecord> records;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < data.size()) {
    const std::size_t nl = data.find('\n', start);
    ++line_no;
    if (nl == std::string::npos)
      break; // partial trailing write
    const std::string line = data.substr(start, nl - start);
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      records.push_back(BenchmarkRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception &e) {
      throw HarnessError(path + ":" + std::to_string(line_no) + ": "
                         + e.what());
    }
  }
  return records;
}

std::vector<CanonicalKey> read_targets(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw HarnessError("cannot open targets file: " + path);
  std::vector<CanonicalKey> targets;
  std::unordered_set<CanonicalKey> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string smiles;
    if (!(fields >> smiles) || smiles[0] == '#')
      continue;
    std::optional<CanonicalKey> key = try_canonicalize(smiles);
    if (!key)
      throw HarnessError(path + ":" + std::to_string(line_no)
                         + ": target does not parse: " + smiles);
    if (seen.insert(*key).second)
      targets.push_back(std::move(*key));
  }
  return targets;
}

BatchSummary run_batch(std::span<const CanonicalKey> targets,
                       const PredictorFactory &factory, const Stock &stock,
                       const SearchConfig &config,
                       const BatchOptions &options) {
  config.validate();
  if (options.workers < 1)
    throw HarnessError("workers must be >= 1");
  if (options.results_path.empty())
    throw HarnessError("a results path is required");

  BatchSummary summary;
  summary.targets = static_cast<int>(targets.size());

  std::unordered_set<std::string> done;
  std::error_code ec;
  if (std::filesystem::exists(options.results_path, ec)) {
    truncate_partial_line(options.results_path);
    for (const BenchmarkRecord &r: read_records(options.results_path))
      done.insert(r.target);
  }
  std::vector<const CanonicalKey *> pending;
  for (const CanonicalKey &t: targets) {
    if (done.count(t.str()) != 0)
      ++summary.skipped;
    else
      pending.push_back(&t);
  }

  std::ofstream out(options.results_path, std::ios::app);
  if (!out)
    throw HarnessError("cannot open results file: " + options.results_path);

  std::mutex sink;
  std::atomic<std::size_t> next { 0 };
  std::atomic<int> computed { 0 };
  std::atomic<int> transport_errors { 0 };

  auto worker = [&] {
    std::unique_ptr<Predictor> predictor;
    std::string spawn_error;
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size())
        return;
      const CanonicalKey &target = *pending[i];
      SearchResult result;
      result.target = target;
      try {
        if (!predictor || !predictor->healthy())
          predictor = factory();
        result = search(target, *predictor, stock, config);
      } catch (const std::exception &e) {
        // A predictor that cannot be created or fails outside the search
        // loop still yields a record.
        predictor.reset();
        result = SearchResult {};
        result.target = target;
        result.termination = Termination::kTransportError;
        result.error = e.what();
      }
      if (result.termination == Termination::kTransportError)
        ++transport_errors;
      const std::string line = make_record(result, options.max_routes)
                                   .to_json()
                                   .dump();
      std::lock_guard<std::mutex> lock(sink);
      out << line << '\n';
      out.flush();
      ++computed;
    }
  };

  const int n_threads = std::min<int>(options.workers,
                                      std::max<std::size_t>(1, pending.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (std::thread &th: pool)
    th.join();
  if (!out)
    throw HarnessError("error writing " + options.results_path);

  summary.computed = computed.load();
  summary.transport_errors = transport_errors.load();
  return summary;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json doc = { { "n_targets", n_targets } };
  for (const auto &[name, value]: values())
    doc[name] = value;
  return doc;
}

std::vector<std::pair<std::string, double>> MetricsReport::values() const {
  return { { "success_rate", success_rate },
           { "mean_solved_routes", mean_solved_routes },
           { "mean_search_time_s", mean_search_time_s },
           { "mean_tree_search_time_s", mean_tree_search_time_s },
           { "mean_extraction_time_s", mean_extraction_time_s },
           { "mean_model_calls", mean_model_calls },
           { "mean_iterations", mean_iterations } };
}

MetricsReport aggregate_metrics(std::span<const BenchmarkRecord> records) {
  if (records.empty())
    throw HarnessError("cannot aggregate an empty record set");
  MetricsReport m;
  m.n_targets = static_cast<int>(records.size());
  m.success_rate =
      100.0 * mean_of(records, [](const auto &r) { return r.solved ? 1.0 : 0.0; });
  m.mean_solved_routes =
      mean_of(records, [](const auto &r) { return double(r.n_solved_routes); });
  m.mean_search_time_s =
      mean_of(records, [](const auto &r) { return r.wall_time_s; });
  m.mean_tree_search_time_s =
      mean_of(records, [](const auto &r) { return r.search_time_s; });
  m.mean_extraction_time_s =
      mean_of(records, [](const auto &r) { return r.extraction_time_s; });
  m.mean_model_calls =
      mean_of(records, [](const auto &r) { return double(r.model_calls); });
  m.mean_iterations =
      mean_of(records, [](const auto &r) { return double(r.iterations); });
  return m;
}

SingleStepReport single_step_top_n(Predictor &predictor,
                                   std::span<const ReactionRow> rows,
                                   std::span<const int> ns) {
  SingleStepReport report;
  int max_n = 1;
  for (int n: ns) {
    if (n < 1)
      throw HarnessError("top-n values must be >= 1");
    max_n = std::max(max_n, n);
    report.accuracy[n] = 0.0;
  }
  std::map<int, int> hits;
  std::unordered_map<CanonicalKey, std::vector<Prediction>> cache;
  for (const ReactionRow &row: rows) {
    CanonicalKey product;
    std::vector<CanonicalKey> gold;
    try {
      product = canonicalize(row.product);
      gold = split_reactants(row.reactants);
    } catch (const ParseError &) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    auto it = cache.find(product);
    if (it == cache.end())
      it = cache.emplace(product, predictor.predict(product, max_n)).first;
    const std::vector<Prediction> &preds = it->second;
    for (const Prediction &p: preds) {
      if (p.reactants != gold)
        continue;
      for (int n: ns) {
        if (p.rank <= n)
          ++hits[n];
      }
      break;
    }
  }
  if (report.evaluated > 0) {
    for (int n: ns)
      report.accuracy[n] = 100.0 * hits[n] / report.evaluated;
  }
  return report;
}

nlohmann::json SubsampleReport::to_json() const {
  nlohmann::json metrics_doc = nlohmann::json::object();
  for (const auto &[name, s]: metrics)
    metrics_doc[name] = { { "mean", s.mean }, { "std", s.std } };
  return { { "size", size },
           { "repetitions", repetitions },
           { "seed", seed },
           { "metrics", std::move(metrics_doc) } };
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty())
    return s;
  const double x0 = values[0];
  const double n = static_cast<double>(values.size());
  double shift = 0.0;
  for (double v: values)
    shift += v - x0;
  const double mean_shift = shift / n;
  double ss = 0.0;
  for (double v: values) {
    const double d = (v - x0) - mean_shift;
    ss += d * d;
  }
  s.mean = x0 + mean_shift;
  s.std = std::sqrt(ss / n);
  return s;
}

SubsampleReport subsample_stats(std::span<const BenchmarkRecord> records,
                                int size, int repetitions,
                                std::uint64_t seed) {
  if (size < 1 || static_cast<std::size_t>(size) > records.size())
    throw HarnessError("subsample size must lie in [1, "
                       + std::to_string(records.size()) + "]");
  if (repetitions < 1)
    throw HarnessError("repetitions must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  std::vector<BenchmarkRecord> subset;
  for (int rep = 0; rep < repetitions; ++rep) {
    std::vector<std::size_t> idx =
        sample_without_replacement(rng, records.size(), size);
    std::sort(idx.begin(), idx.end());
    subset.clear();
    for (std::size_t i: idx)
      subset.push_back(records[i]);
    const auto values = aggregate_metrics(subset).values();
    if (columns.empty()) {
      columns.resize(values.size());
      for (const auto &v: values)
        names.push_back(v.first);
    }
    for (std::size_t m = 0; m < values.size(); ++m)
      columns[m].push_back(values[m].second);
  }
  SubsampleReport report;
  report.size = size;
  report.repetitions = repetitions;
  report.seed = seed;
  for (std::size_t m = 0; m < names.size(); ++m)
    report.metrics.emplace_back(names[m], summarize(columns[m]));
  return report;
}

PriorRankReport extract_prior_rank(std::span<const BenchmarkRecord> records,
                                   int top_n_routes, std::optional<int> sample,
                                   std::uint64_t seed) {
  PriorRankReport report;
  std::function<void(const RouteMol &)> walk = [&](const RouteMol &mol) {
    if (!mol.reaction)
      return;
    if (mol.reaction->prior && mol.reaction->rank)
      report.pairs.push_back({ *mol.reaction->prior, *mol.reaction->rank });
    else
      ++report.skipped;
    for (const RouteMol &c: mol.reaction->children)
      walk(c);
  };
  for (const BenchmarkRecord &r: records) {
    const std::size_t n = std::min(
        r.routes.size(), static_cast<std::size_t>(std::max(0, top_n_routes)));
    for (std::size_t i = 0; i < n; ++i)
      walk(r.routes[i].root);
  }
  if (sample && static_cast<std::size_t>(std::max(0, *sample))
                    < report.pairs.size()) {
    Rng rng(seed);
    std::vector<std::size_t> idx = sample_without_replacement(
        rng, report.pairs.size(), static_cast<std::size_t>(std::max(0, *sample)));
    std::sort(idx.begin(), idx.end());
    std::vector<PriorRank> picked;
    for (std::size_t i: idx)
      picked.push_back(report.pairs[i]);
    report.pairs = std::move(picked);
  }
  return report;
}

} // namespace retro
