//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_EVALHARNESS_H_
#define RETRO_EVALHARNESS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "retro/predictor.h"
#include "retro/retrostar.h"
#include "retro/routes.h"
#include "retro/stock.h"

namespace retro {

class HarnessError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultRecordRoutes = 50;

// One target's search outcome, stored as one JSON line.
struct BenchmarkRecord {
  std::string target;
  bool solved = false;
  int n_solved_routes = 0;
  int iterations = 0;
  int model_calls = 0;
  std::string termination;
  std::string error;
  double wall_time_s = 0.0;
  double search_time_s = 0.0;
  double extraction_time_s = 0.0;
  // Best routes first, capped when the record is made.
  std::vector<Route> routes;

  // The timing fields are the only ones that vary between identical runs;
  // pass false to leave them out.
  nlohmann::json to_json(bool with_timing = true) const;
  static BenchmarkRecord from_json(const nlohmann::json &doc);
};

BenchmarkRecord make_record(const SearchResult &result,
                            int max_routes = kDefaultRecordRoutes);

// Reads a results file. A final line without a newline is a partial write
// and is ignored; any other malformed line throws HarnessError.
std::vector<BenchmarkRecord> read_records(const std::string &path);

// One SMILES per line (first token; blank lines and '#' comments skipped),
// canonicalized and deduplicated in first-seen order. Throws HarnessError
// naming the line when a target does not parse.
std::vector<CanonicalKey> read_targets(const std::string &path);

struct BatchOptions {
  std::string results_path;
  int workers = 1;
  int max_routes = kDefaultRecordRoutes;
};

struct BatchSummary {
  int targets = 0;
  int skipped = 0;  // already present in the results file
  int computed = 0;
  int transport_errors = 0;
};

// Searches every target not yet in the results file and appends one
// record per target as it finishes. Each worker owns a predictor from
// `factory` and replaces it once it reports itself unhealthy.
BatchSummary run_batch(std::span<const CanonicalKey> targets,
                       const PredictorFactory &factory, const Stock &stock,
                       const SearchConfig &config,
                       const BatchOptions &options);

struct MetricsReport {
  int n_targets = 0;
  double success_rate = 0.0;
  double mean_solved_routes = 0.0;
  double mean_search_time_s = 0.0;
  double mean_tree_search_time_s = 0.0;
  double mean_extraction_time_s = 0.0;
  double mean_model_calls = 0.0;
  double mean_iterations = 0.0;

  nlohmann::json to_json() const;
  // Metric name -> value, in a fixed order.
  std::vector<std::pair<std::string, double>> values() const;
};

// Means run over every record, solved or not. Throws HarnessError when
// `records` is empty.
MetricsReport aggregate_metrics(std::span<const BenchmarkRecord> records);

struct SingleStepReport {
  std::map<int, double> accuracy; // percent per n
  int evaluated = 0;
  int skipped = 0;
};

// Percentage of test reactions whose reactant multiset appears among the
// top-n predictions for their product. Rows that do not parse are skipped
// and counted.
SingleStepReport single_step_top_n(Predictor &predictor,
                                   std::span<const ReactionRow> rows,
                                   std::span<const int> ns);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0; // population standard deviation
};

struct SubsampleReport {
  int size = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, MetricSummary>> metrics;

  nlohmann::json to_json() const;
};

// Draws `size` records without replacement `repetitions` times and
// summarizes every metric of aggregate_metrics over the repetitions.
SubsampleReport subsample_stats(std::span<const BenchmarkRecord> records,
                                int size, int repetitions,
                                std::uint64_t seed);

// Mean and population standard deviation, shifted by the first value so a
// constant series has a standard deviation of exactly 0.
MetricSummary summarize(std::span<const double> values);

struct PriorRank {
  double prior = 0.0;
  int rank = 0;

  friend bool operator==(const PriorRank &, const PriorRank &) = default;
};

struct PriorRankReport {
  std::vector<PriorRank> pairs;
  int skipped = 0; // reactions without prior or rank
};

// Every reaction's (prior, rank) in the top `top_n_routes` routes of each
// record, optionally subsampled to `sample` pairs (order preserved).
PriorRankReport extract_prior_rank(std::span<const BenchmarkRecord> records,
                                   int top_n_routes = 10,
                                   std::optional<int> sample = std::nullopt,
                                   std::uint64_t seed = 0);

} // namespace retro

#endif // RETRO_EVALHARNESS_H_
