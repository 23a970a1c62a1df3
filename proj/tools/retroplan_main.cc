//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

// Command line entry point. Exit codes: 0 on success (an unsolved target
// is a success), 1 on domain errors, 2 on usage errors.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retro/evalharness.h"
#include "retro/fingerprint.h"
#include "retro/predictor.h"
#include "retro/retrostar.h"
#include "retro/routes.h"
#include "retro/stock.h"

namespace {

using nlohmann::json;
using namespace retro;

class UsageError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SearchFlags {
  std::string config_path;
  std::optional<int> iterations;
  std::optional<double> time_limit;
  std::optional<int> top_k;
  std::optional<int> max_depth;
  std::optional<int> route_cap;
  bool paroutes = false;
  bool leaf_set_dedupe = false;
};

struct PredictorFlags {
  std::string uri;
  std::string reactions;
  double timeout_s = kDefaultPredictorTimeoutS;
};

void add_search_flags(CLI::App *cmd, SearchFlags &f) {
  cmd->add_option("--config", f.config_path,
                  "JSON search config; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--iterations", f.iterations,
                  "Iteration limit (default 200)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--time-limit", f.time_limit,
                  "Time limit in seconds (default 28800)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--top-k", f.top_k,
                  "Reactions requested per expansion (default 50)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", f.max_depth,
                  "Maximum route length in reactions (default 7)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--route-cap", f.route_cap,
                  "Maximum number of routes extracted (default 5000)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--paroutes", f.paroutes,
                "Benchmark mode: maximum depth 10 unless --max-depth is given");
  cmd->add_flag("--leaf-set-dedupe", f.leaf_set_dedupe,
                "Count routes sharing a leaf set once");
}

void add_predictor_flags(CLI::App *cmd, PredictorFlags &f) {
  cmd->add_option("--predictor", f.uri,
                  "Single-step model: table:<file> or cmd:<command>");
  cmd->add_option("--reactions", f.reactions,
                  "Reaction file; shorthand for --predictor table:<file>")
      ->check(CLI::ExistingFile);
  cmd->add_option("--predictor-timeout", f.timeout_s,
                  "Per-call timeout for external predictors in seconds")
      ->check(CLI::PositiveNumber);
}

SearchConfig effective_config(const SearchFlags &f) {
  SearchConfig config;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception &e) {
      throw ConfigError(f.config_path + ": " + e.what());
    }
    config = SearchConfig::from_json(doc);
  }
  if (f.paroutes)
    config.max_depth = SearchConfig::kParoutesMaxDepth;
  if (f.iterations)
    config.iteration_limit = *f.iterations;
  if (f.time_limit)
    config.time_limit_s = *f.time_limit;
  if (f.top_k)
    config.top_k = *f.top_k;
  if (f.max_depth)
    config.max_depth = *f.max_depth;
  if (f.route_cap)
    config.route_cap = *f.route_cap;
  if (f.leaf_set_dedupe)
    config.dedupe_by_leaf_set = true;
  config.validate();
  return config;
}

std::string predictor_uri(const PredictorFlags &f) {
  if (!f.uri.empty() && !f.reactions.empty())
    throw UsageError("give either --predictor or --reactions, not both");
  if (!f.reactions.empty())
    return "table:" + f.reactions;
  if (f.uri.empty())
    throw UsageError("a predictor is required (--predictor or --reactions)");
  if (f.uri.rfind("table:", 0) != 0 && f.uri.rfind("cmd:", 0) != 0)
    throw UsageError("--predictor expects table:<file> or cmd:<command>");
  return f.uri;
}

std::vector<int> parse_top_n(const std::string &text) {
  std::vector<int> ns;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(item, &used);
      if (used != item.size() || n < 1)
        throw std::invalid_argument(item);
      ns.push_back(n);
    } catch (const std::exception &) {
      throw UsageError("--top-n expects positive integers, got '" + text
                       + "'");
    }
  }
  if (ns.empty())
    throw UsageError("--top-n is empty");
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  return ns;
}

json per_n(const std::map<int, double> &values) {
  json doc = json::object();
  for (const auto &[n, v]: values)
    doc[std::to_string(n)] = v;
  return doc;
}

void emit(const json &doc, const std::string &out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(out_path);
  if (!out)
    throw std::runtime_error("cannot write " + out_path);
  out << text;
}

Stock load_stock_or_empty(const std::string &path) {
  if (path.empty())
    return Stock();
  Stock stock = Stock::load(path);
  const StockLoadReport &r = stock.report();
  std::cerr << "stock: " << stock.size() << " molecules from " << path
            << " (" << r.unparsable << " unparsable, " << r.duplicates
            << " duplicate lines)\n";
  return stock;
}

json scored_route_json(const ScoredRoute &r) {
  return { { "cost", r.cost },
           { "reactions", r.reactions },
           { "hash", r.hash },
           { "route", route_to_json(r.route) } };
}

json route_stats_json(std::span<const BenchmarkRecord> records,
                      int top_routes) {
  std::map<int, int> depth, blocks, reactants;
  int n_routes = 0;
  for (const BenchmarkRecord &r: records) {
    const std::size_t n = std::min<std::size_t>(r.routes.size(), top_routes);
    for (std::size_t i = 0; i < n; ++i) {
      const RouteStats s = route_stats(r.routes[i]);
      ++depth[s.max_depth];
      ++blocks[s.n_building_blocks];
      for (int k: s.reactants_per_reaction)
        ++reactants[k];
      ++n_routes;
    }
  }
  auto hist = [](const std::map<int, int> &h) {
    json doc = json::object();
    for (const auto &[k, v]: h)
      doc[std::to_string(k)] = v;
    return doc;
  };
  return { { "n_routes", n_routes },
           { "max_depth", hist(depth) },
           { "n_building_blocks", hist(blocks) },
           { "reactants_per_reaction", hist(reactants) } };
}

// "label=path" or a bare path labelled by its file stem.
std::pair<std::string, std::string> labelled_path(const std::string &spec) {
  const std::size_t eq = spec.find('=');
  if (eq != std::string::npos && eq > 0)
    return { spec.substr(0, eq), spec.substr(eq + 1) };
  return { std::filesystem::path(spec).stem().string(), spec };
}

int run(int argc, char **argv) {
  CLI::App app { "Retrosynthesis planning and route benchmarking" };
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // plan
  SearchFlags plan_search;
  PredictorFlags plan_pred;
  std::string plan_target, plan_stock, plan_out;
  bool plan_deterministic = false;
  CLI::App *plan = app.add_subcommand("plan", "Search routes for one target");
  plan->add_option("--target", plan_target, "Target SMILES")->required();
  plan->add_option("--stock", plan_stock, "Building-block file (.gz allowed)")
      ->check(CLI::ExistingFile);
  plan->add_option("--out", plan_out, "Output path (default: stdout)");
  plan->add_flag("--deterministic", plan_deterministic,
                 "Leave timing fields out of the report");
  add_search_flags(plan, plan_search);
  add_predictor_flags(plan, plan_pred);

  // batch
  SearchFlags batch_search;
  PredictorFlags batch_pred;
  std::string batch_targets, batch_stock, batch_out;
  int batch_workers = 1;
  int batch_record_routes = kDefaultRecordRoutes;
  CLI::App *batch =
      app.add_subcommand("batch", "Search every target of a file");
  batch->add_option("--targets", batch_targets, "One SMILES per line")
      ->required()
      ->check(CLI::ExistingFile);
  batch->add_option("--stock", batch_stock, "Building-block file")
      ->check(CLI::ExistingFile);
  batch->add_option("--out", batch_out,
                    "Results file (JSON lines, appended and resumable)")
      ->required();
  batch->add_option("--workers", batch_workers, "Concurrent searches")
      ->check(CLI::PositiveNumber);
  batch->add_option("--record-routes", batch_record_routes,
                    "Routes stored per record")
      ->check(CLI::NonNegativeNumber);
  add_search_flags(batch, batch_search);
  add_predictor_flags(batch, batch_pred);

  // eval-routes
  std::string er_results, er_gold, er_out, er_top_n = "1,3,5,10,50";
  CLI::App *eval_routes = app.add_subcommand(
      "eval-routes", "Route and building-block accuracy against gold routes");
  eval_routes->add_option("--results", er_results, "Results file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_routes->add_option("--gold", er_gold, "Gold route file (JSON array)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_routes->add_option("--top-n", er_top_n, "Comma-separated n values");
  eval_routes->add_option("--out", er_out, "Output path (default: stdout)");

  // eval-single-step
  PredictorFlags ss_pred;
  std::string ss_test, ss_out, ss_top_n = "1,3,5,10,50";
  CLI::App *eval_ss = app.add_subcommand(
      "eval-single-step", "Top-n accuracy of a single-step model");
  eval_ss->add_option("--test", ss_test, "Test reactions (reaction file)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_ss->add_option("--top-n", ss_top_n, "Comma-separated n values");
  eval_ss->add_option("--out", ss_out, "Output path (default: stdout)");
  add_predictor_flags(eval_ss, ss_pred);

  // cluster-routes
  std::vector<std::string> cr_results;
  std::string cr_out;
  double cr_cutoff = 0.5;
  int cr_top_routes = 10;
  CLI::App *cluster_routes_cmd = app.add_subcommand(
      "cluster-routes", "Per-target route clustering and model overlap");
  cluster_routes_cmd
      ->add_option("--results", cr_results,
                   "Results files as label=path (repeatable)")
      ->required();
  cluster_routes_cmd->add_option("--cutoff", cr_cutoff,
                                 "Normalized TED cutoff")
      ->check(CLI::Range(0.0, 1.0));
  cluster_routes_cmd->add_option("--top-routes", cr_top_routes,
                                 "Routes taken per record")
      ->check(CLI::PositiveNumber);
  cluster_routes_cmd->add_option("--out", cr_out,
                                 "Output path (default: stdout)");

  // cluster-mols
  std::string cm_input, cm_out;
  double cm_cutoff = 0.6;
  int cm_radius = 2, cm_nbits = 1024, cm_workers = 0;
  CLI::App *cluster_mols = app.add_subcommand(
      "cluster-mols", "Butina clustering of molecules on 1 - Tanimoto");
  cluster_mols->add_option("--targets", cm_input, "One SMILES per line")
      ->required()
      ->check(CLI::ExistingFile);
  cluster_mols->add_option("--cutoff", cm_cutoff, "Distance cutoff")
      ->check(CLI::Range(0.0, 1.0));
  cluster_mols->add_option("--radius", cm_radius, "Fingerprint radius")
      ->check(CLI::NonNegativeNumber);
  cluster_mols->add_option("--nbits", cm_nbits, "Fingerprint width");
  cluster_mols->add_option("--workers", cm_workers,
                           "Threads for the distance pass (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  cluster_mols->add_option("--out", cm_out, "Output path (default: stdout)");

  // stats
  std::string st_results, st_out;
  int st_top_routes = 10;
  std::optional<int> st_sample;
  std::uint64_t st_seed = 0;
  CLI::App *stats = app.add_subcommand(
      "stats", "Metrics, route statistics and prior/rank pairs");
  stats->add_option("--results", st_results, "Results file")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--top-routes", st_top_routes,
                    "Routes per record used for statistics")
      ->check(CLI::PositiveNumber);
  stats->add_option("--sample", st_sample,
                    "Subsample the prior/rank pairs to this many")
      ->check(CLI::NonNegativeNumber);
  stats->add_option("--seed", st_seed, "Sampling seed");
  stats->add_option("--out", st_out, "Output path (default: stdout)");

  // subsample
  std::string sub_results, sub_out;
  int sub_size = 0, sub_reps = 1000;
  std::uint64_t sub_seed = 0;
  CLI::App *subsample = app.add_subcommand(
      "subsample", "Mean and std of metrics over random subsets");
  subsample->add_option("--results", sub_results, "Results file")
      ->required()
      ->check(CLI::ExistingFile);
  subsample->add_option("--size", sub_size, "Subset size")
      ->required()
      ->check(CLI::PositiveNumber);
  subsample->add_option("--repetitions", sub_reps, "Number of subsets")
      ->check(CLI::PositiveNumber);
  subsample->add_option("--seed", sub_seed, "Sampling seed");
  subsample->add_option("--out", sub_out, "Output path (default: stdout)");

  // export-stock
  std::string ex_gold, ex_out;
  CLI::App *export_stock = app.add_subcommand(
      "export-stock", "Write the leaf molecules of gold routes as a stock");
  export_stock->add_option("--gold", ex_gold, "Gold route file")
      ->required()
      ->check(CLI::ExistingFile);
  export_stock->add_option("--out", ex_out, "Stock file to write")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  if (plan->parsed()) {
    const SearchConfig config = effective_config(plan_search);
    const std::string uri = predictor_uri(plan_pred);
    const Stock stock = load_stock_or_empty(plan_stock);
    std::unique_ptr<Predictor> predictor =
        make_predictor_factory(uri, plan_pred.timeout_s)();
    const SearchResult result = search(plan_target, *predictor, stock, config);
    json routes = json::array();
    for (const ScoredRoute &r: result.routes)
      routes.push_back(scored_route_json(r));
    json doc = { { "config", config.to_json() },
                 { "predictor", uri },
                 { "target", result.target.str() },
                 { "solved", result.solved },
                 { "n_solved_routes", result.routes.size() },
                 { "iterations", result.iterations },
                 { "model_calls", result.model_calls },
                 { "termination", to_string(result.termination) },
                 { "routes", std::move(routes) } };
    if (!result.error.empty())
      doc["error"] = result.error;
    if (!plan_deterministic) {
      doc["wall_time_s"] = result.wall_time_s;
      doc["search_time_s"] = result.search_time_s;
      doc["extraction_time_s"] = result.extraction_time_s;
    }
    emit(doc, plan_out);
    return 0;
  }

  if (batch->parsed()) {
    const SearchConfig config = effective_config(batch_search);
    const std::string uri = predictor_uri(batch_pred);
    const std::vector<CanonicalKey> targets = read_targets(batch_targets);
    const Stock stock = load_stock_or_empty(batch_stock);
    PredictorFactory factory =
        make_predictor_factory(uri, batch_pred.timeout_s);
    BatchOptions options;
    options.results_path = batch_out;
    options.workers = batch_workers;
    options.max_routes = batch_record_routes;
    const BatchSummary s = run_batch(targets, factory, stock, config, options);
    json doc = { { "config", config.to_json() },
                 { "predictor", uri },
                 { "workers", batch_workers },
                 { "results", batch_out },
                 { "targets", s.targets },
                 { "skipped_existing", s.skipped },
                 { "computed", s.computed },
                 { "transport_errors", s.transport_errors } };
    emit(doc, "");
    return 0;
  }

  if (eval_routes->parsed()) {
    const std::vector<int> ns = parse_top_n(er_top_n);
    const std::vector<BenchmarkRecord> records = read_records(er_results);
    const std::vector<Route> gold = parse_route_file(er_gold);
    RouteRanking ranking;
    for (const BenchmarkRecord &r: records)
      ranking[CanonicalKey(r.target)] = r.routes;
    const auto route_acc = route_accuracy(ranking, gold, ns);
    const auto bb_acc = building_block_accuracy(ranking, gold, ns);
    for (int n: ns) {
      if (bb_acc.at(n) < route_acc.at(n))
        throw std::logic_error("building-block accuracy fell below route "
                               "accuracy at n="
                               + std::to_string(n));
    }
    json doc = { { "config",
                   { { "results", er_results },
                     { "gold", er_gold },
                     { "top_n", ns } } },
                 { "n_gold", gold.size() },
                 { "route_accuracy", per_n(route_acc) },
                 { "building_block_accuracy", per_n(bb_acc) } };
    if (!records.empty())
      doc["metrics"] = aggregate_metrics(records).to_json();
    emit(doc, er_out);
    return 0;
  }

  if (eval_ss->parsed()) {
    const std::vector<int> ns = parse_top_n(ss_top_n);
    const std::string uri = predictor_uri(ss_pred);
    std::ifstream in(ss_test);
    const std::vector<ReactionRow> rows = read_reaction_rows(in, ss_test);
    std::unique_ptr<Predictor> predictor =
        make_predictor_factory(uri, ss_pred.timeout_s)();
    const SingleStepReport report = single_step_top_n(*predictor, rows, ns);
    json doc = { { "config",
                   { { "predictor", uri }, { "test", ss_test }, { "top_n", ns } } },
                 { "evaluated", report.evaluated },
                 { "skipped", report.skipped },
                 { "top_n_accuracy", per_n(report.accuracy) } };
    emit(doc, ss_out);
    return 0;
  }

  if (cluster_routes_cmd->parsed()) {
    std::map<std::string, std::vector<LabeledRoute>> by_target;
    json inputs = json::object();
    for (const std::string &spec: cr_results) {
      const auto [label, path] = labelled_path(spec);
      if (!std::filesystem::exists(path))
        throw UsageError("--results: file not found: " + path);
      inputs[label] = path;
      for (const BenchmarkRecord &r: read_records(path)) {
        const std::size_t n =
            std::min<std::size_t>(r.routes.size(), cr_top_routes);
        for (std::size_t i = 0; i < n; ++i)
          by_target[r.target].push_back({ r.routes[i], label });
      }
    }
    std::vector<RouteClustering> all;
    json targets = json::array();
    for (const auto &[target, routes]: by_target) {
      RouteClustering rc = cluster_routes(routes, cr_cutoff);
      json clusters = json::array();
      for (std::size_t c = 0; c < rc.clustering.clusters.size(); ++c) {
        const Cluster &cl = rc.clustering.clusters[c];
        clusters.push_back({ { "centroid", cl.centroid },
                             { "members", cl.members },
                             { "labels", rc.labels[c] } });
      }
      json members = json::array();
      for (const LabeledRoute &lr: routes)
        members.push_back(
            { { "label", lr.label }, { "hash", route_hash(lr.route) } });
      targets.push_back({ { "target", target },
                          { "routes", std::move(members) },
                          { "clusters", std::move(clusters) } });
      all.push_back(std::move(rc));
    }
    std::vector<std::string> labels;
    for (const auto &[label, path]: inputs.items())
      labels.push_back(label);
    json doc = { { "config",
                   { { "results", inputs },
                     { "cutoff", cr_cutoff },
                     { "top_routes", cr_top_routes } } },
                 { "targets", std::move(targets) },
                 { "overlap", cluster_overlap_counts(all, labels) } };
    emit(doc, cr_out);
    return 0;
  }

  if (cluster_mols->parsed()) {
    if (cm_nbits < 64 || (cm_nbits & (cm_nbits - 1)) != 0)
      throw UsageError("--nbits must be a power of two >= 64");
    std::ifstream in(cm_input);
    std::vector<Fingerprint> fps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string smiles;
      if (!(fields >> smiles) || smiles[0] == '#')
        continue;
      try {
        fps.push_back(morgan_fingerprint(parse_smiles(smiles), cm_radius,
                                         cm_nbits));
      } catch (const ParseError &e) {
        throw std::runtime_error(cm_input + ":" + std::to_string(line_no)
                                 + ": " + e.what());
      }
    }
    const Clustering c =
        butina_cluster(tanimoto_neighbors(fps, cm_cutoff, cm_workers));
    json clusters = json::array();
    for (const Cluster &cl: c.clusters)
      clusters.push_back(
          { { "centroid", cl.centroid }, { "members", cl.members } });
    json doc = { { "config",
                   { { "input", cm_input },
                     { "cutoff", cm_cutoff },
                     { "radius", cm_radius },
                     { "nbits", cm_nbits } } },
                 { "n_molecules", fps.size() },
                 { "clusters", std::move(clusters) } };
    emit(doc, cm_out);
    return 0;
  }

  if (stats->parsed()) {
    const std::vector<BenchmarkRecord> records = read_records(st_results);
    if (records.empty())
      throw HarnessError(st_results + " holds no records");
    const PriorRankReport pr =
        extract_prior_rank(records, st_top_routes, st_sample, st_seed);
    json pairs = json::array();
    for (const PriorRank &p: pr.pairs)
      pairs.push_back({ p.prior, p.rank });
    json config = { { "results", st_results },
                    { "top_routes", st_top_routes },
                    { "seed", st_seed } };
    if (st_sample)
      config["sample"] = *st_sample;
    json doc = { { "config", std::move(config) },
                 { "metrics", aggregate_metrics(records).to_json() },
                 { "route_stats", route_stats_json(records, st_top_routes) },
                 { "prior_rank", { { "pairs", std::move(pairs) },
                                   { "skipped", pr.skipped } } } };
    emit(doc, st_out);
    return 0;
  }

  if (subsample->parsed()) {
    const std::vector<BenchmarkRecord> records = read_records(sub_results);
    const SubsampleReport report =
        subsample_stats(records, sub_size, sub_reps, sub_seed);
    json doc = report.to_json();
    doc["config"] = { { "results", sub_results },
                      { "size", sub_size },
                      { "repetitions", sub_reps },
                      { "seed", sub_seed } };
    emit(doc, sub_out);
    return 0;
  }

  if (export_stock->parsed()) {
    const std::vector<Route> gold = parse_route_file(ex_gold);
    std::vector<CanonicalKey> leaves;
    for (const Route &r: gold) {
      for (const CanonicalKey &k: leaf_set(r))
        leaves.push_back(k);
    }
    write_stock_file(ex_out, leaves);
    std::sort(leaves.begin(), leaves.end());
    leaves.erase(std::unique(leaves.begin(), leaves.end()), leaves.end());
    json doc = { { "config", { { "gold", ex_gold }, { "out", ex_out } } },
                 { "n_routes", gold.size() },
                 { "n_building_blocks", leaves.size() } };
    emit(doc, "");
    return 0;
  }
  return 2;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
