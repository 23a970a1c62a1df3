//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <chrono>
#include <cmath>

#include "retro/retrostar.h"

namespace retro {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename T>
T get_typed(const nlohmann::json &value, const std::string &key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError("config key \"" + key + "\" has the wrong type");
  }
}

int get_int(const nlohmann::json &value, const std::string &key) {
  if (!value.is_number_integer())
    throw ConfigError("config key \"" + key + "\" must be an integer");
  const long long v = value.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("config key \"" + key + "\" is out of range");
  return static_cast<int>(v);
}

double get_number(const nlohmann::json &value, const std::string &key) {
  if (!value.is_number())
    throw ConfigError("config key \"" + key + "\" must be a number");
  return value.get<double>();
}

} // namespace

void SearchConfig::validate() const {
  if (iteration_limit < 1)
    throw ConfigError("iteration_limit must be >= 1");
  if (!(time_limit_s > 0.0))
    throw ConfigError("time_limit_s must be > 0");
  if (top_k < 1)
    throw ConfigError("top_k must be >= 1");
  if (max_depth < 1)
    throw ConfigError("max_depth must be >= 1");
  if (route_cap < 1)
    throw ConfigError("route_cap must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("epsilon must lie in (0, 1)");
}

SearchConfig SearchConfig::from_json(const nlohmann::json &doc) {
  if (!doc.is_object())
    throw ConfigError("search config must be a JSON object");
  SearchConfig config;
  for (const auto &[key, value]: doc.items()) {
    if (key == "iteration_limit")
      config.iteration_limit = get_int(value, key);
    else if (key == "time_limit_s")
      config.time_limit_s = get_number(value, key);
    else if (key == "top_k")
      config.top_k = get_int(value, key);
    else if (key == "max_depth")
      config.max_depth = get_int(value, key);
    else if (key == "epsilon")
      config.epsilon = get_number(value, key);
    else if (key == "route_cap")
      config.route_cap = get_int(value, key);
    else if (key == "dedupe_by_leaf_set") {
      if (!value.is_boolean())
        throw ConfigError("config key \"" + key + "\" must be a boolean");
      config.dedupe_by_leaf_set = get_typed<bool>(value, key);
    } else
      throw ConfigError("unknown config key \"" + key + "\"");
  }
  config.validate();
  return config;
}

nlohmann::json SearchConfig::to_json() const {
  return { { "iteration_limit", iteration_limit },
           { "time_limit_s", time_limit_s },
           { "top_k", top_k },
           { "max_depth", max_depth },
           { "epsilon", epsilon },
           { "route_cap", route_cap },
           { "dedupe_by_leaf_set", dedupe_by_leaf_set } };
}

double reaction_cost(double prior, double epsilon) {
  if (std::isnan(prior))
    prior = epsilon;
  return -std::log(std::clamp(prior, epsilon, 1.0));
}

std::string_view to_string(Termination t) {
  switch (t) {
  case Termination::kIterations:
    return "iterations";
  case Termination::kTime:
    return "time";
  case Termination::kExhausted:
    return "exhausted";
  case Termination::kTransportError:
    return "transport-error";
  }
  return "unknown";
}

Termination termination_from_string(std::string_view s) {
  for (Termination t: { Termination::kIterations, Termination::kTime,
                        Termination::kExhausted,
                        Termination::kTransportError }) {
    if (to_string(t) == s)
      return t;
  }
  throw std::invalid_argument("unknown termination: " + std::string(s));
}

SearchResult search(const CanonicalKey &target, Predictor &predictor,
                    const Stock &stock, const SearchConfig &config,
                    const SearchOptions &options) {
  config.validate();
  const Clock::time_point start = Clock::now();

  SearchResult result;
  result.target = target;
  SearchTree tree(target, stock.contains(target) ? MolState::kStock
                                                 : MolState::kFrontier);
  tree.update_values();

  while (true) {
    const std::optional<int> selected = tree.select_frontier();
    if (!selected) {
      result.termination = Termination::kExhausted;
      break;
    }
    if (result.iterations >= config.iteration_limit) {
      result.termination = Termination::kIterations;
      break;
    }
    // Checked before an iteration starts, so the last one may overrun.
    if (seconds_since(start) >= config.time_limit_s) {
      result.termination = Termination::kTime;
      break;
    }

    const int node = *selected;
    ++result.iterations;
    ++result.model_calls;
    std::vector<Prediction> predictions;
    try {
      predictions = predictor.predict(tree.mol(node).molecule, config.top_k);
    } catch (const TransportError &e) {
      result.termination = Termination::kTransportError;
      result.error = e.what();
      break;
    }
    if (predictions.size() > static_cast<std::size_t>(config.top_k))
      predictions.resize(config.top_k);

    const int child_depth = tree.mol(node).depth + 1;
    bool kept = false;
    for (const Prediction &p: predictions) {
      const bool cycles =
          std::any_of(p.reactants.begin(), p.reactants.end(),
                      [&](const CanonicalKey &r) {
                        return tree.on_path(node, r);
                      });
      if (cycles || p.reactants.empty())
        continue;
      const int rxn = tree.add_reaction(node, p.prior, p.rank,
                                        reaction_cost(p.prior, config.epsilon));
      for (const CanonicalKey &r: p.reactants) {
        MolState state = MolState::kFrontier;
        if (stock.contains(r))
          state = MolState::kStock;
        else if (child_depth >= config.max_depth)
          state = MolState::kDead;
        tree.add_reactant(rxn, r, state);
      }
      kept = true;
    }
    if (!kept)
      tree.mark_dead(node);
    tree.update_values();
    if (options.audit)
      tree.audit(config.max_depth);
  }
  result.search_time_s = seconds_since(start);

  const Clock::time_point extract_start = Clock::now();
  result.routes =
      extract_routes(tree, config.route_cap, config.dedupe_by_leaf_set);
  result.extraction_time_s = seconds_since(extract_start);
  result.solved = !result.routes.empty();
  result.tree_mols = tree.num_mols();
  result.wall_time_s = seconds_since(start);
  return result;
}

SearchResult search(std::string_view target, Predictor &predictor,
                    const Stock &stock, const SearchConfig &config,
                    const SearchOptions &options) {
  return search(canonicalize(target), predictor, stock, config, options);
}

} // namespace retro
