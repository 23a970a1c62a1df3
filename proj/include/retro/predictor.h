//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETRO_PREDICTOR_H_
#define RETRO_PREDICTOR_H_

#include <chrono>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "retro/molgraph.h"

namespace retro {

// One single-step disconnection. `reactants` is a sorted multiset.
struct Prediction {
  std::vector<CanonicalKey> reactants;
  double prior = 0.0;
  int rank = 0;

  friend bool operator==(const Prediction &, const Prediction &) = default;
};

// Unvalidated model output: reactant SMILES and a probability.
struct RawPrediction {
  std::vector<std::string> reactants;
  double prior = 0.0;
};

struct NormalizeStats {
  int unparsable = 0;
  int empty = 0;
  int bad_prior = 0;
  int identity_loop = 0;
  int duplicates = 0;
};

// Drops entries with unparsable or empty reactants, priors outside (0, 1]
// or a reactant equal to `product`; merges duplicate reactant multisets
// keeping the larger prior; ranks 1..k by prior descending, ties by the
// reactant keys. Reactant strings containing '.' contribute one reactant
// per component.
std::vector<Prediction> normalize_predictions(const CanonicalKey &product,
                                              std::span<const RawPrediction> raw,
                                              NormalizeStats *stats = nullptr);

// Predictor I/O failure, timeout or protocol violation. Distinct from an
// empty prediction list.
class TransportError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed reaction files.
class ReactionFileError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Single-step model contract. predict() returns at most top_k predictions
// in rank order; every list satisfies the normalize_predictions contract.
class Predictor {
public:
  virtual ~Predictor() = default;

  virtual std::vector<Prediction> predict(const CanonicalKey &product,
                                          int top_k) = 0;

  // False once the predictor can no longer answer (dead process, protocol
  // violation). The batch runner replaces unhealthy handles.
  virtual bool healthy() const { return true; }

  virtual int max_top_k() const { return std::numeric_limits<int>::max(); }
};

struct ReactionRow {
  std::string product;
  std::vector<std::string> reactants;
  long count = 1;
  std::size_t line = 0;
};

// Reads product<TAB>reactant1.reactant2[<TAB>count] rows. Blank lines and
// lines starting with '#' are skipped. Throws ReactionFileError on rows
// with missing fields or invalid counts.
std::vector<ReactionRow> read_reaction_rows(std::istream &in,
                                            const std::string &source);

// Frequency-table predictor. Immutable after construction, so one instance
// can serve any number of threads.
class TablePredictor final: public Predictor {
public:
  static std::shared_ptr<const TablePredictor>
  from_file(const std::string &path);
  static std::shared_ptr<const TablePredictor>
  from_stream(std::istream &in, const std::string &source = "<stream>");

  std::vector<Prediction> predict(const CanonicalKey &product,
                                  int top_k) override;
  std::vector<Prediction> lookup(const CanonicalKey &product,
                                 int top_k) const;

  std::size_t num_products() const { return table_.size(); }

  // Full (untruncated) lists keyed by canonical product.
  const std::unordered_map<CanonicalKey, std::vector<Prediction>> &
  table() const {
    return table_;
  }

private:
  explicit TablePredictor(
      std::unordered_map<CanonicalKey, std::vector<Prediction>> table)
      : table_(std::move(table)) { }

  std::unordered_map<CanonicalKey, std::vector<Prediction>> table_;
};

// Non-owning adapter so a shared table can sit behind a per-worker handle.
class SharedTablePredictor final: public Predictor {
public:
  explicit SharedTablePredictor(std::shared_ptr<const TablePredictor> table)
      : table_(std::move(table)) { }

  std::vector<Prediction> predict(const CanonicalKey &product,
                                  int top_k) override {
    return table_->lookup(product, top_k);
  }

private:
  std::shared_ptr<const TablePredictor> table_;
};

inline constexpr double kDefaultPredictorTimeoutS = 600.0;

// Client for an external single-step model speaking line-delimited JSON
// over the child's stdin/stdout:
//
//   adapter -> {"type":"hello","version":1,"max_top_k":K}
//   client  -> {"type":"predict","id":n,"smiles":"...","top_k":k}
//   adapter -> {"type":"predictions","id":n,
//               "results":[{"reactants":["..."],"prob":p}, ...]}
//            | {"type":"error","id":n,"message":"..."}
//
// One request is in flight at a time and ids increase strictly. Handles
// are neither copyable nor movable; give every worker its own.
class ExternalPredictor final: public Predictor {
public:
  // Spawns `command` through /bin/sh and waits up to `timeout_s` for the
  // hello line. Throws TransportError when the handshake fails.
  static std::unique_ptr<ExternalPredictor>
  spawn(const std::string &command,
        double timeout_s = kDefaultPredictorTimeoutS);

  ExternalPredictor(const ExternalPredictor &) = delete;
  ExternalPredictor &operator=(const ExternalPredictor &) = delete;
  ~ExternalPredictor() override;

  std::vector<Prediction> predict(const CanonicalKey &product,
                                  int top_k) override;
  bool healthy() const override { return !failed_; }
  int max_top_k() const override { return max_top_k_; }

  int pid() const { return pid_; }
  const NormalizeStats &stats() const { return stats_; }

private:
  ExternalPredictor(int pid, int to_child, int from_child, double timeout_s);

  std::string read_line(double timeout_s);
  void write_line(const std::string &line);
  [[noreturn]] void fail(const std::string &why);
  void shutdown();

  int pid_;
  int to_child_;
  int from_child_;
  double timeout_s_;
  int max_top_k_ = 0;
  long next_id_ = 1;
  bool failed_ = false;
  std::string buffer_;
  NormalizeStats stats_;
};

// Factory returning a handle for one worker. Table predictors hand out
// views of one shared table; external predictors spawn a fresh process.
using PredictorFactory = std::function<std::unique_ptr<Predictor>()>;

// Parses "table:<path>" or "cmd:<command>".
PredictorFactory make_predictor_factory(const std::string &uri,
                                        double timeout_s
                                        = kDefaultPredictorTimeoutS);

} // namespace retro

#endif // RETRO_PREDICTOR_H_
