#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fcg/corpus.hpp"

namespace fcg {

inline constexpr int kPseudoPriority = 0;
inline constexpr int kGoldPriority = 1;

// Produces a feedback comment for a sample, or nothing (abstain).
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::optional<std::string> generate(const Sample& sample) const = 0;
  // Stable identifier recorded in pseudo-data provenance.
  virtual std::string id() const = 0;
};

// A training corpus and the priority its entries carry in the index.
struct Dataset {
  std::string name;
  Corpus corpus;
  int priority = kGoldPriority;
};

struct TrainEntry {
  std::string sample_id;
  std::vector<std::string> marked_tokens;
  std::string comment;
  int priority = kGoldPriority;
  std::size_t ordinal = 0;
};

struct RetrievalOptions {
  std::string marker = std::string(kDefaultMarker);
  double abstain_threshold = 0.0;
};

// Nearest-neighbour comment retrieval over unigram+bigram TF-IDF vectors of
// marked sentences. Immutable once built; generate() is safe to call
// concurrently.
class RetrievalModel final : public Generator {
 public:
  struct Match {
    std::size_t entry = 0;
    double similarity = 0.0;
  };

  RetrievalModel(std::vector<TrainEntry> entries, RetrievalOptions options);

  std::optional<std::string> generate(const Sample& sample) const override;
  std::string id() const override { return id_; }

  // Best entry for an already-marked token sequence, ignoring the threshold.
  Match best_match(const std::vector<std::string>& marked_tokens) const;
  double similarity(const std::vector<std::string>& marked_tokens, std::size_t entry) const;

  const std::vector<TrainEntry>& entries() const { return entries_; }
  const RetrievalOptions& options() const { return options_; }

  // Index manifest: entries plus settings. Term statistics are rebuilt on load.
  std::string to_json() const;
  static RetrievalModel from_json(std::string_view json, const std::string& source = "<index>");

 private:
  struct Weighted {
    std::vector<std::pair<std::size_t, double>> terms;  // sorted by term id
    double norm = 0.0;
  };

  Weighted weigh(const std::vector<std::string>& tokens, bool extend_vocabulary);
  Weighted weigh_query(const std::vector<std::string>& tokens) const;
  double idf(std::size_t df) const;

  std::vector<TrainEntry> entries_;
  RetrievalOptions options_;
  std::string id_;
  std::unordered_map<std::string, std::size_t> vocabulary_;
  std::vector<std::size_t> document_frequency_;
  std::vector<Weighted> documents_;
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;
  std::unordered_map<std::string, std::vector<std::size_t>> exact_;
};

// One TrainEntry per sample, in dataset order. Throws fcg::Error naming the
// sample when a reference comment is missing.
RetrievalModel train_retrieval(const std::vector<Dataset>& datasets,
                               const RetrievalOptions& options = {});

struct BatchOptions {
  // Worker threads for generators that are safe to share; 0 or 1 is serial.
  unsigned threads = 1;
  bool concurrent_safe = false;
};

// Fills system_comment for every sample (absent where the generator
// abstained). Order is preserved; failures are rethrown as GeneratorError
// prefixed with the sample id.
Corpus generate_batch(const Generator& generator, const Corpus& corpus,
                      const BatchOptions& options = {});

} // namespace fcg
