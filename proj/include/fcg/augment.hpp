#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fcg/corpus.hpp"
#include "fcg/edit.hpp"
#include "fcg/errtype.hpp"
#include "fcg/generator.hpp"

namespace fcg {

inline constexpr std::size_t kBalancedCap = 5000;

// A learner sentence with one preposition error located as an FCG span.
struct Candidate {
  std::string origin;  // ParallelPair::origin
  std::string sentence;
  Span span;
  Edit edit;

  bool operator==(const Candidate&) const = default;
};

struct SpanOptions {
  // Tokens of context on each side of a missing-preposition insertion point.
  std::size_t missing_window = 1;
};

// One candidate per edit. Replacement/unnecessary edits cover their source
// tokens; missing-preposition edits cover `missing_window` tokens either
// side of the insertion point, clamped to the sentence.
std::vector<Candidate> edits_to_spans(const ParallelPair& pair, const std::vector<Edit>& prep_edits,
                                      const SpanOptions& options = {});

std::vector<Candidate> candidates_from(const std::vector<PrepSelection>& selections,
                                       const SpanOptions& options = {});

struct Provenance {
  std::string source_corpus;
  std::string origin;
  Edit edit;
  std::string generator_id;
  std::string regime_tag;

  bool operator==(const Provenance&) const = default;
};

struct PseudoSample {
  Sample sample;
  Provenance provenance;

  bool operator==(const PseudoSample&) const = default;
};

struct PseudoOptions {
  std::optional<std::size_t> cap;
  std::string source_corpus = "pseudo";
  // Sample ids become "<output_name>:<row>", matching what parse_fcg assigns
  // when the written file is read back under that name.
  std::string output_name = "pseudo.tsv";
  // Defaults to "balanced" when cap is set, else "unbalanced".
  std::optional<std::string> regime_tag;
};

// Self-labels candidates with the generator; abstentions are dropped and the
// first `cap` survivors (input order) are kept.
std::vector<PseudoSample> build_pseudo(const std::vector<Candidate>& candidates,
                                       const Generator& generator, const PseudoOptions& options = {});

Corpus pseudo_corpus(const std::vector<PseudoSample>& pseudo);

// JSON lines, one per sample: {"sample_id": ..., "source_corpus": ..., ...}.
std::string serialize_provenance(const std::vector<PseudoSample>& pseudo);
std::vector<std::pair<std::string, Provenance>> parse_provenance(std::string_view jsonl,
                                                                 const std::string& source = "<provenance>");

// Candidate lists as JSON lines (output of `annotate`, input of `augment`).
std::string serialize_candidates(const std::vector<Candidate>& candidates);
std::vector<Candidate> parse_candidates(std::string_view jsonl, const std::string& source = "<candidates>");

struct Regimes {
  std::vector<Dataset> combined;
  std::vector<Dataset> multistage;
};

// combined: [pseudo + gold at gold priority]; multistage: [pseudo at pseudo
// priority, then gold]. An empty pseudo corpus leaves only the gold stage.
Regimes make_regimes(const Corpus& pseudo, const Corpus& gold);

} // namespace fcg
