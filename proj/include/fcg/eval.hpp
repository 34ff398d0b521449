#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fcg/corpus.hpp"

namespace fcg {

inline constexpr int kMaxBleuOrder = 4;

struct BleuScore {
  double value = 0.0;  // in [0, 1]; reports multiply by 100
  // Modified precision of each included order, starting at order 1.
  std::vector<double> precisions;
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

// Smoothed sentence BLEU: order 1 unsmoothed, orders >= 2 add one to
// numerator and denominator, orders the hypothesis is too short for are
// dropped and the remaining weights renormalized.
BleuScore sentence_bleu(const std::vector<std::string>& hypothesis,
                        const std::vector<std::string>& reference);

// Corpus BLEU: clipped counts and lengths summed over all pairs, orders 1-4,
// no smoothing. Throws fcg::Error on an empty list.
BleuScore corpus_bleu(const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs);

enum class Label { correct, incorrect };

std::string_view to_string(Label label);

struct HumanLabel {
  std::string sample_id;
  Label label = Label::incorrect;
};

// TSV "sample_id TAB correct|incorrect". Duplicate ids are rejected.
std::vector<HumanLabel> parse_labels(std::string_view contents, const std::string& source = "<labels>");

struct F1Block {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_generated = 0;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
};

// precision = correct/generated (0 if nothing generated), recall =
// correct/total. Every generated output needs a label; a label on an
// abstained or unknown sample is an error.
F1Block task_f1(const Corpus& outputs, const std::vector<HumanLabel>& labels);

struct LabeledScore {
  std::string sample_id;
  double bleu = 0.0;
  Label label = Label::incorrect;
};

struct AgreementBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
};

struct AgreementHistogram {
  double bin_width = 0.1;
  std::vector<AgreementBin> bins;
  std::size_t n_labeled = 0;
  // Correct samples scoring below 0.5, and their share of all labeled samples.
  std::size_t correct_below_half = 0;
  double correct_below_half_fraction = 0.0;
  // Samples scoring above 0.6, and the fraction of those labeled correct.
  std::size_t above_0_6 = 0;
  std::size_t above_0_6_correct = 0;
  double above_0_6_correct_fraction = 0.0;
};

// Bins are [k*w, (k+1)*w); a score of exactly 1.0 falls into the top bin.
AgreementHistogram agreement_bins(const std::vector<LabeledScore>& scores, double bin_width = 0.1);

std::string agreement_csv(const AgreementHistogram& histogram);

struct OverlapStats {
  std::size_t n_test = 0;
  std::size_t exact_match = 0;
  double exact_match_fraction = 0.0;
  // References that occur verbatim among training comments.
  std::size_t n_refs_seen = 0;
  // ...of which the system output was labeled correct.
  std::size_t n_seen_and_correct = 0;
  // Seen references where the output was not an exact match, and how many
  // of those were still labeled correct.
  std::size_t n_seen_not_exact = 0;
  std::size_t n_seen_not_exact_correct = 0;
  bool labeled = false;
};

// Comments are compared after trimming trailing whitespace.
OverlapStats overlap_stats(const Corpus& test, const Corpus& train,
                           const std::vector<HumanLabel>* labels = nullptr);

struct CategoryRow {
  std::string category;
  std::size_t count = 0;
  double fraction = 0.0;
};

// Descending by count; equal counts ordered by category name.
std::vector<CategoryRow> category_table(const std::vector<std::pair<std::string, std::string>>& assignments);

std::vector<std::pair<std::string, std::string>> parse_categories(std::string_view contents,
                                                                  const std::string& source = "<categories>");

struct SampleScore {
  std::string sample_id;
  double bleu = 0.0;
  bool generated = false;
  std::optional<Label> label;
};

struct EvalReport {
  std::string name;
  BleuScore corpus_bleu;
  double mean_sentence_bleu = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_generated = 0;
  std::vector<SampleScore> per_sample;
  std::optional<F1Block> f1;
  std::optional<AgreementHistogram> agreement;
  std::optional<OverlapStats> overlap;
  std::vector<CategoryRow> categories;
};

struct ReportInputs {
  std::string name = "test";
  // Samples with both reference and system comments (system may be absent).
  const Corpus* outputs = nullptr;
  const std::vector<HumanLabel>* labels = nullptr;
  const Corpus* train = nullptr;
  const std::vector<std::pair<std::string, std::string>>* categories = nullptr;
  double bin_width = 0.1;
};

// Abstained samples score 0 sentence BLEU and contribute an empty hypothesis
// to corpus BLEU.
EvalReport build_report(const ReportInputs& inputs);

std::string report_json(const std::vector<EvalReport>& reports);
std::string report_table(const std::vector<EvalReport>& reports);

// Copies the comment column of a parsed hypothesis file into system_comment
// of the reference corpus. Rows must line up (same sentence and span).
Corpus attach_hypotheses(const Corpus& references, const Corpus& hypotheses);

} // namespace fcg
