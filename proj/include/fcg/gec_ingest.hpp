#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fcg/edit.hpp"

namespace fcg {

// A learner sentence and its correction, from a parallel GEC corpus.
struct ParallelPair {
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  // Present only for M2 input; sorted by src.start.
  std::optional<std::vector<Edit>> given_edits;
  // "<source>:<index>" with a 1-based line (TSV) or block (M2) index.
  std::string origin;

  bool operator==(const ParallelPair&) const = default;
};

// Rows of "source TAB target"; tokens are whitespace-separated.
std::vector<ParallelPair> parse_parallel_tsv(std::string_view text,
                                             const std::string& source = "<input>");

struct M2Options {
  int annotator = 0;
  std::string source = "<input>";
};

// Standard M2: "S tokens" followed by "A start end|||type|||correction|||
// required|||comment|||annotator" lines; blocks separated by blank lines.
// "-NONE-" as a correction means deletion; types containing "noop" are skipped.
std::vector<ParallelPair> parse_m2(std::string_view text, const M2Options& options = {});

} // namespace fcg
