#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fcg {

// Character range over a sentence, counted in Unicode scalar values,
// end-exclusive. Always non-empty and aligned to token boundaries once it
// lives inside a Sample.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
};

std::string to_string(const Span& span);

struct Sample {
  std::string id;
  std::string sentence;
  Span span;
  std::optional<std::string> reference_comment;
  std::optional<std::string> system_comment;
  // Set when the parser widened a misaligned span to token boundaries.
  bool snapped = false;

  bool operator==(const Sample&) const = default;
};

enum class Split { train, dev, test, pseudo, other };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct Corpus {
  std::vector<Sample> samples;
  Split split = Split::other;

  bool operator==(const Corpus&) const = default;
};

struct ParseOptions {
  bool expect_comments = false;
  // Widen spans that cut through a token instead of rejecting the row.
  bool snap = false;
  // Used to build sample ids ("<source>:<line>").
  std::string source = "<input>";
  Split split = Split::other;
};

Corpus parse_fcg(std::string_view contents, const ParseOptions& options = {});

enum class CommentField { reference, system };

struct SerializeOptions {
  bool with_comments = true;
  CommentField field = CommentField::reference;
};

std::string serialize_fcg(const Corpus& corpus, const SerializeOptions& options = {});

inline constexpr std::string_view kDefaultMarker = "***";

std::string mark_span(const Sample& sample, std::string_view marker = kDefaultMarker);
std::string mark_span(std::string_view sentence, const Span& span,
                      std::string_view marker = kDefaultMarker);

struct Unmarked {
  std::string sentence;
  Span span;
};

Unmarked unmark_span(std::string_view marked, std::string_view marker = kDefaultMarker);

// Throws fcg::Error describing the first violated constraint.
void validate_sentence(std::string_view sentence);
void validate_span(std::string_view sentence, const Span& span);

// Token index range [first, last) covered by a valid span.
std::pair<std::size_t, std::size_t> span_tokens(std::string_view sentence, const Span& span);

// Character span covering tokens [first, last) of a single-space-joined sentence.
Span token_span(const std::vector<std::string>& tokens, std::size_t first, std::size_t last);

// Text of the span, e.g. "smokers the".
std::string span_text(std::string_view sentence, const Span& span);

} // namespace fcg
