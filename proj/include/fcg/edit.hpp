#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fcg {

// Half-open token index range; start == end is an insertion point.
struct TokenRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  bool operator==(const TokenRange&) const = default;
};

enum class ErrorType { ReplacementPrep, MissingPrep, UnnecessaryPrep, Other };

std::string_view to_string(ErrorType type);
ErrorType parse_error_type(std::string_view name);

inline bool is_preposition_type(ErrorType t) { return t != ErrorType::Other; }

// One contiguous difference between a source and a target token sequence.
struct Edit {
  TokenRange src;
  TokenRange tgt;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  // Verbatim M2 type string ("R:PREP", ...) when the edit came from M2.
  std::optional<std::string> raw_type;
  std::optional<ErrorType> type;

  bool operator==(const Edit&) const = default;
};

// Applies non-overlapping edits (sorted by src.start) to source.
// Throws fcg::Error on out-of-range or overlapping edits.
std::vector<std::string> apply_edits(const std::vector<std::string>& source,
                                     const std::vector<Edit>& edits);

// Recomputes tgt ranges of sorted edits from cumulative length deltas.
void assign_target_ranges(std::vector<Edit>& edits);

} // namespace fcg
