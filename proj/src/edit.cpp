#include "fcg/edit.hpp"

#include "fcg/error.hpp"

namespace fcg {

std::string_view to_string(ErrorType type) {
  switch (type) {
    case ErrorType::ReplacementPrep: return "ReplacementPrep";
    case ErrorType::MissingPrep: return "MissingPrep";
    case ErrorType::UnnecessaryPrep: return "UnnecessaryPrep";
    case ErrorType::Other: return "Other";
  }
  return "Other";
}

ErrorType parse_error_type(std::string_view name) {
  if (name == "ReplacementPrep") return ErrorType::ReplacementPrep;
  if (name == "MissingPrep") return ErrorType::MissingPrep;
  if (name == "UnnecessaryPrep") return ErrorType::UnnecessaryPrep;
  if (name == "Other") return ErrorType::Other;
  throw Error("unknown error type '" + std::string(name) + "'");
}

std::vector<std::string> apply_edits(const std::vector<std::string>& source,
                                     const std::vector<Edit>& edits) {
  std::vector<std::string> out;
  out.reserve(source.size());
  std::size_t cursor = 0;
  const Edit* prev = nullptr;
  for (const auto& e : edits) {
    if (e.src.start > e.src.end || e.src.end > source.size())
      throw Error("edit range " + std::to_string(e.src.start) + ".." + std::to_string(e.src.end) +
                  " out of bounds");
    if (e.src.start < cursor || (prev && prev->src.empty() && e.src.empty() &&
                                 prev->src.start == e.src.start))
      throw Error("overlapping edits at token " + std::to_string(e.src.start));
    out.insert(out.end(), source.begin() + static_cast<std::ptrdiff_t>(cursor),
               source.begin() + static_cast<std::ptrdiff_t>(e.src.start));
    out.insert(out.end(), e.tgt_tokens.begin(), e.tgt_tokens.end());
    cursor = e.src.end;
    prev = &e;
  }
  out.insert(out.end(), source.begin() + static_cast<std::ptrdiff_t>(cursor), source.end());
  return out;
}

void assign_target_ranges(std::vector<Edit>& edits) {
  std::ptrdiff_t delta = 0;
  for (auto& e : edits) {
    const auto start = static_cast<std::ptrdiff_t>(e.src.start) + delta;
    e.tgt = TokenRange{static_cast<std::size_t>(start), static_cast<std::size_t>(start) + e.tgt_tokens.size()};
    delta += static_cast<std::ptrdiff_t>(e.tgt_tokens.size()) - static_cast<std::ptrdiff_t>(e.src.size());
  }
}

} // namespace fcg
