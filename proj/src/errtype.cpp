#include "fcg/errtype.hpp"

#include "fcg/align.hpp"
#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

const std::vector<std::string>& builtin_entries() {
  static const std::vector<std::string> entries = {
      "about",   "above",   "across",     "after",   "against", "along",      "among",
      "around",  "at",      "before",     "behind",  "below",   "beneath",    "beside",
      "between", "beyond",  "by",         "despite", "down",    "during",     "except",
      "for",     "from",    "in",         "inside",  "into",    "like",       "near",
      "of",      "off",     "on",         "onto",    "out",     "outside",    "over",
      "past",    "since",   "through",    "throughout", "till", "to",         "toward",
      "towards", "under",   "underneath", "until",   "up",      "upon",       "with",
      "within",  "without"};
  return entries;
}

} // namespace

PrepositionLexicon::PrepositionLexicon(const std::vector<std::string>& entries) {
  for (const auto& e : entries) {
    if (e.empty() || e.find_first_of(" \t\r\n") != std::string::npos)
      throw Error("lexicon entry '" + e + "' is not a single token");
    entries_.insert(text::to_lower_ascii(e));
  }
  if (entries_.empty()) throw Error("preposition lexicon is empty");
}

PrepositionLexicon PrepositionLexicon::builtin() { return PrepositionLexicon(builtin_entries()); }

PrepositionLexicon PrepositionLexicon::parse(std::string_view contents, const std::string& source) {
  std::vector<std::string> entries;
  const auto rows = text::lines(contents);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto row = rows[i];
    if (const auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
    row = text::trim(row);
    if (row.empty()) continue;
    if (row.find_first_of(" \t") != std::string_view::npos)
      throw ParseError(source, i + 1, "lexicon entry '" + std::string(row) + "' is not a single token");
    entries.emplace_back(row);
  }
  if (entries.empty()) throw ParseError(source, 0, "preposition lexicon is empty");
  return PrepositionLexicon(entries);
}

bool PrepositionLexicon::contains(std::string_view token) const {
  return entries_.count(text::to_lower_ascii(token)) != 0;
}

ErrorType classify_tokens(const Edit& edit, const PrepositionLexicon& lexicon) {
  const auto& s = edit.src_tokens;
  const auto& t = edit.tgt_tokens;
  if (s.size() == 1 && t.size() == 1 && lexicon.contains(s[0]) && lexicon.contains(t[0]))
    return ErrorType::ReplacementPrep;
  if (s.empty() && t.size() == 1 && lexicon.contains(t[0])) return ErrorType::MissingPrep;
  if (t.empty() && s.size() == 1 && lexicon.contains(s[0])) return ErrorType::UnnecessaryPrep;
  return ErrorType::Other;
}

ErrorType classify(const Edit& edit, const PrepositionLexicon& lexicon) {
  if (edit.raw_type) {
    if (*edit.raw_type == "R:PREP") return ErrorType::ReplacementPrep;
    if (*edit.raw_type == "M:PREP") return ErrorType::MissingPrep;
    if (*edit.raw_type == "U:PREP") return ErrorType::UnnecessaryPrep;
    return ErrorType::Other;
  }
  return classify_tokens(edit, lexicon);
}

std::vector<PrepSelection> select_prep_sentences(const std::vector<ParallelPair>& pairs,
                                                 const PrepositionLexicon& lexicon) {
  std::vector<PrepSelection> out;
  for (const auto& pair : pairs) {
    auto edits = pair.given_edits ? *pair.given_edits : align(pair.source_tokens, pair.target_tokens);
    PrepSelection sel;
    for (auto& e : edits) {
      const auto type = classify(e, lexicon);
      if (!is_preposition_type(type)) continue;
      e.type = type;
      sel.edits.push_back(std::move(e));
    }
    if (sel.edits.empty()) continue;
    sel.pair = pair;
    out.push_back(std::move(sel));
  }
  return out;
}

} // namespace fcg
