#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fcg/edit.hpp"
#include "fcg/gec_ingest.hpp"

namespace fcg {

// Closed-class list of single-token prepositions, stored lowercase.
class PrepositionLexicon {
 public:
  // Throws fcg::Error if entries is empty or any entry is not a single token.
  explicit PrepositionLexicon(const std::vector<std::string>& entries);

  static PrepositionLexicon builtin();

  // One token per line; '#' starts a comment; blank lines ignored.
  static PrepositionLexicon parse(std::string_view contents, const std::string& source = "<lexicon>");

  bool contains(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }
  const std::set<std::string>& entries() const { return entries_; }

 private:
  std::set<std::string> entries_;
};

// Trusts edit.raw_type when present (R:PREP / M:PREP / U:PREP, all else
// Other); otherwise derives the type from the edit's tokens.
ErrorType classify(const Edit& edit, const PrepositionLexicon& lexicon);

// Token-only classification, ignoring any raw type.
ErrorType classify_tokens(const Edit& edit, const PrepositionLexicon& lexicon);

struct PrepSelection {
  ParallelPair pair;
  // Preposition edits only, with `type` set, in source order.
  std::vector<Edit> edits;

  bool operator==(const PrepSelection&) const = default;
};

// Keeps pairs with at least one preposition edit. Pairs without given_edits
// are aligned first.
std::vector<PrepSelection> select_prep_sentences(const std::vector<ParallelPair>& pairs,
                                                 const PrepositionLexicon& lexicon);

} // namespace fcg
