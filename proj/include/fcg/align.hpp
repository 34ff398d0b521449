#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fcg/edit.hpp"

namespace fcg {

// Token-level Levenshtein distance with unit insert/delete/substitute
// costs. Tokens equal up to ASCII case cost nothing.
std::size_t edit_cost(const std::vector<std::string>& source,
                      const std::vector<std::string>& target);

// Edits from one minimal-cost alignment. Adjacent non-matching operations
// merge into a single Edit. Ties prefer substitution, then place gaps as far
// left as possible. Case-only differences cost 0 in the alignment but are
// still reported (so that replaying the edits reproduces target exactly).
std::vector<Edit> align(const std::vector<std::string>& source,
                        const std::vector<std::string>& target);

} // namespace fcg
