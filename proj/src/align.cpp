#include "fcg/align.hpp"

#include <algorithm>

#include "fcg/text.hpp"

namespace fcg {

namespace {

using Table = std::vector<std::vector<std::size_t>>;

Table distance_table(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  Table d(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = text::iequals_ascii(a[i - 1], b[j - 1]) ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j - 1] + sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return d;
}

enum class Op { match, substitute, remove, insert };

} // namespace

std::size_t edit_cost(const std::vector<std::string>& source,
                      const std::vector<std::string>& target) {
  return distance_table(source, target)[source.size()][target.size()];
}

std::vector<Edit> align(const std::vector<std::string>& source,
                        const std::vector<std::string>& target) {
  const auto d = distance_table(source, target);

  // Walk back from the end; taking the diagonal first pushes gaps leftward.
  std::vector<Op> ops;
  std::size_t i = source.size();
  std::size_t j = target.size();
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = text::iequals_ascii(source[i - 1], target[j - 1]);
      if (d[i][j] == d[i - 1][j - 1] + (same ? 0 : 1)) {
        ops.push_back(same && source[i - 1] == target[j - 1] ? Op::match : Op::substitute);
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ops.push_back(Op::remove);
      --i;
    } else {
      ops.push_back(Op::insert);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  std::vector<Edit> edits;
  std::size_t si = 0;
  std::size_t ti = 0;
  std::size_t k = 0;
  while (k < ops.size()) {
    if (ops[k] == Op::match) {
      ++si;
      ++ti;
      ++k;
      continue;
    }
    Edit e;
    e.src.start = si;
    e.tgt.start = ti;
    for (; k < ops.size() && ops[k] != Op::match; ++k) {
      if (ops[k] != Op::insert) ++si;
      if (ops[k] != Op::remove) ++ti;
    }
    e.src.end = si;
    e.tgt.end = ti;
    e.src_tokens.assign(source.begin() + static_cast<std::ptrdiff_t>(e.src.start),
                        source.begin() + static_cast<std::ptrdiff_t>(e.src.end));
    e.tgt_tokens.assign(target.begin() + static_cast<std::ptrdiff_t>(e.tgt.start),
                        target.begin() + static_cast<std::ptrdiff_t>(e.tgt.end));
    edits.push_back(std::move(e));
  }
  return edits;
}

} // namespace fcg
