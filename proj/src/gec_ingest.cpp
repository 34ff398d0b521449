#include "fcg/gec_ingest.hpp"

#include <algorithm>
#include <charconv>

#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

constexpr std::string_view kFieldSep = "|||";

std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = s.find(kFieldSep, begin);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(begin));
      return out;
    }
    out.push_back(s.substr(begin, pos - begin));
    begin = pos + kFieldSep.size();
  }
}

std::optional<long> parse_long(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Block {
  std::size_t first_line = 0;
  std::size_t index = 0;
  std::optional<std::string_view> s_line;
  std::vector<std::pair<std::size_t, std::string_view>> a_lines;
};

ParallelPair finish_block(const Block& block, const M2Options& options) {
  auto fail = [&](std::size_t line, const std::string& msg) {
    throw ParseError(options.source, line, msg);
  };
  if (!block.s_line) fail(block.first_line, "annotation block without an S line");

  ParallelPair pair;
  pair.origin = options.source + ":" + std::to_string(block.index);
  pair.source_tokens = text::split_ws(*block.s_line);

  std::vector<std::pair<Edit, std::size_t>> edits;
  for (const auto& [line_no, a] : block.a_lines) {
    const auto fields = split_fields(a);
    if (fields.size() != 6)
      fail(line_no, "expected 6 '|||'-separated fields, got " + std::to_string(fields.size()));
    const auto range = text::split_ws(fields[0]);
    if (range.size() != 2) fail(line_no, "malformed edit range '" + std::string(fields[0]) + "'");
    const auto start = parse_long(range[0]);
    const auto end = parse_long(range[1]);
    const auto annotator = parse_long(text::trim(fields[5]));
    if (!start || !end) fail(line_no, "malformed edit range '" + std::string(fields[0]) + "'");
    if (!annotator) fail(line_no, "malformed annotator id '" + std::string(fields[5]) + "'");
    if (*annotator != options.annotator) continue;

    const std::string type(text::trim(fields[1]));
    if (type.find("noop") != std::string::npos) continue;
    if (*start < 0 || *end < *start || static_cast<std::size_t>(*end) > pair.source_tokens.size())
      fail(line_no, "edit range " + std::to_string(*start) + " " + std::to_string(*end) +
                        " out of bounds for " + std::to_string(pair.source_tokens.size()) +
                        " tokens");

    Edit e;
    e.src = TokenRange{static_cast<std::size_t>(*start), static_cast<std::size_t>(*end)};
    e.src_tokens.assign(pair.source_tokens.begin() + *start, pair.source_tokens.begin() + *end);
    const auto correction = text::trim(fields[2]);
    if (correction != "-NONE-") e.tgt_tokens = text::split_ws(correction);
    if (e.src.empty() && e.tgt_tokens.empty()) fail(line_no, "empty edit");
    e.raw_type = type;
    edits.emplace_back(std::move(e), line_no);
  }

  std::stable_sort(edits.begin(), edits.end(), [](const auto& a, const auto& b) {
    return std::pair(a.first.src.start, a.first.src.end) < std::pair(b.first.src.start, b.first.src.end);
  });
  for (std::size_t i = 1; i < edits.size(); ++i) {
    const auto& prev = edits[i - 1].first;
    const auto& cur = edits[i].first;
    const bool same_insertion = prev.src.empty() && cur.src.empty() && prev.src.start == cur.src.start;
    if (cur.src.start < prev.src.end || same_insertion)
      fail(edits[i].second, "edit overlaps an earlier edit from the same annotator");
  }

  std::vector<Edit> given;
  given.reserve(edits.size());
  for (auto& [e, line] : edits) given.push_back(std::move(e));
  assign_target_ranges(given);
  pair.target_tokens = apply_edits(pair.source_tokens, given);
  pair.given_edits = std::move(given);
  return pair;
}

} // namespace

std::vector<ParallelPair> parse_parallel_tsv(std::string_view text, const std::string& source) {
  std::vector<ParallelPair> out;
  const auto rows = text::lines(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto fields = text::split_char(rows[i], '\t');
    if (fields.size() != 2)
      throw ParseError(source, i + 1,
                       "expected 2 TAB-separated fields, got " + std::to_string(fields.size()));
    ParallelPair pair;
    pair.source_tokens = text::split_ws(fields[0]);
    pair.target_tokens = text::split_ws(fields[1]);
    pair.origin = source + ":" + std::to_string(i + 1);
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<ParallelPair> parse_m2(std::string_view text, const M2Options& options) {
  std::vector<ParallelPair> out;
  const auto rows = text::lines(text);
  Block block;
  bool open = false;
  std::size_t block_count = 0;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto row = text::rtrim(rows[i]);
    if (row.empty()) {
      if (open) out.push_back(finish_block(block, options));
      open = false;
      continue;
    }
    if (!open) {
      block = Block{};
      block.first_line = line_no;
      block.index = ++block_count;
      open = true;
    }
    if (row == "S" || row.substr(0, 2) == "S ") {
      if (block.s_line) throw ParseError(options.source, line_no, "second S line in one block");
      if (!block.a_lines.empty()) throw ParseError(options.source, line_no, "S line after A lines");
      block.s_line = row.size() > 2 ? row.substr(2) : std::string_view{};
    } else if (row.substr(0, 2) == "A ") {
      if (!block.s_line) throw ParseError(options.source, line_no, "A line before S line");
      block.a_lines.emplace_back(line_no, row.substr(2));
    } else {
      throw ParseError(options.source, line_no, "line is neither an S nor an A line");
    }
  }
  if (open) out.push_back(finish_block(block, options));
  return out;
}

} // namespace fcg
