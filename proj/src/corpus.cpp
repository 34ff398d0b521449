#include "fcg/corpus.hpp"

#include <algorithm>
#include <charconv>

#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

struct TokenBounds {
  // Character offsets of each token's first char and one-past-last char.
  std::vector<std::size_t> starts;
  std::vector<std::size_t> ends;
  std::size_t length = 0;
};

TokenBounds token_bounds(std::string_view sentence) {
  TokenBounds b;
  const auto offs = text::utf8::offsets(sentence);
  b.length = offs.size() - 1;
  bool in_token = false;
  for (std::size_t c = 0; c < b.length; ++c) {
    const bool space = sentence[offs[c]] == ' ';
    if (!space && !in_token) {
      b.starts.push_back(c);
      in_token = true;
    } else if (space && in_token) {
      b.ends.push_back(c);
      in_token = false;
    }
  }
  if (in_token) b.ends.push_back(b.length);
  return b;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

} // namespace

std::string to_string(const Span& span) {
  return std::to_string(span.start) + ":" + std::to_string(span.end);
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
    case Split::pseudo: return "pseudo";
    case Split::other: return "other";
  }
  return "other";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  if (name == "pseudo") return Split::pseudo;
  if (name == "other") return Split::other;
  throw Error("unknown split name '" + std::string(name) + "'");
}

void validate_sentence(std::string_view sentence) {
  if (sentence.empty()) throw Error("empty sentence");
  try {
    text::utf8::validate(sentence);
  } catch (const std::invalid_argument& e) {
    throw Error(e.what());
  }
  if (sentence.find_first_of("\t\r\n") != std::string_view::npos)
    throw Error("sentence contains a tab or line break");
  if (sentence.front() == ' ' || sentence.back() == ' ')
    throw Error("sentence has leading or trailing whitespace");
  if (sentence.find("  ") != std::string_view::npos)
    throw Error("sentence is not single-space separated");
}

void validate_span(std::string_view sentence, const Span& span) {
  const auto b = token_bounds(sentence);
  if (span.start >= span.end || span.end > b.length)
    throw Error("span " + to_string(span) + " out of range for sentence of length " +
                std::to_string(b.length));
  if (!contains(b.starts, span.start) || !contains(b.ends, span.end))
    throw Error("span " + to_string(span) + " (\"" + span_text(sentence, span) +
                "\") not on token boundaries");
}

std::pair<std::size_t, std::size_t> span_tokens(std::string_view sentence, const Span& span) {
  validate_span(sentence, span);
  const auto b = token_bounds(sentence);
  const auto first = std::lower_bound(b.starts.begin(), b.starts.end(), span.start) - b.starts.begin();
  const auto last = std::lower_bound(b.ends.begin(), b.ends.end(), span.end) - b.ends.begin() + 1;
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

Span token_span(const std::vector<std::string>& tokens, std::size_t first, std::size_t last) {
  if (first >= last || last > tokens.size()) throw Error("empty or out-of-range token window");
  std::size_t pos = 0;
  Span span;
  for (std::size_t i = 0; i < last; ++i) {
    if (i == first) span.start = pos;
    pos += text::utf8::length(tokens[i]);
    if (i + 1 == last) span.end = pos;
    pos += 1;
  }
  return span;
}

std::string span_text(std::string_view sentence, const Span& span) {
  const auto offs = text::utf8::offsets(sentence);
  const std::size_t n = offs.size() - 1;
  const std::size_t s = std::min(span.start, n);
  const std::size_t e = std::min(std::max(span.end, s), n);
  return std::string(sentence.substr(offs[s], offs[e] - offs[s]));
}

Corpus parse_fcg(std::string_view contents, const ParseOptions& options) {
  Corpus corpus;
  corpus.split = options.split;
  if (contents.substr(0, 3) == "\xEF\xBB\xBF")
    throw ParseError(options.source, 1, "byte-order mark not allowed");

  const auto rows = text::lines(contents);
  corpus.samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto row = rows[i];
    auto fail = [&](const std::string& msg) { throw ParseError(options.source, line_no, msg); };

    if (row.find('\r') != std::string_view::npos) fail("CR character (LF line endings required)");
    const auto fields = text::split_char(row, '\t');
    if (fields.size() < 2 || fields.size() > 3)
      fail("expected 2 or 3 TAB-separated fields, got " + std::to_string(fields.size()));
    if (options.expect_comments && fields.size() != 3) fail("missing comment field");

    Sample sample;
    sample.id = options.source + ":" + std::to_string(line_no);
    sample.sentence = std::string(fields[0]);
    try {
      validate_sentence(sample.sentence);
    } catch (const Error& e) {
      fail(e.what());
    }

    const auto colon = fields[1].find(':');
    std::optional<std::size_t> start, end;
    if (colon != std::string_view::npos) {
      start = parse_index(fields[1].substr(0, colon));
      end = parse_index(fields[1].substr(colon + 1));
    }
    if (!start || !end) fail("malformed offset '" + std::string(fields[1]) + "'");
    sample.span = Span{*start, *end};

    const auto b = token_bounds(sample.sentence);
    if (sample.span.start >= sample.span.end || sample.span.end > b.length)
      fail("span " + to_string(sample.span) + " out of range for sentence of length " +
           std::to_string(b.length));
    if (!contains(b.starts, sample.span.start) || !contains(b.ends, sample.span.end)) {
      if (!options.snap)
        fail("span " + to_string(sample.span) + " (\"" + span_text(sample.sentence, sample.span) +
             "\") not on token boundaries");
      // Outward: latest token start at or before start, earliest token end at or after end.
      auto s_it = std::upper_bound(b.starts.begin(), b.starts.end(), sample.span.start);
      auto e_it = std::lower_bound(b.ends.begin(), b.ends.end(), sample.span.end);
      sample.span.start = *std::prev(s_it);
      sample.span.end = *e_it;
      sample.snapped = true;
    }

    if (fields.size() == 3 && !fields[2].empty()) {
      try {
        text::utf8::validate(fields[2]);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      sample.reference_comment = std::string(fields[2]);
    }
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

std::string serialize_fcg(const Corpus& corpus, const SerializeOptions& options) {
  std::string out;
  for (const auto& s : corpus.samples) {
    if (s.sentence.find_first_of("\t\n") != std::string::npos)
      throw Error(s.id + ": sentence contains a tab or newline");
    out += s.sentence;
    out += '\t';
    out += to_string(s.span);
    if (options.with_comments) {
      const auto& c =
          options.field == CommentField::reference ? s.reference_comment : s.system_comment;
      out += '\t';
      if (c) {
        if (c->find_first_of("\t\n") != std::string::npos)
          throw Error(s.id + ": comment contains a tab or newline");
        out += *c;
      }
    }
    out += '\n';
  }
  return out;
}

std::string mark_span(std::string_view sentence, const Span& span, std::string_view marker) {
  if (marker.empty() || marker.find_first_of(" \t\r\n") != std::string_view::npos)
    throw Error("marker must be a single non-empty token");
  auto tokens = text::split_spaces(sentence);
  if (std::find(tokens.begin(), tokens.end(), marker) != tokens.end())
    throw Error("marker '" + std::string(marker) + "' already occurs in the sentence");
  const auto [first, last] = span_tokens(sentence, span);
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(last), std::string(marker));
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(first), std::string(marker));
  return text::join(tokens);
}

std::string mark_span(const Sample& sample, std::string_view marker) {
  return mark_span(sample.sentence, sample.span, marker);
}

Unmarked unmark_span(std::string_view marked, std::string_view marker) {
  const auto tokens = text::split_spaces(marked);
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] == marker) at.push_back(i);
  if (at.size() != 2)
    throw Error("expected exactly two '" + std::string(marker) + "' markers, found " +
                std::to_string(at.size()));
  if (at[1] == at[0] + 1) throw Error("markers enclose an empty span");

  std::vector<std::string> plain;
  plain.reserve(tokens.size() - 2);
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (i != at[0] && i != at[1]) plain.push_back(tokens[i]);

  Unmarked out;
  out.span = token_span(plain, at[0], at[1] - 1);
  out.sentence = text::join(plain);
  validate_sentence(out.sentence);
  return out;
}

} // namespace fcg
