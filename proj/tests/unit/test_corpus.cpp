#include <doctest.h>

#include <random>

#include "fcg/corpus.hpp"
#include "fcg/error.hpp"
#include "fcg/text.hpp"
#include "../support/oracles.hpp"

using namespace fcg;

namespace {

const std::string kExample = "And we can put posters to remind the smokers the risks they are taking .";

Corpus random_corpus(std::mt19937& rng, std::size_t n, bool with_comments) {
  static const std::vector<std::string> words = {"the", "smokers", "at", "school", "go", ",", ".",
                                                 "café", "naïve", "to", "of", "part-time", "<<x>>"};
  std::string text;
  for (std::size_t i = 0; i < n; ++i) {
    auto toks = oracle::random_tokens(rng, 7, words);
    if (toks.empty()) toks.push_back("x");
    std::uniform_int_distribution<std::size_t> a(0, toks.size() - 1);
    std::size_t first = a(rng);
    std::uniform_int_distribution<std::size_t> b(first + 1, toks.size());
    std::size_t last = b(rng);
    const Span span = token_span(toks, first, last);
    text += text::join(toks) + "\t" + to_string(span);
    if (with_comments) text += "\tUse the <preposition> 'to' (" + std::to_string(i) + ") .";
    text += "\n";
  }
  return parse_fcg(text, ParseOptions{with_comments, false, "rand.tsv", Split::train});
}

} // namespace

TEST_CASE("parse_fcg reads the worked example") {
  const auto c = parse_fcg(kExample + "\t37:48\n");
  REQUIRE(c.samples.size() == 1);
  CHECK(c.samples[0].span == Span{37, 48});
  CHECK(span_text(c.samples[0].sentence, c.samples[0].span) == "smokers the");
  CHECK_FALSE(c.samples[0].reference_comment);
  CHECK(c.samples[0].id == "<input>:1");
}

TEST_CASE("parse_fcg minimal row with comment") {
  const auto c = parse_fcg("a .\t0:1\tok\n", ParseOptions{true});
  REQUIRE(c.samples.size() == 1);
  CHECK(span_text(c.samples[0].sentence, c.samples[0].span) == "a");
  CHECK(c.samples[0].reference_comment == "ok");
}

TEST_CASE("parse_fcg rejects spans off token boundaries") {
  // the oracle enumerates every boundary-aligned span of "hello world"
  const auto valid = oracle::boundary_spans("hello world");
  CHECK(std::find(valid.begin(), valid.end(), std::pair<std::size_t, std::size_t>{3, 8}) == valid.end());
  CHECK_THROWS_AS(parse_fcg("hello world\t3:8\n"), ParseError);
  try {
    parse_fcg("hello world\t3:8\n");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("lo wo") != std::string::npos);
    CHECK(e.line() == 1);
  }
}

TEST_CASE("span validity agrees with the brute-force boundary enumerator") {
  const std::vector<std::string> sentences = {"hello world", "a", "a b c", "go at school .", "x yy zzz"};
  for (const auto& s : sentences) {
    const auto valid = oracle::boundary_spans(s);
    for (std::size_t a = 0; a <= s.size(); ++a) {
      for (std::size_t b = 0; b <= s.size() + 1; ++b) {
        const bool expect = std::find(valid.begin(), valid.end(), std::pair{a, b}) != valid.end();
        const auto row = s + "\t" + std::to_string(a) + ":" + std::to_string(b) + "\n";
        bool ok = true;
        try {
          parse_fcg(row);
        } catch (const ParseError&) {
          ok = false;
        }
        CHECK_MESSAGE(ok == expect, row);
      }
    }
  }
}

TEST_CASE("parse_fcg error paths") {
  CHECK_THROWS_AS(parse_fcg("a b\t0-1\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t:1\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t0:9\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t1:1\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t0:1\tc\td\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t0:1\n", ParseOptions{true}), ParseError);
  CHECK_THROWS_AS(parse_fcg("\xEF\xBB\xBF" "a b\t0:1\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t0:1\r\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg(" a b\t1:2\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a  b\t0:1\n"), ParseError);
  CHECK_THROWS_AS(parse_fcg("a b\t0:1\n\nc d\t0:1\n"), ParseError);
  try {
    parse_fcg("a b\t0:1\nc d\t0:x\n", ParseOptions{false, false, "f.tsv"});
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.source() == "f.tsv");
  }
}

TEST_CASE("empty comment field normalizes to absent") {
  const auto c = parse_fcg("a b\t0:1\t\n", ParseOptions{true});
  CHECK_FALSE(c.samples[0].reference_comment);
}

TEST_CASE("offsets count code points, not bytes") {
  // "café" is 4 characters but 5 bytes
  const auto c = parse_fcg("un café noir\t3:7\n");
  CHECK(span_text(c.samples[0].sentence, c.samples[0].span) == "café");
  CHECK(mark_span(c.samples[0]) == "un *** café *** noir");
  CHECK_THROWS_AS(parse_fcg("un caf\xC3 noir\t0:2\n"), ParseError);
}

TEST_CASE("snap widens spans outward and records it") {
  const auto c = parse_fcg("hello world\t3:8\n", ParseOptions{false, true});
  CHECK(c.samples[0].span == Span{0, 11});
  CHECK(c.samples[0].snapped);
  const auto d = parse_fcg("aa bb cc\t2:4\n", ParseOptions{false, true});
  CHECK(d.samples[0].span == Span{0, 5});
  const auto e = parse_fcg("aa bb cc\t3:5\n", ParseOptions{false, true});
  CHECK(e.samples[0].span == Span{3, 5});
  CHECK_FALSE(e.samples[0].snapped);
}

TEST_CASE("a sentence may recur with different spans") {
  const auto c = parse_fcg("a b c\t0:1\na b c\t4:5\n");
  CHECK(c.samples.size() == 2);
  CHECK(c.samples[0].id != c.samples[1].id);
}

TEST_CASE("mark_span examples") {
  CHECK(mark_span(kExample, Span{37, 48}) ==
        "And we can put posters to remind the *** smokers the *** risks they are taking .");
  CHECK(mark_span("a b", Span{0, 1}) == "*** a *** b");
  CHECK(mark_span("x y z", Span{2, 3}, "{") == "x { y { z");
  CHECK(mark_span("a b", Span{2, 3}) == "a *** b ***");
  CHECK_THROWS_AS(mark_span("a *** b", Span{0, 1}), Error);
  CHECK_THROWS_AS(mark_span("a b", Span{0, 1}, "two words"), Error);
}

TEST_CASE("unmark_span examples") {
  const auto u = unmark_span("*** a *** b");
  CHECK(u.sentence == "a b");
  CHECK(u.span == Span{0, 1});
  const auto ex = unmark_span("And we can put posters to remind the *** smokers the *** risks they are taking .");
  CHECK(ex.sentence == kExample);
  CHECK(ex.span == Span{37, 48});
  CHECK_THROWS_AS(unmark_span("a *** b"), Error);
  CHECK_THROWS_AS(unmark_span("a b"), Error);
  CHECK_THROWS_AS(unmark_span("*** a *** b ***"), Error);
  CHECK_THROWS_AS(unmark_span("a *** *** b"), Error);
}

TEST_CASE("serialize_fcg") {
  CHECK(serialize_fcg(Corpus{}) == "");
  Corpus one;
  one.samples.push_back(Sample{"x:1", "a b", Span{2, 3}, "ok", std::nullopt, false});
  CHECK(serialize_fcg(one) == "a b\t2:3\tok\n");
  CHECK(serialize_fcg(one, {false}) == "a b\t2:3\n");
  one.samples[0].system_comment = "gen";
  CHECK(serialize_fcg(one, {true, CommentField::system}) == "a b\t2:3\tgen\n");
  one.samples[0].reference_comment = "bad\tcomment";
  CHECK_THROWS_AS(serialize_fcg(one), Error);
}

TEST_CASE("property: round trips on random corpora") {
  std::mt19937 rng(7);
  for (int round = 0; round < 100; ++round) {
    const bool comments = round % 2 == 0;
    const auto c = random_corpus(rng, 100, comments);
    const auto text = serialize_fcg(c, {comments});
    CHECK(parse_fcg(text, ParseOptions{comments, false, "rand.tsv", Split::train}) == c);
    CHECK(serialize_fcg(parse_fcg(text, ParseOptions{comments, false, "rand.tsv", Split::train}), {comments}) == text);
    for (const auto& s : c.samples) {
      const auto marked = mark_span(s);
      const auto toks = text::split_spaces(marked);
      CHECK(toks.size() == text::split_spaces(s.sentence).size() + 2);
      const auto u = unmark_span(marked);
      CHECK(u.sentence == s.sentence);
      CHECK(u.span == s.span);
    }
  }
}
