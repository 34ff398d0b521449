#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "fcg/error.hpp"
#include "fcg/eval.hpp"
#include "fcg/text.hpp"
#include "../support/oracles.hpp"

using namespace fcg;

namespace {

std::vector<std::string> toks(const std::string& s) { return text::split_ws(s); }

Sample out(const std::string& id, std::optional<std::string> ref, std::optional<std::string> sys) {
  return Sample{id, "a b", {0, 1}, std::move(ref), std::move(sys), false};
}

Corpus outputs(std::size_t total, std::size_t generated) {
  Corpus c;
  for (std::size_t i = 0; i < total; ++i)
    c.samples.push_back(out("s" + std::to_string(i), "ref", i < generated ? std::optional<std::string>("sys") : std::nullopt));
  return c;
}

std::vector<HumanLabel> labels(std::size_t generated, std::size_t correct) {
  std::vector<HumanLabel> l;
  for (std::size_t i = 0; i < generated; ++i)
    l.push_back({"s" + std::to_string(i), i < correct ? Label::correct : Label::incorrect});
  return l;
}

} // namespace

TEST_CASE("sentence_bleu examples") {
  CHECK(sentence_bleu(toks("a b c d e"), toks("a b c d e")).value == doctest::Approx(1.0));
  CHECK(sentence_bleu({}, toks("a b")).value == 0.0);
  const auto s = sentence_bleu(toks("the cat sat"), toks("the cat sat down"));
  CHECK(s.value == doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-12));
  CHECK(s.value == doctest::Approx(0.7165).epsilon(1e-4));
  CHECK(s.precisions.size() == 3);
  CHECK(s.brevity_penalty == doctest::Approx(std::exp(-1.0 / 3.0)));
  CHECK(s.hyp_len == 3);
  CHECK(s.ref_len == 4);
  CHECK(sentence_bleu(toks("x y"), toks("a b")).value == 0.0);
}

TEST_CASE("sentence_bleu agrees with the brute-force oracle") {
  std::mt19937 rng(3);
  const std::vector<std::string> alphabet = {"a", "b", "c", "the", "<<at>>"};
  for (int i = 0; i < 2000; ++i) {
    const auto h = oracle::random_tokens(rng, 8, alphabet);
    const auto r = oracle::random_tokens(rng, 8, alphabet);
    const auto got = sentence_bleu(h, r).value;
    CHECK(got == doctest::Approx(oracle::sentence_bleu(h, r)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("sentence_bleu grows towards 1 as the hypothesis completes the reference") {
  const auto ref = toks("Use the <preposition> 'to' instead of <<at>> .");
  double prev = 0.0;
  for (std::size_t n = 1; n <= ref.size(); ++n) {
    const std::vector<std::string> hyp(ref.begin(), ref.begin() + static_cast<long>(n));
    const double v = sentence_bleu(hyp, ref).value;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("corpus_bleu") {
  using Pairs = std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>;
  CHECK_THROWS_AS(corpus_bleu(Pairs{}), Error);
  const Pairs same = {{toks("a b c d"), toks("a b c d")}, {toks("e f g h i"), toks("e f g h i")}};
  CHECK(corpus_bleu(same).value == doctest::Approx(1.0));
  const Pairs two = {{toks("the cat sat on the mat"), toks("the cat is on the mat")},
                     {toks("a dog ran in the park today"), toks("the dog ran in a park")}};
  CHECK(corpus_bleu(two).value == doctest::Approx(oracle::corpus_bleu(two)).epsilon(1e-12));
  Pairs tripled;
  for (int i = 0; i < 3; ++i) tripled.push_back(two[0]);
  CHECK(corpus_bleu(tripled).value == doctest::Approx(corpus_bleu({two[0]}).value).epsilon(1e-12));

  std::mt19937 rng(9);
  const std::vector<std::string> alphabet = {"a", "b", "c"};
  for (int i = 0; i < 200; ++i) {
    Pairs p;
    for (int k = 0; k < 5; ++k)
      p.push_back({oracle::random_tokens(rng, 8, alphabet), oracle::random_tokens(rng, 8, alphabet)});
    bool any = false;
    for (auto& [h, r] : p) any |= !h.empty();
    if (!any) continue;
    CHECK(corpus_bleu(p).value == doctest::Approx(oracle::corpus_bleu(p)).epsilon(1e-12));
  }
}

TEST_CASE("task_f1 examples") {
  auto all = task_f1(outputs(10, 10), labels(10, 10));
  CHECK(all.precision == 1.0);
  CHECK(all.recall == 1.0);
  CHECK(all.f1 == 1.0);

  auto part = task_f1(outputs(10, 8), labels(8, 6));
  CHECK(part.precision == doctest::Approx(0.75));
  CHECK(part.recall == doctest::Approx(0.6));
  CHECK(part.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(part.f1 == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(part.n_generated == 8);
  CHECK(part.n_correct == 6);
  CHECK(part.n_total == 10);

  auto none = task_f1(outputs(10, 0), {});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  auto same = task_f1(outputs(7, 7), labels(7, 3));
  CHECK(same.precision == same.recall);
  CHECK(same.f1 == doctest::Approx(same.precision));
}

TEST_CASE("task_f1 errors") {
  CHECK_THROWS_AS(task_f1(outputs(3, 2), labels(3, 3)), Error);  // label on abstained
  CHECK_THROWS_AS(task_f1(outputs(3, 3), labels(2, 2)), Error);  // unlabeled output
  auto unknown = labels(3, 3);
  unknown.push_back({"nope", Label::correct});
  CHECK_THROWS_AS(task_f1(outputs(3, 3), unknown), Error);
}

TEST_CASE("parse_labels") {
  const auto l = parse_labels("a:1\tcorrect\na:2\tincorrect\n");
  REQUIRE(l.size() == 2);
  CHECK(l[1].label == Label::incorrect);
  CHECK_THROWS_AS(parse_labels("a:1\tcorrect\na:1\tincorrect\n"), ParseError);
  CHECK_THROWS_AS(parse_labels("a:1\tmaybe\n"), ParseError);
  CHECK_THROWS_AS(parse_labels("a:1\n"), ParseError);
}

TEST_CASE("agreement_bins hand tally") {
  const std::vector<LabeledScore> s = {
      {"a", 0.05, Label::incorrect}, {"b", 0.45, Label::correct}, {"c", 0.65, Label::correct}, {"d", 1.0, Label::correct}};
  const auto h = agreement_bins(s);
  REQUIRE(h.bins.size() == 10);
  CHECK(h.bins[0].incorrect == 1);
  CHECK(h.bins[4].correct == 1);
  CHECK(h.bins[6].correct == 1);
  CHECK(h.bins[9].correct == 1);
  std::size_t mass = 0;
  for (const auto& b : h.bins) mass += b.correct + b.incorrect;
  CHECK(mass == 4);
  CHECK(h.n_labeled == 4);
  CHECK(h.correct_below_half == 1);
  CHECK(h.correct_below_half_fraction == doctest::Approx(0.25));
  CHECK(h.above_0_6 == 2);
  CHECK(h.above_0_6_correct_fraction == doctest::Approx(1.0));
  // 0.3 is exactly on a bin edge despite floating point
  CHECK(agreement_bins({{"x", 0.3, Label::correct}}).bins[3].correct == 1);

  const auto top = agreement_bins({{"x", 1.0, Label::correct}, {"y", 1.0, Label::correct}});
  std::size_t used = 0;
  for (const auto& b : top.bins) used += (b.correct + b.incorrect) > 0;
  CHECK(used == 1);

  const auto csv = agreement_csv(h);
  CHECK(csv.rfind("bin_lower,bin_upper,correct,incorrect\n", 0) == 0);
  CHECK(text::lines(csv).size() == 11);
}

TEST_CASE("overlap_stats") {
  Corpus train;
  train.samples = {out("t:1", "seen comment", std::nullopt), out("t:2", "other", std::nullopt)};
  Corpus test;
  test.samples = {out("x:1", "seen comment", "seen comment "), out("x:2", "seen comment", "different"),
                  out("x:3", "novel", "novel"), out("x:4", "novel two", std::nullopt)};
  const std::vector<HumanLabel> l = {{"x:1", Label::correct}, {"x:2", Label::correct}, {"x:3", Label::incorrect}};
  const auto s = overlap_stats(test, train, &l);
  CHECK(s.n_test == 4);
  CHECK(s.exact_match == 2);
  CHECK(s.exact_match_fraction == doctest::Approx(0.5));
  CHECK(s.n_refs_seen == 2);
  CHECK(s.n_seen_and_correct == 2);
  CHECK(s.n_seen_not_exact == 1);
  CHECK(s.n_seen_not_exact_correct == 1);
  CHECK(s.labeled);

  Corpus disjoint;
  disjoint.samples = {out("t:9", "unrelated", std::nullopt)};
  CHECK(overlap_stats(test, disjoint).n_refs_seen == 0);
  Corpus missing;
  missing.samples = {out("m:1", std::nullopt, "x")};
  CHECK_THROWS_AS(overlap_stats(missing, train), Error);
}

TEST_CASE("category_table") {
  const auto t = category_table({{"a", "X"}, {"b", "X"}, {"c", "Y"}});
  REQUIRE(t.size() == 2);
  CHECK(t[0].category == "X");
  CHECK(t[0].count == 2);
  CHECK(t[0].fraction == doctest::Approx(2.0 / 3));
  CHECK(t[1].fraction == doctest::Approx(1.0 / 3));
  CHECK(category_table({}).empty());
  const auto ties = category_table({{"a", "B"}, {"b", "A"}});
  CHECK(ties[0].category == "A");
  CHECK_THROWS_AS(category_table({{"a", "X"}, {"a", "Y"}}), Error);
  const auto parsed = parse_categories("s:1\tCompletely incorrect comment\ns:2\tOther\n");
  CHECK(parsed.size() == 2);
  CHECK(parsed[0].second == "Completely incorrect comment");
}

TEST_CASE("build_report and serializations") {
  Corpus c;
  c.samples = {out("s:1", "use to here .", "use to here ."), out("s:2", "use at here .", std::nullopt),
               out("s:3", "a b c d", "a b x d")};
  const std::vector<HumanLabel> l = {{"s:1", Label::correct}, {"s:3", Label::incorrect}};
  ReportInputs in;
  in.name = "test";
  in.outputs = &c;
  in.labels = &l;
  const auto r = build_report(in);
  CHECK(r.n_samples == 3);
  CHECK(r.n_generated == 2);
  CHECK(r.per_sample[1].bleu == 0.0);
  CHECK(r.per_sample[0].bleu == doctest::Approx(1.0));
  CHECK(r.mean_sentence_bleu ==
        doctest::Approx((1.0 + sentence_bleu(toks("a b x d"), toks("a b c d")).value) / 3));
  REQUIRE(r.f1);
  CHECK(r.f1->precision == doctest::Approx(0.5));
  REQUIRE(r.agreement);
  CHECK(r.agreement->n_labeled == 2);

  const auto j = nlohmann::json::parse(report_json({r}));
  CHECK(j["reports"][0]["name"] == "test");
  CHECK(report_table({r}).find("test") != std::string::npos);
}

TEST_CASE("attach_hypotheses") {
  Corpus refs;
  refs.samples = {out("r:1", "ref", std::nullopt)};
  Corpus hyps;
  hyps.samples = {out("h:1", "generated", std::nullopt)};
  const auto joined = attach_hypotheses(refs, hyps);
  CHECK(joined.samples[0].system_comment == "generated");
  CHECK(joined.samples[0].reference_comment == "ref");
  Corpus shifted = hyps;
  shifted.samples[0].span = {2, 3};
  CHECK_THROWS_AS(attach_hypotheses(refs, shifted), Error);
  CHECK_THROWS_AS(attach_hypotheses(refs, Corpus{}), Error);
}
