#include "fcg/augment.hpp"

#include <algorithm>

#include <json.hpp>

#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

using json = nlohmann::json;

json edit_to_json(const Edit& e) {
  json j = {{"src", {e.src.start, e.src.end}},
            {"tgt", {e.tgt.start, e.tgt.end}},
            {"src_tokens", e.src_tokens},
            {"tgt_tokens", e.tgt_tokens}};
  if (e.raw_type) j["raw_type"] = *e.raw_type;
  if (e.type) j["type"] = std::string(to_string(*e.type));
  return j;
}

Edit edit_from_json(const json& j) {
  Edit e;
  e.src = TokenRange{j.at("src").at(0).get<std::size_t>(), j.at("src").at(1).get<std::size_t>()};
  e.tgt = TokenRange{j.at("tgt").at(0).get<std::size_t>(), j.at("tgt").at(1).get<std::size_t>()};
  e.src_tokens = j.at("src_tokens").get<std::vector<std::string>>();
  e.tgt_tokens = j.at("tgt_tokens").get<std::vector<std::string>>();
  if (j.contains("raw_type")) e.raw_type = j["raw_type"].get<std::string>();
  if (j.contains("type")) e.type = parse_error_type(j["type"].get<std::string>());
  return e;
}

template <typename F>
auto parse_jsonl(std::string_view contents, const std::string& source, F&& per_line) {
  const auto rows = text::lines(contents);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    try {
      per_line(json::parse(rows[i]));
    } catch (const json::exception& e) {
      throw ParseError(source, i + 1, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
}

} // namespace

std::vector<Candidate> edits_to_spans(const ParallelPair& pair, const std::vector<Edit>& prep_edits,
                                      const SpanOptions& options) {
  const auto& tokens = pair.source_tokens;
  std::vector<Candidate> out;
  out.reserve(prep_edits.size());
  for (const auto& e : prep_edits) {
    if (!e.type || !is_preposition_type(*e.type))
      throw Error(pair.origin + ": edit is not typed as a preposition error");
    if (tokens.empty()) throw Error(pair.origin + ": cannot place a span in an empty sentence");
    if (e.src.end > tokens.size()) throw Error(pair.origin + ": edit range out of bounds");

    std::size_t first = e.src.start;
    std::size_t last = e.src.end;
    if (e.src.empty()) {
      first = e.src.start >= options.missing_window ? e.src.start - options.missing_window : 0;
      last = std::min(tokens.size(), e.src.start + options.missing_window);
      if (first >= last) {
        // window of 0: fall back to the nearest neighbouring token
        first = e.src.start < tokens.size() ? e.src.start : tokens.size() - 1;
        last = first + 1;
      }
    }
    Candidate c;
    c.origin = pair.origin;
    c.sentence = text::join(tokens);
    c.span = token_span(tokens, first, last);
    c.edit = e;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> candidates_from(const std::vector<PrepSelection>& selections,
                                       const SpanOptions& options) {
  std::vector<Candidate> out;
  for (const auto& sel : selections) {
    auto cs = edits_to_spans(sel.pair, sel.edits, options);
    out.insert(out.end(), std::make_move_iterator(cs.begin()), std::make_move_iterator(cs.end()));
  }
  return out;
}

std::vector<PseudoSample> build_pseudo(const std::vector<Candidate>& candidates,
                                       const Generator& generator, const PseudoOptions& options) {
  const std::string tag = options.regime_tag.value_or(options.cap ? "balanced" : "unbalanced");
  std::vector<PseudoSample> out;
  for (const auto& c : candidates) {
    if (options.cap && out.size() >= *options.cap) break;
    Sample query;
    query.id = c.origin;
    query.sentence = c.sentence;
    query.span = c.span;
    std::optional<std::string> comment;
    try {
      validate_sentence(c.sentence);
      validate_span(c.sentence, c.span);
      comment = generator.generate(query);
    } catch (const std::exception& e) {
      throw GeneratorError(c.origin + " (" + to_string(c.span) + "): " + e.what());
    }
    if (!comment || comment->empty()) continue;

    PseudoSample p;
    p.sample.id = options.output_name + ":" + std::to_string(out.size() + 1);
    p.sample.sentence = c.sentence;
    p.sample.span = c.span;
    p.sample.reference_comment = std::move(comment);
    p.provenance = Provenance{options.source_corpus, c.origin, c.edit, generator.id(), tag};
    out.push_back(std::move(p));
  }
  return out;
}

Corpus pseudo_corpus(const std::vector<PseudoSample>& pseudo) {
  Corpus c;
  c.split = Split::pseudo;
  c.samples.reserve(pseudo.size());
  for (const auto& p : pseudo) c.samples.push_back(p.sample);
  return c;
}

std::string serialize_provenance(const std::vector<PseudoSample>& pseudo) {
  std::string out;
  for (const auto& p : pseudo) {
    const json j = {{"sample_id", p.sample.id},
                    {"source_corpus", p.provenance.source_corpus},
                    {"origin", p.provenance.origin},
                    {"edit", edit_to_json(p.provenance.edit)},
                    {"generator_id", p.provenance.generator_id},
                    {"regime_tag", p.provenance.regime_tag}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<std::string, Provenance>> parse_provenance(std::string_view jsonl,
                                                                 const std::string& source) {
  std::vector<std::pair<std::string, Provenance>> out;
  parse_jsonl(jsonl, source, [&](const json& j) {
    Provenance p{j.at("source_corpus").get<std::string>(), j.at("origin").get<std::string>(),
                 edit_from_json(j.at("edit")), j.at("generator_id").get<std::string>(),
                 j.at("regime_tag").get<std::string>()};
    out.emplace_back(j.at("sample_id").get<std::string>(), std::move(p));
  });
  return out;
}

std::string serialize_candidates(const std::vector<Candidate>& candidates) {
  std::string out;
  for (const auto& c : candidates) {
    const json j = {{"origin", c.origin},
                    {"sentence", c.sentence},
                    {"span", to_string(c.span)},
                    {"edit", edit_to_json(c.edit)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Candidate> parse_candidates(std::string_view jsonl, const std::string& source) {
  std::vector<Candidate> out;
  parse_jsonl(jsonl, source, [&](const json& j) {
    Candidate c;
    c.origin = j.at("origin").get<std::string>();
    c.sentence = j.at("sentence").get<std::string>();
    const auto span = j.at("span").get<std::string>();
    const auto colon = span.find(':');
    if (colon == std::string::npos) throw Error("malformed span '" + span + "'");
    try {
      c.span = Span{std::stoul(span.substr(0, colon)), std::stoul(span.substr(colon + 1))};
    } catch (const std::logic_error&) {
      throw Error("malformed span '" + span + "'");
    }
    validate_sentence(c.sentence);
    validate_span(c.sentence, c.span);
    c.edit = edit_from_json(j.at("edit"));
    out.push_back(std::move(c));
  });
  return out;
}

Regimes make_regimes(const Corpus& pseudo, const Corpus& gold) {
  Regimes r;
  if (pseudo.samples.empty()) {
    r.combined.push_back(Dataset{"gold", gold, kGoldPriority});
    r.multistage.push_back(Dataset{"gold", gold, kGoldPriority});
    return r;
  }
  Corpus merged;
  merged.split = Split::other;
  merged.samples = pseudo.samples;
  merged.samples.insert(merged.samples.end(), gold.samples.begin(), gold.samples.end());
  r.combined.push_back(Dataset{"pseudo+gold", std::move(merged), kGoldPriority});
  r.multistage.push_back(Dataset{"pseudo", pseudo, kPseudoPriority});
  r.multistage.push_back(Dataset{"gold", gold, kGoldPriority});
  return r;
}

} // namespace fcg
