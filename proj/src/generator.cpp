#include "fcg/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <thread>

#include <json.hpp>

#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

using json = nlohmann::json;

constexpr std::string_view kIndexFormat = "fcg-retrieval-index";
constexpr int kIndexVersion = 1;

// Unigrams and space-joined bigrams; tokens never contain spaces.
std::vector<std::string> ngram_terms(const std::vector<std::string>& tokens) {
  std::vector<std::string> terms;
  terms.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    terms.push_back(tokens[i]);
    if (i + 1 < tokens.size()) terms.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return terms;
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

RetrievalModel::RetrievalModel(std::vector<TrainEntry> entries, RetrievalOptions options)
    : entries_(std::move(entries)), options_(std::move(options)) {
  if (entries_.empty()) throw Error("retrieval index is empty");
  if (!(options_.abstain_threshold >= 0.0 && options_.abstain_threshold <= 1.0))
    throw Error("abstain threshold must lie in [0, 1]");

  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(h, options_.marker);
  std::vector<std::map<std::size_t, std::size_t>> counts(entries_.size());
  for (std::size_t d = 0; d < entries_.size(); ++d) {
    auto& e = entries_[d];
    e.ordinal = d;
    if (e.comment.empty()) throw Error(e.sample_id + ": empty comment in training entry");
    for (const auto& term : ngram_terms(e.marked_tokens)) {
      auto [it, inserted] = vocabulary_.emplace(term, vocabulary_.size());
      if (inserted) document_frequency_.push_back(0);
      if (counts[d][it->second]++ == 0) ++document_frequency_[it->second];
    }
    const auto joined = text::join(e.marked_tokens);
    exact_[joined].push_back(d);
    h = fnv1a(h, joined);
    h = fnv1a(h, "\t" + e.comment + "\t" + std::to_string(e.priority) + "\n");
  }

  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  id_ = "retrieval-" + std::string(buf);

  postings_.resize(vocabulary_.size());
  documents_.resize(entries_.size());
  for (std::size_t d = 0; d < entries_.size(); ++d) {
    auto& doc = documents_[d];
    double sq = 0.0;
    for (const auto& [term, tf] : counts[d]) {
      const double w = static_cast<double>(tf) * idf(document_frequency_[term]);
      doc.terms.emplace_back(term, w);
      postings_[term].emplace_back(d, w);
      sq += w * w;
    }
    doc.norm = std::sqrt(sq);
  }
}

double RetrievalModel::idf(std::size_t df) const {
  const double n = static_cast<double>(entries_.size());
  return std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0;
}

RetrievalModel::Weighted RetrievalModel::weigh_query(const std::vector<std::string>& tokens) const {
  std::map<std::size_t, std::size_t> known;
  std::map<std::string, std::size_t> unknown;
  for (const auto& term : ngram_terms(tokens)) {
    if (auto it = vocabulary_.find(term); it != vocabulary_.end())
      ++known[it->second];
    else
      ++unknown[term];
  }
  Weighted q;
  double sq = 0.0;
  for (const auto& [term, tf] : known) {
    const double w = static_cast<double>(tf) * idf(document_frequency_[term]);
    q.terms.emplace_back(term, w);
    sq += w * w;
  }
  for (const auto& [term, tf] : unknown) {
    const double w = static_cast<double>(tf) * idf(0);
    sq += w * w;
  }
  q.norm = std::sqrt(sq);
  return q;
}

double RetrievalModel::similarity(const std::vector<std::string>& marked_tokens,
                                  std::size_t entry) const {
  if (entry >= entries_.size()) throw Error("entry index out of range");
  if (entries_[entry].marked_tokens == marked_tokens) return 1.0;
  const auto q = weigh_query(marked_tokens);
  const auto& doc = documents_[entry];
  if (q.norm == 0.0 || doc.norm == 0.0) return 0.0;
  double dot = 0.0;
  auto a = q.terms.begin();
  auto b = doc.terms.begin();
  while (a != q.terms.end() && b != doc.terms.end()) {
    if (a->first < b->first) ++a;
    else if (b->first < a->first) ++b;
    else {
      dot += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return std::clamp(dot / (q.norm * doc.norm), 0.0, 1.0);
}

RetrievalModel::Match RetrievalModel::best_match(const std::vector<std::string>& marked_tokens) const {
  const auto q = weigh_query(marked_tokens);
  std::vector<double> scores(entries_.size(), 0.0);
  for (const auto& [term, w] : q.terms)
    for (const auto& [d, dw] : postings_[term]) scores[d] += w * dw;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    const double denom = q.norm * documents_[d].norm;
    scores[d] = denom > 0.0 ? std::clamp(scores[d] / denom, 0.0, 1.0) : 0.0;
  }
  if (auto it = exact_.find(text::join(marked_tokens)); it != exact_.end())
    for (std::size_t d : it->second) scores[d] = 1.0;

  Match best{0, scores[0]};
  for (std::size_t d = 1; d < scores.size(); ++d) {
    const auto& cur = entries_[d];
    const auto& top = entries_[best.entry];
    if (scores[d] > best.similarity ||
        (scores[d] == best.similarity && cur.priority > top.priority)) {
      best = Match{d, scores[d]};
    }
    // equal similarity and priority: the lower ordinal (already held) wins
  }
  return best;
}

std::optional<std::string> RetrievalModel::generate(const Sample& sample) const {
  const auto marked = text::split_spaces(mark_span(sample, options_.marker));
  const auto m = best_match(marked);
  if (m.similarity < options_.abstain_threshold) return std::nullopt;
  return entries_[m.entry].comment;
}

std::string RetrievalModel::to_json() const {
  json j;
  j["format"] = kIndexFormat;
  j["version"] = kIndexVersion;
  j["marker"] = options_.marker;
  j["abstain_threshold"] = options_.abstain_threshold;
  j["generator_id"] = id_;
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"id", e.sample_id},
                       {"marked", text::join(e.marked_tokens)},
                       {"comment", e.comment},
                       {"priority", e.priority}});
  }
  j["entries"] = std::move(entries);
  return j.dump(1) + "\n";
}

RetrievalModel RetrievalModel::from_json(std::string_view contents, const std::string& source) {
  json j;
  try {
    j = json::parse(contents);
    if (j.at("format").get<std::string>() != kIndexFormat)
      throw ParseError(source, 0, "not a retrieval index");
    if (j.at("version").get<int>() != kIndexVersion)
      throw ParseError(source, 0, "unsupported index version");
    RetrievalOptions options;
    options.marker = j.at("marker").get<std::string>();
    options.abstain_threshold = j.at("abstain_threshold").get<double>();
    std::vector<TrainEntry> entries;
    for (const auto& e : j.at("entries")) {
      TrainEntry t;
      t.sample_id = e.at("id").get<std::string>();
      t.marked_tokens = text::split_spaces(e.at("marked").get<std::string>());
      t.comment = e.at("comment").get<std::string>();
      t.priority = e.at("priority").get<int>();
      entries.push_back(std::move(t));
    }
    return RetrievalModel(std::move(entries), std::move(options));
  } catch (const json::exception& e) {
    throw ParseError(source, 0, std::string("invalid index: ") + e.what());
  }
}

RetrievalModel train_retrieval(const std::vector<Dataset>& datasets, const RetrievalOptions& options) {
  std::vector<TrainEntry> entries;
  for (const auto& ds : datasets) {
    for (const auto& s : ds.corpus.samples) {
      if (!s.reference_comment || s.reference_comment->empty())
        throw Error(s.id + ": training sample has no reference comment");
      TrainEntry e;
      e.sample_id = s.id;
      e.marked_tokens = text::split_spaces(mark_span(s, options.marker));
      e.comment = *s.reference_comment;
      e.priority = ds.priority;
      entries.push_back(std::move(e));
    }
  }
  return RetrievalModel(std::move(entries), options);
}

Corpus generate_batch(const Generator& generator, const Corpus& corpus, const BatchOptions& options) {
  Corpus out = corpus;
  auto run_one = [&](Sample& s) {
    try {
      s.system_comment = generator.generate(s);
    } catch (const std::exception& e) {
      throw GeneratorError(s.id + ": " + e.what());
    }
  };

  const unsigned workers = options.concurrent_safe ? std::max(1u, options.threads) : 1u;
  if (workers == 1 || out.samples.size() < 2) {
    for (auto& s : out.samples) run_one(s);
    return out;
  }

  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t n = out.samples.size();
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) run_one(out.samples[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

} // namespace fcg
