#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fcg/error.hpp"
#include "fcg/eval.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

using Counts = std::unordered_map<std::string, std::size_t>;

Counts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  Counts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += ' ';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

// Clipped matches and hypothesis n-gram total for one order.
std::pair<std::size_t, std::size_t> clipped(const std::vector<std::string>& hyp,
                                            const std::vector<std::string>& ref, std::size_t n) {
  const auto h = ngram_counts(hyp, n);
  const auto r = ngram_counts(ref, n);
  std::size_t match = 0;
  for (const auto& [gram, count] : h) {
    if (auto it = r.find(gram); it != r.end()) match += std::min(count, it->second);
  }
  const std::size_t total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  return {match, total};
}

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
  if (hyp_len >= ref_len) return 1.0;
  if (hyp_len == 0) return 0.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

} // namespace

BleuScore sentence_bleu(const std::vector<std::string>& hypothesis,
                        const std::vector<std::string>& reference) {
  BleuScore s;
  s.hyp_len = hypothesis.size();
  s.ref_len = reference.size();
  s.brevity_penalty = brevity_penalty(s.hyp_len, s.ref_len);
  if (hypothesis.empty()) return s;

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= kMaxBleuOrder; ++n) {
    auto [match, total] = clipped(hypothesis, reference, n);
    if (total == 0) break;
    const double p = n == 1 ? static_cast<double>(match) / static_cast<double>(total)
                            : static_cast<double>(match + 1) / static_cast<double>(total + 1);
    s.precisions.push_back(p);
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
  }
  if (zero) return s;
  s.value = s.brevity_penalty * std::exp(log_sum / static_cast<double>(s.precisions.size()));
  s.value = std::clamp(s.value, 0.0, 1.0);
  return s;
}

BleuScore corpus_bleu(
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& pairs) {
  if (pairs.empty()) throw Error("corpus BLEU over an empty list");
  std::size_t match[kMaxBleuOrder] = {};
  std::size_t total[kMaxBleuOrder] = {};
  BleuScore s;
  for (const auto& [hyp, ref] : pairs) {
    s.hyp_len += hyp.size();
    s.ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxBleuOrder; ++n) {
      auto [m, t] = clipped(hyp, ref, n);
      match[n - 1] += m;
      total[n - 1] += t;
    }
  }
  s.brevity_penalty = brevity_penalty(s.hyp_len, s.ref_len);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < kMaxBleuOrder; ++n) {
    const double p = total[n] ? static_cast<double>(match[n]) / static_cast<double>(total[n]) : 0.0;
    s.precisions.push_back(p);
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
  }
  if (!zero) s.value = std::clamp(s.brevity_penalty * std::exp(log_sum / kMaxBleuOrder), 0.0, 1.0);
  return s;
}

} // namespace fcg
