#include "fcg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fcg/error.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace {

using json = nlohmann::json;

std::unordered_map<std::string, Label> label_map(const std::vector<HumanLabel>& labels) {
  std::unordered_map<std::string, Label> out;
  for (const auto& l : labels) {
    if (!out.emplace(l.sample_id, l.label).second)
      throw Error("duplicate label for sample " + l.sample_id);
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json bleu_json(const BleuScore& b) {
  return {{"value", b.value},
          {"bleu_x100", b.value * 100.0},
          {"precisions", b.precisions},
          {"brevity_penalty", b.brevity_penalty},
          {"hyp_len", b.hyp_len},
          {"ref_len", b.ref_len}};
}

} // namespace

std::string_view to_string(Label label) {
  return label == Label::correct ? "correct" : "incorrect";
}

std::vector<HumanLabel> parse_labels(std::string_view contents, const std::string& source) {
  std::vector<HumanLabel> out;
  std::unordered_set<std::string> seen;
  const auto rows = text::lines(contents);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto fields = text::split_char(rows[i], '\t');
    if (fields.size() != 2)
      throw ParseError(source, i + 1, "expected 'sample_id TAB correct|incorrect'");
    HumanLabel l;
    l.sample_id = std::string(text::trim(fields[0]));
    const auto value = text::trim(fields[1]);
    if (value == "correct") l.label = Label::correct;
    else if (value == "incorrect") l.label = Label::incorrect;
    else throw ParseError(source, i + 1, "label must be 'correct' or 'incorrect', got '" + std::string(value) + "'");
    if (!seen.insert(l.sample_id).second)
      throw ParseError(source, i + 1, "duplicate label for sample " + l.sample_id);
    out.push_back(std::move(l));
  }
  return out;
}

F1Block task_f1(const Corpus& outputs, const std::vector<HumanLabel>& labels) {
  const auto by_id = label_map(labels);
  std::unordered_map<std::string, const Sample*> samples;
  for (const auto& s : outputs.samples) samples.emplace(s.id, &s);
  for (const auto& l : labels) {
    auto it = samples.find(l.sample_id);
    if (it == samples.end()) throw Error("label for unknown sample " + l.sample_id);
    if (!it->second->system_comment)
      throw Error("label for sample " + l.sample_id + " which has no generated output");
  }

  F1Block f;
  f.n_total = outputs.samples.size();
  for (const auto& s : outputs.samples) {
    if (!s.system_comment) continue;
    ++f.n_generated;
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw Error("generated output for sample " + s.id + " has no label");
    if (it->second == Label::correct) ++f.n_correct;
  }
  f.precision = f.n_generated ? static_cast<double>(f.n_correct) / static_cast<double>(f.n_generated) : 0.0;
  f.recall = f.n_total ? static_cast<double>(f.n_correct) / static_cast<double>(f.n_total) : 0.0;
  f.f1 = f.precision + f.recall > 0.0 ? 2.0 * f.precision * f.recall / (f.precision + f.recall) : 0.0;
  return f;
}

AgreementHistogram agreement_bins(const std::vector<LabeledScore>& scores, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw Error("bin width must lie in (0, 1]");
  AgreementHistogram h;
  h.bin_width = bin_width;
  const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width - 1e-9));
  h.bins.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    h.bins[k].lower = static_cast<double>(k) * bin_width;
    h.bins[k].upper = std::min(1.0, static_cast<double>(k + 1) * bin_width);
  }
  for (const auto& s : scores) {
    const double v = std::clamp(s.bleu, 0.0, 1.0);
    // the epsilon keeps e.g. 0.3 / 0.1 = 2.9999... in bin 3
    auto k = static_cast<std::size_t>(std::floor(v / bin_width + 1e-9));
    k = std::min(k, n_bins - 1);
    const bool ok = s.label == Label::correct;
    (ok ? h.bins[k].correct : h.bins[k].incorrect) += 1;
    ++h.n_labeled;
    if (ok && v < 0.5) ++h.correct_below_half;
    if (v > 0.6) {
      ++h.above_0_6;
      if (ok) ++h.above_0_6_correct;
    }
  }
  if (h.n_labeled)
    h.correct_below_half_fraction = static_cast<double>(h.correct_below_half) / static_cast<double>(h.n_labeled);
  if (h.above_0_6)
    h.above_0_6_correct_fraction = static_cast<double>(h.above_0_6_correct) / static_cast<double>(h.above_0_6);
  return h;
}

std::string agreement_csv(const AgreementHistogram& histogram) {
  std::string out = "bin_lower,bin_upper,correct,incorrect\n";
  for (const auto& b : histogram.bins) {
    out += fixed(b.lower, 2) + "," + fixed(b.upper, 2) + "," + std::to_string(b.correct) + "," +
           std::to_string(b.incorrect) + "\n";
  }
  return out;
}

OverlapStats overlap_stats(const Corpus& test, const Corpus& train, const std::vector<HumanLabel>* labels) {
  std::unordered_set<std::string> train_comments;
  for (const auto& s : train.samples)
    if (s.reference_comment) train_comments.emplace(text::rtrim(*s.reference_comment));

  std::unordered_map<std::string, Label> by_id;
  if (labels) by_id = label_map(*labels);

  OverlapStats o;
  o.labeled = labels != nullptr;
  o.n_test = test.samples.size();
  for (const auto& s : test.samples) {
    if (!s.reference_comment) throw Error(s.id + ": test sample has no reference comment");
    const auto ref = text::rtrim(*s.reference_comment);
    const bool exact = s.system_comment && text::rtrim(*s.system_comment) == ref;
    const bool seen = train_comments.count(std::string(ref)) != 0;
    auto it = by_id.find(s.id);
    const bool correct = it != by_id.end() && it->second == Label::correct;
    if (exact) ++o.exact_match;
    if (seen) {
      ++o.n_refs_seen;
      if (correct) ++o.n_seen_and_correct;
      if (!exact) {
        ++o.n_seen_not_exact;
        if (correct) ++o.n_seen_not_exact_correct;
      }
    }
  }
  if (o.n_test) o.exact_match_fraction = static_cast<double>(o.exact_match) / static_cast<double>(o.n_test);
  return o;
}

std::vector<CategoryRow> category_table(const std::vector<std::pair<std::string, std::string>>& assignments) {
  std::set<std::string> ids;
  std::map<std::string, std::size_t> counts;
  for (const auto& [id, category] : assignments) {
    if (!ids.insert(id).second) throw Error("duplicate category assignment for sample " + id);
    ++counts[category];
  }
  std::vector<CategoryRow> rows;
  for (const auto& [category, count] : counts)
    rows.push_back({category, count, static_cast<double>(count) / static_cast<double>(assignments.size())});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CategoryRow& a, const CategoryRow& b) { return a.count > b.count; });
  return rows;
}

std::vector<std::pair<std::string, std::string>> parse_categories(std::string_view contents,
                                                                  const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto rows = text::lines(contents);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto fields = text::split_char(rows[i], '\t');
    if (fields.size() != 2 || text::trim(fields[1]).empty())
      throw ParseError(source, i + 1, "expected 'sample_id TAB category'");
    out.emplace_back(std::string(text::trim(fields[0])), std::string(text::trim(fields[1])));
  }
  return out;
}

Corpus attach_hypotheses(const Corpus& references, const Corpus& hypotheses) {
  if (references.samples.size() != hypotheses.samples.size())
    throw Error("reference and hypothesis files have different row counts (" +
                std::to_string(references.samples.size()) + " vs " +
                std::to_string(hypotheses.samples.size()) + ")");
  Corpus out = references;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    auto& r = out.samples[i];
    const auto& h = hypotheses.samples[i];
    if (r.sentence != h.sentence || r.span != h.span)
      throw Error(h.id + ": hypothesis row does not match reference row " + r.id);
    r.system_comment = h.reference_comment;
  }
  return out;
}

EvalReport build_report(const ReportInputs& in) {
  if (!in.outputs) throw Error("report needs an output corpus");
  const Corpus& outputs = *in.outputs;
  if (outputs.samples.empty()) throw Error("report over an empty corpus");

  EvalReport r;
  r.name = in.name;
  r.n_samples = outputs.samples.size();

  std::unordered_map<std::string, Label> by_id;
  if (in.labels) by_id = label_map(*in.labels);

  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
  std::vector<LabeledScore> labeled;
  double sum = 0.0;
  for (const auto& s : outputs.samples) {
    if (!s.reference_comment) throw Error(s.id + ": sample has no reference comment to score against");
    auto ref = text::split_ws(*s.reference_comment);
    auto hyp = s.system_comment ? text::split_ws(*s.system_comment) : std::vector<std::string>{};
    SampleScore ss;
    ss.sample_id = s.id;
    ss.generated = s.system_comment.has_value();
    ss.bleu = sentence_bleu(hyp, ref).value;
    if (auto it = by_id.find(s.id); it != by_id.end()) {
      ss.label = it->second;
      labeled.push_back({s.id, ss.bleu, it->second});
    }
    if (ss.generated) ++r.n_generated;
    sum += ss.bleu;
    pairs.emplace_back(std::move(hyp), std::move(ref));
    r.per_sample.push_back(std::move(ss));
  }
  r.corpus_bleu = corpus_bleu(pairs);
  r.mean_sentence_bleu = sum / static_cast<double>(outputs.samples.size());

  if (in.labels) {
    r.f1 = task_f1(outputs, *in.labels);
    r.agreement = agreement_bins(labeled, in.bin_width);
  }
  if (in.train) r.overlap = overlap_stats(outputs, *in.train, in.labels);
  if (in.categories) r.categories = category_table(*in.categories);
  return r;
}

std::string report_json(const std::vector<EvalReport>& reports) {
  json all = json::array();
  for (const auto& r : reports) {
    json j;
    j["name"] = r.name;
    j["n_samples"] = r.n_samples;
    j["n_generated"] = r.n_generated;
    j["corpus_bleu"] = bleu_json(r.corpus_bleu);
    j["mean_sentence_bleu"] = r.mean_sentence_bleu;
    json per = json::array();
    for (const auto& s : r.per_sample) {
      json e = {{"id", s.sample_id}, {"sentence_bleu", s.bleu}, {"generated", s.generated}};
      e["label"] = s.label ? json(std::string(to_string(*s.label))) : json(nullptr);
      per.push_back(std::move(e));
    }
    j["per_sample"] = std::move(per);
    if (r.f1) {
      j["f1"] = {{"precision", r.f1->precision}, {"recall", r.f1->recall}, {"f1", r.f1->f1},
                 {"n_generated", r.f1->n_generated}, {"n_correct", r.f1->n_correct},
                 {"n_total", r.f1->n_total}};
    }
    if (r.agreement) {
      const auto& a = *r.agreement;
      json bins = json::array();
      for (const auto& b : a.bins)
        bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"correct", b.correct}, {"incorrect", b.incorrect}});
      j["agreement"] = {{"bin_width", a.bin_width},
                        {"bins", std::move(bins)},
                        {"n_labeled", a.n_labeled},
                        {"correct_below_0_5", a.correct_below_half},
                        {"correct_below_0_5_fraction", a.correct_below_half_fraction},
                        {"above_0_6", a.above_0_6},
                        {"above_0_6_correct", a.above_0_6_correct},
                        {"above_0_6_correct_fraction", a.above_0_6_correct_fraction}};
    }
    if (r.overlap) {
      const auto& o = *r.overlap;
      j["exact_match"] = {{"count", o.exact_match}, {"fraction", o.exact_match_fraction}};
      j["seen_in_training"] = {{"n_refs_seen", o.n_refs_seen},
                               {"n_seen_and_correct", o.labeled ? json(o.n_seen_and_correct) : json(nullptr)},
                               {"n_seen_not_exact", o.n_seen_not_exact},
                               {"n_seen_not_exact_correct",
                                o.labeled ? json(o.n_seen_not_exact_correct) : json(nullptr)}};
    }
    if (!r.categories.empty()) {
      json cats = json::array();
      for (const auto& c : r.categories)
        cats.push_back({{"category", c.category}, {"count", c.count}, {"fraction", c.fraction}});
      j["categories"] = std::move(cats);
    }
    all.push_back(std::move(j));
  }
  return json{{"reports", std::move(all)}}.dump(2) + "\n";
}

std::string report_table(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "split      samples  generated  corpus BLEU  mean sent BLEU\n";
  for (const auto& r : reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %7zu  %9zu  %11.2f  %14.2f\n", r.name.c_str(), r.n_samples,
                  r.n_generated, r.corpus_bleu.value * 100.0, r.mean_sentence_bleu * 100.0);
    os << line;
  }
  for (const auto& r : reports) {
    if (r.f1) {
      os << "\n[" << r.name << "] human evaluation: P=" << fixed(r.f1->precision * 100, 2)
         << " R=" << fixed(r.f1->recall * 100, 2) << " F1=" << fixed(r.f1->f1 * 100, 2) << " ("
         << r.f1->n_correct << " correct / " << r.f1->n_generated << " generated / " << r.f1->n_total
         << " total)\n";
    }
    if (r.agreement) {
      const auto& a = *r.agreement;
      os << "[" << r.name << "] BLEU vs human label:\n";
      for (const auto& b : a.bins)
        os << "  [" << fixed(b.lower, 2) << ", " << fixed(b.upper, 2) << ")  correct " << b.correct
           << "  incorrect " << b.incorrect << "\n";
      os << "  correct with BLEU < 0.5: " << a.correct_below_half << " ("
         << fixed(a.correct_below_half_fraction * 100, 1) << "% of labeled)\n";
      os << "  BLEU > 0.6 labeled correct: " << a.above_0_6_correct << "/" << a.above_0_6 << " ("
         << fixed(a.above_0_6_correct_fraction * 100, 1) << "%)\n";
    }
    if (r.overlap) {
      const auto& o = *r.overlap;
      os << "[" << r.name << "] exact match: " << o.exact_match << "/" << o.n_test << " ("
         << fixed(o.exact_match_fraction * 100, 1) << "%); references seen in training: " << o.n_refs_seen;
      if (o.labeled) os << " (" << o.n_seen_and_correct << " answered correctly)";
      os << "; seen but not exact: " << o.n_seen_not_exact;
      if (o.labeled) os << " (" << o.n_seen_not_exact_correct << " correct)";
      os << "\n";
    }
    if (!r.categories.empty()) {
      os << "[" << r.name << "] error categories:\n";
      for (const auto& c : r.categories)
        os << "  " << c.category << ": " << c.count << " (" << fixed(c.fraction * 100, 1) << "%)\n";
    }
  }
  return os.str();
}

} // namespace fcg
