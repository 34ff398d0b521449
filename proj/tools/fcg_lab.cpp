// fcg-lab: feedback comment generation experiments on the command line.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fcg/augment.hpp"
#include "fcg/corpus.hpp"
#include "fcg/errtype.hpp"
#include "fcg/eval.hpp"
#include "fcg/extgen.hpp"
#include "fcg/gec_ingest.hpp"
#include "fcg/generator.hpp"
#include "fcg/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("fcg-lab");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("FCG_LAB_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

fcg::Corpus load(const std::string& path, bool expect_comments, bool snap = false) {
  fcg::ParseOptions opts;
  opts.expect_comments = expect_comments;
  opts.snap = snap;
  opts.source = fs::path(path).filename().string();
  return fcg::parse_fcg(fcg::read_file(path), opts);
}

// Runs one subcommand body, mapping failures to "<stage>: message" + exit 1.
template <typename F>
int guarded(const std::string& stage, F&& body) {
  try {
    body();
    return 0;
  } catch (const fcg::StageError& e) {
    spdlog::error("{}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("stage '{}': {}", stage, e.what());
  }
  return 1;
}

std::unique_ptr<fcg::Generator> open_generator(const std::string& model_path, const std::string& external,
                                               const std::string& marker, std::optional<double> threshold) {
  if (!external.empty()) {
    fcg::ExternalGenerator::Options opts;
    opts.marker = marker;
    return std::make_unique<fcg::ExternalGenerator>(fcg::Endpoint::parse(external), opts);
  }
  if (model_path.empty()) throw fcg::Error("need --model or --external");
  auto model = fcg::RetrievalModel::from_json(fcg::read_file(model_path), model_path);
  if (threshold) {
    auto opts = model.options();
    opts.abstain_threshold = *threshold;
    auto entries = model.entries();
    return std::make_unique<fcg::RetrievalModel>(std::move(entries), opts);
  }
  return std::make_unique<fcg::RetrievalModel>(std::move(model));
}

} // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"fcg-lab: feedback comment generation toolkit"};
  app.require_subcommand(1);

  // prepare
  struct {
    std::string in, out, marker = std::string(fcg::kDefaultMarker);
    bool snap = false, comments = false;
  } prep;
  auto* prepare = app.add_subcommand("prepare", "Validate an FCG TSV file and write marked sentences");
  prepare->add_option("--in", prep.in, "FCG TSV file")->required();
  prepare->add_option("--out", prep.out, "Output file (marked TAB comment); stdout if omitted");
  prepare->add_option("--marker", prep.marker, "Span marker token");
  prepare->add_flag("--snap", prep.snap, "Widen spans that cut through tokens");
  prepare->add_flag("--expect-comments", prep.comments, "Require a comment column");

  // annotate
  struct {
    std::string in, out, format = "m2", lexicon;
    int annotator = 0;
    std::size_t window = 1;
  } ann;
  auto* annotate = app.add_subcommand("annotate", "Select preposition-error sentences and locate spans");
  annotate->add_option("--in", ann.in, "Parallel corpus (M2 or TSV)")->required();
  annotate->add_option("--format", ann.format, "m2 or tsv")->check(CLI::IsMember({"m2", "tsv"}));
  annotate->add_option("--lexicon", ann.lexicon, "Preposition list (one per line)");
  annotate->add_option("--annotator", ann.annotator, "M2 annotator id");
  annotate->add_option("--window", ann.window, "Context tokens around a missing preposition");
  annotate->add_option("--out", ann.out, "Candidates JSONL")->required();

  // augment
  struct {
    std::string candidates, model, external, out, source_name = "pseudo", marker = std::string(fcg::kDefaultMarker);
    std::optional<std::size_t> cap;
    std::optional<double> threshold;
  } aug;
  auto* augment = app.add_subcommand("augment", "Self-label candidates into a pseudo corpus");
  augment->add_option("--candidates", aug.candidates, "Candidates JSONL from annotate")->required();
  augment->add_option("--model", aug.model, "Retrieval index JSON");
  augment->add_option("--external", aug.external, "External generator: command or host:port");
  augment->add_option("--marker", aug.marker, "Marker sent to an external generator");
  augment->add_option("--threshold", aug.threshold, "Override the abstention threshold");
  augment->add_option("--cap", aug.cap, "Keep at most N pseudo samples (balanced: 5000)");
  augment->add_option("--source-name", aug.source_name, "Provenance label for the source corpus");
  augment->add_option("--out", aug.out, "Output directory")->required();

  // train
  struct {
    std::string gold, pseudo, out, manifest, regime = "none", marker = std::string(fcg::kDefaultMarker);
    double threshold = 0.0;
  } tr;
  auto* train = app.add_subcommand("train", "Build a retrieval index under a training regime");
  train->add_option("--gold", tr.gold, "Gold FCG TSV with comments")->required();
  train->add_option("--pseudo", tr.pseudo, "Pseudo FCG TSV with comments");
  train->add_option("--regime", tr.regime, "none, combined or multistage")
      ->check(CLI::IsMember({"none", "combined", "multistage"}));
  train->add_option("--marker", tr.marker, "Span marker token");
  train->add_option("--threshold", tr.threshold, "Abstention threshold in [0,1]");
  train->add_option("--out", tr.out, "Index JSON")->required();

  // generate
  struct {
    std::string in, out, model, external, marker = std::string(fcg::kDefaultMarker);
    std::optional<double> threshold;
    unsigned threads = 1;
  } gen;
  auto* generate = app.add_subcommand("generate", "Generate comments for an FCG TSV file");
  generate->add_option("--in", gen.in, "FCG TSV input")->required();
  generate->add_option("--out", gen.out, "FCG TSV with generated comments")->required();
  generate->add_option("--model", gen.model, "Retrieval index JSON");
  generate->add_option("--external", gen.external, "External generator: command or host:port");
  generate->add_option("--marker", gen.marker, "Marker sent to an external generator");
  generate->add_option("--threshold", gen.threshold, "Override the abstention threshold");
  generate->add_option("--threads", gen.threads, "Worker threads (retrieval only)");

  // score
  struct {
    std::string ref, hyp, json;
  } sc;
  auto* score = app.add_subcommand("score", "BLEU of generated comments against references");
  score->add_option("--ref", sc.ref, "Reference FCG TSV")->required();
  score->add_option("--hyp", sc.hyp, "Generated FCG TSV")->required();
  score->add_option("--json", sc.json, "Also write the report as JSON");

  // analyze
  struct {
    std::string ref, hyp, labels, train, categories, out;
    double bin_width = 0.1;
  } an;
  auto* analyze = app.add_subcommand("analyze", "Human-evaluation F1, BLEU agreement and overlap analysis");
  analyze->add_option("--ref", an.ref, "Reference FCG TSV")->required();
  analyze->add_option("--hyp", an.hyp, "Generated FCG TSV")->required();
  analyze->add_option("--labels", an.labels, "Labels TSV (id TAB correct|incorrect)")->required();
  analyze->add_option("--train", an.train, "Training FCG TSV for seen-in-training statistics");
  analyze->add_option("--categories", an.categories, "Error categories TSV (id TAB category)");
  analyze->add_option("--bin-width", an.bin_width, "Agreement histogram bin width");
  analyze->add_option("--out", an.out, "Output directory")->required();

  // run
  struct {
    std::string config, regime, marker, external, out;
    std::optional<std::size_t> cap;
    std::optional<double> threshold;
  } rn;
  auto* run = app.add_subcommand("run", "Run a full experiment from a JSON config");
  run->add_option("--config", rn.config, "Experiment config JSON")->required();
  run->add_option("--regime", rn.regime, "none, combined or multistage")
      ->check(CLI::IsMember({"none", "combined", "multistage"}));
  run->add_option("--cap", rn.cap, "Pseudo sample cap");
  run->add_option("--marker", rn.marker, "Span marker token");
  run->add_option("--threshold", rn.threshold, "Abstention threshold");
  run->add_option("--external", rn.external, "External generator: command or host:port");
  run->add_option("--out", rn.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  if (prepare->parsed()) {
    return guarded("prepare", [&] {
      const auto corpus = load(prep.in, prep.comments, prep.snap);
      std::string out;
      for (const auto& s : corpus.samples) {
        out += fcg::mark_span(s, prep.marker);
        out += '\t';
        if (s.reference_comment) out += *s.reference_comment;
        out += '\n';
      }
      if (prep.out.empty()) std::cout << out;
      else fcg::write_file(prep.out, out);
      spdlog::info("{} samples", corpus.samples.size());
    });
  }

  if (annotate->parsed()) {
    return guarded("annotate", [&] {
      const auto lexicon = ann.lexicon.empty() ? fcg::PrepositionLexicon::builtin()
                                               : fcg::PrepositionLexicon::parse(fcg::read_file(ann.lexicon), ann.lexicon);
      const auto contents = fcg::read_file(ann.in);
      const auto name = fs::path(ann.in).filename().string();
      const auto pairs = ann.format == "m2" ? fcg::parse_m2(contents, fcg::M2Options{ann.annotator, name})
                                            : fcg::parse_parallel_tsv(contents, name);
      const auto selected = fcg::select_prep_sentences(pairs, lexicon);
      const auto candidates = fcg::candidates_from(selected, fcg::SpanOptions{ann.window});
      fcg::write_file(ann.out, fcg::serialize_candidates(candidates));
      std::cout << pairs.size() << " pairs, " << selected.size() << " with preposition errors, "
                << candidates.size() << " candidates\n";
    });
  }

  if (augment->parsed()) {
    return guarded("augment", [&] {
      const auto candidates = fcg::parse_candidates(fcg::read_file(aug.candidates), aug.candidates);
      const auto generator = open_generator(aug.model, aug.external, aug.marker, aug.threshold);
      fcg::PseudoOptions po;
      po.cap = aug.cap;
      po.source_corpus = aug.source_name;
      const auto pseudo = fcg::build_pseudo(candidates, *generator, po);
      fcg::write_file(fs::path(aug.out) / "pseudo.tsv", fcg::serialize_fcg(fcg::pseudo_corpus(pseudo)));
      fcg::write_file(fs::path(aug.out) / "pseudo.provenance.jsonl", fcg::serialize_provenance(pseudo));
      std::cout << pseudo.size() << " pseudo samples from " << candidates.size() << " candidates\n";
    });
  }

  if (train->parsed()) {
    return guarded("train", [&] {
      auto gold = load(tr.gold, true);
      gold.split = fcg::Split::train;
      const auto regime = fcg::parse_regime(tr.regime);
      std::vector<fcg::Dataset> datasets;
      if (regime == fcg::Regime::none) {
        datasets.push_back({"gold", gold, fcg::kGoldPriority});
      } else {
        if (tr.pseudo.empty()) throw fcg::Error("regime '" + tr.regime + "' needs --pseudo");
        auto pseudo = load(tr.pseudo, true);
        pseudo.split = fcg::Split::pseudo;
        auto regimes = fcg::make_regimes(pseudo, gold);
        datasets = regime == fcg::Regime::combined ? regimes.combined : regimes.multistage;
      }
      const auto model = fcg::train_retrieval(datasets, fcg::RetrievalOptions{tr.marker, tr.threshold});
      fcg::write_file(tr.out, model.to_json());
      std::cout << model.entries().size() << " entries, " << model.id() << "\n";
    });
  }

  if (generate->parsed()) {
    return guarded("generate", [&] {
      const auto corpus = load(gen.in, false);
      const auto generator = open_generator(gen.model, gen.external, gen.marker, gen.threshold);
      fcg::BatchOptions bo;
      bo.threads = gen.threads;
      bo.concurrent_safe = gen.external.empty();
      const auto out = fcg::generate_batch(*generator, corpus, bo);
      fcg::write_file(gen.out, fcg::serialize_fcg(out, {true, fcg::CommentField::system}));
      std::size_t answered = 0;
      for (const auto& s : out.samples) answered += s.system_comment.has_value();
      std::cout << answered << "/" << out.samples.size() << " generated\n";
    });
  }

  if (score->parsed()) {
    return guarded("score", [&] {
      const auto outputs = fcg::attach_hypotheses(load(sc.ref, true), load(sc.hyp, false));
      fcg::ReportInputs in;
      in.name = fs::path(sc.ref).stem().string();
      in.outputs = &outputs;
      const auto report = fcg::build_report(in);
      std::cout << fcg::report_table({report});
      if (!sc.json.empty()) fcg::write_file(sc.json, fcg::report_json({report}));
    });
  }

  if (analyze->parsed()) {
    return guarded("analyze", [&] {
      const auto outputs = fcg::attach_hypotheses(load(an.ref, true), load(an.hyp, false));
      const auto labels = fcg::parse_labels(fcg::read_file(an.labels), an.labels);
      std::optional<fcg::Corpus> train_corpus;
      if (!an.train.empty()) train_corpus = load(an.train, true);
      std::optional<std::vector<std::pair<std::string, std::string>>> cats;
      if (!an.categories.empty()) cats = fcg::parse_categories(fcg::read_file(an.categories), an.categories);
      fcg::ReportInputs in;
      in.name = fs::path(an.ref).stem().string();
      in.outputs = &outputs;
      in.labels = &labels;
      in.train = train_corpus ? &*train_corpus : nullptr;
      in.categories = cats ? &*cats : nullptr;
      in.bin_width = an.bin_width;
      const auto report = fcg::build_report(in);
      const fs::path out(an.out);
      fcg::write_file(out / "report.json", fcg::report_json({report}));
      fcg::write_file(out / "report.txt", fcg::report_table({report}));
      fcg::write_file(out / "agreement.csv", fcg::agreement_csv(*report.agreement));
      std::cout << fcg::report_table({report});
    });
  }

  if (run->parsed()) {
    return guarded("config", [&] {
      auto config = fcg::load_config(rn.config);
      if (!rn.regime.empty()) config.regime = fcg::parse_regime(rn.regime);
      if (rn.cap) config.cap = *rn.cap;
      if (!rn.marker.empty()) config.marker = rn.marker;
      if (rn.threshold) config.abstain_threshold = *rn.threshold;
      if (!rn.external.empty()) {
        config.generator.kind = fcg::GeneratorConfig::Kind::external;
        config.generator.endpoint = rn.external;
      }
      if (!rn.out.empty()) config.out = rn.out;
      const auto result = fcg::run(config);
      for (const auto& a : result.artifacts) std::cout << a.string() << "\n";
    });
  }
  return 0;
}
