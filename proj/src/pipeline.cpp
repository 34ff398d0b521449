#include "fcg/pipeline.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "fcg/augment.hpp"
#include "fcg/errtype.hpp"
#include "fcg/eval.hpp"
#include "fcg/extgen.hpp"
#include "fcg/gec_ingest.hpp"
#include "fcg/generator.hpp"
#include "fcg/text.hpp"

namespace fcg {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

template <typename F>
auto stage(const std::string& name, F&& body) {
  spdlog::info("stage {}", name);
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

Corpus load_corpus(const fs::path& path, bool expect_comments, Split split, bool snap) {
  ParseOptions opts;
  opts.expect_comments = expect_comments;
  opts.snap = snap;
  opts.source = path.filename().string();
  opts.split = split;
  return parse_fcg(read_file(path), opts);
}

// "marked sentence TAB comment", the encoder/decoder pairs an external trainer consumes.
std::string marked_tsv(const Corpus& corpus, std::string_view marker) {
  std::string out;
  for (const auto& s : corpus.samples) {
    out += mark_span(s, marker);
    out += '\t';
    if (s.reference_comment) out += *s.reference_comment;
    out += '\n';
  }
  return out;
}

std::unique_ptr<Generator> external_generator(const ExperimentConfig& config) {
  ExternalGenerator::Options opts;
  opts.marker = config.marker;
  return std::make_unique<ExternalGenerator>(Endpoint::parse(config.generator.endpoint), opts);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

} // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::none: return "none";
    case Regime::combined: return "combined";
    case Regime::multistage: return "multistage";
  }
  return "none";
}

Regime parse_regime(std::string_view name) {
  if (name == "none") return Regime::none;
  if (name == "combined") return Regime::combined;
  if (name == "multistage") return Regime::multistage;
  throw Error("unknown regime '" + std::string(name) + "' (expected none, combined or multistage)");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for " + path.string());
}

ExperimentConfig parse_config(std::string_view contents, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    const json j = json::parse(contents);
    c.gold_train = resolve(base_dir, j.at("gold_train").get<std::string>());
    c.test = resolve(base_dir, j.at("test").get<std::string>());
    if (j.contains("dev")) c.dev = resolve(base_dir, j["dev"].get<std::string>());
    if (j.contains("lexicon")) c.lexicon = resolve(base_dir, j["lexicon"].get<std::string>());
    if (j.contains("labels")) c.labels = resolve(base_dir, j["labels"].get<std::string>());
    if (j.contains("categories")) c.categories = resolve(base_dir, j["categories"].get<std::string>());
    for (const auto& src : j.value("pseudo_sources", json::array())) {
      PseudoSource s;
      s.path = resolve(base_dir, src.at("path").get<std::string>());
      s.format = src.value("format", "m2");
      if (s.format != "m2" && s.format != "tsv")
        throw Error("pseudo source format must be 'm2' or 'tsv', got '" + s.format + "'");
      s.name = src.value("name", s.path.stem().string());
      c.pseudo_sources.push_back(std::move(s));
    }
    c.regime = parse_regime(j.value("regime", "none"));
    if (j.contains("cap") && !j["cap"].is_null()) c.cap = j["cap"].get<std::size_t>();
    c.marker = j.value("marker", std::string(kDefaultMarker));
    c.abstain_threshold = j.value("abstain_threshold", 0.0);
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      const auto kind = g.value("kind", "retrieval");
      if (kind == "retrieval") c.generator.kind = GeneratorConfig::Kind::retrieval;
      else if (kind == "external") c.generator.kind = GeneratorConfig::Kind::external;
      else throw Error("generator kind must be 'retrieval' or 'external'");
      c.generator.endpoint = g.value("endpoint", "");
    }
    c.out = resolve(base_dir, j.value("out", "out"));
    c.seed = j.value("seed", std::uint64_t{0});
    c.missing_window = j.value("missing_window", std::size_t{1});
    c.m2_annotator = j.value("m2_annotator", 0);
    c.snap = j.value("snap", false);
    c.threads = j.value("threads", 1u);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  if (c.regime != Regime::none && c.pseudo_sources.empty())
    throw Error("regime '" + std::string(to_string(c.regime)) + "' requires pseudo_sources");
  if (!(c.abstain_threshold >= 0.0 && c.abstain_threshold <= 1.0))
    throw Error("abstain_threshold must lie in [0, 1]");
  if (c.generator.kind == GeneratorConfig::Kind::external && c.generator.endpoint.empty())
    throw Error("external generator needs an endpoint");
  if (c.marker.empty() || c.marker.find_first_of(" \t\n") != std::string::npos)
    throw Error("marker must be a single token");
  if (c.cap && *c.cap == 0) throw Error("cap must be positive");
}

RunResult run(const ExperimentConfig& config) {
  stage("config", [&] {
    validate_config(config);
    return 0;
  });
  RunResult result;
  const fs::path& out = config.out;
  auto emit = [&](const fs::path& rel, std::string_view contents) {
    write_file(out / rel, contents);
    result.artifacts.push_back(out / rel);
  };

  struct Data {
    Corpus train, test;
    std::optional<Corpus> dev;
    bool test_has_refs = false;
  };
  auto data = stage("prepare", [&] {
    Data d;
    d.train = load_corpus(config.gold_train, true, Split::train, config.snap);
    for (const auto& s : d.train.samples)
      if (!s.reference_comment) throw Error(s.id + ": gold training sample has an empty comment");
    if (config.dev) d.dev = load_corpus(*config.dev, true, Split::dev, config.snap);
    d.test = load_corpus(config.test, false, Split::test, config.snap);
    std::size_t with_refs = 0;
    for (const auto& s : d.test.samples) with_refs += s.reference_comment.has_value();
    if (with_refs != 0 && with_refs != d.test.samples.size())
      throw Error("test set mixes rows with and without reference comments");
    d.test_has_refs = with_refs != 0;
    emit("prepared/train.marked.tsv", marked_tsv(d.train, config.marker));
    return d;
  });

  Corpus pseudo;
  pseudo.split = Split::pseudo;
  if (config.regime != Regime::none) {
    auto candidates = stage("annotate", [&] {
      const auto lexicon = config.lexicon
                               ? PrepositionLexicon::parse(read_file(*config.lexicon), config.lexicon->string())
                               : PrepositionLexicon::builtin();
      std::vector<std::pair<std::string, std::vector<Candidate>>> per_source;
      std::string all;
      for (const auto& src : config.pseudo_sources) {
        const auto contents = read_file(src.path);
        const auto name = src.path.filename().string();
        const auto pairs = src.format == "m2"
                               ? parse_m2(contents, M2Options{config.m2_annotator, name})
                               : parse_parallel_tsv(contents, name);
        const auto selected = select_prep_sentences(pairs, lexicon);
        auto cands = candidates_from(selected, SpanOptions{config.missing_window});
        spdlog::info("{}: {} pairs, {} with preposition edits, {} candidates", name, pairs.size(),
                     selected.size(), cands.size());
        all += serialize_candidates(cands);
        per_source.emplace_back(src.name, std::move(cands));
      }
      emit("candidates.jsonl", all);
      return per_source;
    });
    for (const auto& [name, c] : candidates) result.n_candidates += c.size();

    auto pseudo_samples = stage("augment", [&] {
      std::unique_ptr<Generator> labeler;
      if (config.generator.kind == GeneratorConfig::Kind::external) {
        labeler = external_generator(config);
      } else {
        RetrievalOptions ro{config.marker, config.abstain_threshold};
        labeler = std::make_unique<RetrievalModel>(
            train_retrieval({Dataset{"gold", data.train, kGoldPriority}}, ro));
      }
      std::vector<PseudoSample> all;
      for (const auto& [name, cands] : candidates) {
        PseudoOptions po;
        if (config.cap) po.cap = *config.cap - std::min(*config.cap, all.size());
        if (po.cap && *po.cap == 0) break;
        po.source_corpus = name;
        po.regime_tag = config.cap ? "balanced" : "unbalanced";
        auto batch = build_pseudo(cands, *labeler, po);
        all.insert(all.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
      }
      // renumber so ids match the rows of the written file
      for (std::size_t i = 0; i < all.size(); ++i) all[i].sample.id = "pseudo.tsv:" + std::to_string(i + 1);
      emit("pseudo.tsv", serialize_fcg(pseudo_corpus(all)));
      emit("pseudo.provenance.jsonl", serialize_provenance(all));
      return all;
    });
    result.n_pseudo = pseudo_samples.size();
    pseudo = pseudo_corpus(pseudo_samples);
  }

  auto model = stage("train", [&] {
    std::vector<Dataset> datasets;
    if (config.regime == Regime::none) {
      datasets.push_back(Dataset{"gold", data.train, kGoldPriority});
    } else {
      auto regimes = make_regimes(pseudo, data.train);
      datasets = config.regime == Regime::combined ? std::move(regimes.combined) : std::move(regimes.multistage);
    }
    json manifest;
    manifest["regime"] = std::string(to_string(config.regime));
    manifest["marker"] = config.marker;
    json stages = json::array();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      const auto rel = "train/stage" + std::to_string(i + 1) + "_" + datasets[i].name + ".marked.tsv";
      emit(rel, marked_tsv(datasets[i].corpus, config.marker));
      stages.push_back({{"stage", i + 1},
                        {"name", datasets[i].name},
                        {"priority", datasets[i].priority},
                        {"samples", datasets[i].corpus.samples.size()},
                        {"path", rel}});
    }
    manifest["stages"] = std::move(stages);
    emit("train/training_manifest.json", manifest.dump(2) + "\n");

    std::unique_ptr<Generator> gen;
    if (config.generator.kind == GeneratorConfig::Kind::external) {
      gen = external_generator(config);
    } else {
      auto retrieval = std::make_unique<RetrievalModel>(
          train_retrieval(datasets, RetrievalOptions{config.marker, config.abstain_threshold}));
      result.index_size = retrieval->entries().size();
      emit("train/index.json", retrieval->to_json());
      gen = std::move(retrieval);
    }
    return gen;
  });

  struct Generated {
    std::optional<Corpus> dev;
    Corpus test;
  };
  auto generated = stage("generate", [&] {
    BatchOptions bo;
    bo.threads = config.threads;
    bo.concurrent_safe = config.generator.kind == GeneratorConfig::Kind::retrieval;
    Generated g;
    SerializeOptions so{true, CommentField::system};
    if (data.dev) {
      g.dev = generate_batch(*model, *data.dev, bo);
      emit("dev.generated.tsv", serialize_fcg(*g.dev, so));
    }
    g.test = generate_batch(*model, data.test, bo);
    emit("test.generated.tsv", serialize_fcg(g.test, so));
    return g;
  });

  auto extras = stage("analyze", [&] {
    std::pair<std::optional<std::vector<HumanLabel>>, std::optional<std::vector<std::pair<std::string, std::string>>>> x;
    if (config.labels) x.first = parse_labels(read_file(*config.labels), config.labels->string());
    if (config.categories) x.second = parse_categories(read_file(*config.categories), config.categories->string());
    return x;
  });

  std::vector<EvalReport> reports = stage("score", [&] {
    std::vector<EvalReport> r;
    if (generated.dev) {
      ReportInputs in;
      in.name = "dev";
      in.outputs = &*generated.dev;
      r.push_back(build_report(in));
    }
    if (data.test_has_refs) {
      ReportInputs in;
      in.name = "test";
      in.outputs = &generated.test;
      in.train = &data.train;
      r.push_back(build_report(in));
    } else {
      spdlog::warn("test set has no reference comments; skipping test scoring");
    }
    return r;
  });

  stage("analyze", [&] {
    if ((extras.first || extras.second) && data.test_has_refs) {
      ReportInputs in;
      in.name = "test";
      in.outputs = &generated.test;
      in.train = &data.train;
      if (extras.first) in.labels = &*extras.first;
      if (extras.second) in.categories = &*extras.second;
      reports.back() = build_report(in);
      if (reports.back().agreement) emit("agreement.csv", agreement_csv(*reports.back().agreement));
    }
    if (!reports.empty()) {
      emit("report.json", report_json(reports));
      emit("report.txt", report_table(reports));
    }
    return 0;
  });
  return result;
}

} // namespace fcg
