#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include <json.hpp>

#include "fcg/augment.hpp"
#include "fcg/error.hpp"
#include "fcg/pipeline.hpp"

using namespace fcg;
namespace fs = std::filesystem;

namespace {

const fs::path kFix = FCG_FIXTURES;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fcg-unit-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig base(const fs::path& out) {
  ExperimentConfig c;
  c.gold_train = kFix / "gold/train.tsv";
  c.dev = kFix / "gold/dev.tsv";
  c.test = kFix / "gold/test.tsv";
  c.labels = kFix / "gold/test.labels.tsv";
  c.categories = kFix / "gold/test.categories.tsv";
  c.pseudo_sources = {PseudoSource{kFix / "pseudo/icnale_extra.m2", "m2", "icnale"},
                      PseudoSource{kFix / "pseudo/wil_extra.tsv", "tsv", "wil"}};
  c.out = out;
  return c;
}

std::string stage_of(const ExperimentConfig& c) {
  try {
    run(c);
  } catch (const StageError& e) {
    return e.stage();
  }
  return "";
}

int sh(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

} // namespace

TEST_CASE("parse_config resolves paths and reads every field") {
  const auto c = parse_config(R"({
    "gold_train": "gold/train.tsv", "test": "/abs/test.tsv", "dev": "gold/dev.tsv",
    "pseudo_sources": [{"path": "p/a.m2"}, {"path": "p/b.tsv", "format": "tsv", "name": "wil"}],
    "regime": "multistage", "cap": 5000, "marker": "<e>", "abstain_threshold": 0.2,
    "generator": {"kind": "external", "endpoint": "localhost:9000"}, "out": "o", "threads": 3
  })", "/base");
  CHECK(c.gold_train == fs::path("/base/gold/train.tsv"));
  CHECK(c.test == fs::path("/abs/test.tsv"));
  REQUIRE(c.pseudo_sources.size() == 2);
  CHECK(c.pseudo_sources[0].name == "a");
  CHECK(c.pseudo_sources[0].format == "m2");
  CHECK(c.pseudo_sources[1].name == "wil");
  CHECK(c.regime == Regime::multistage);
  CHECK(c.cap == 5000u);
  CHECK(c.marker == "<e>");
  CHECK(c.generator.kind == GeneratorConfig::Kind::external);
  CHECK(c.generator.endpoint == "localhost:9000");
  CHECK(c.threads == 3);
  CHECK_THROWS_AS(parse_config("{}"), Error);
  CHECK_THROWS_AS(parse_config(R"({"gold_train":"a","test":"b","regime":"sideways"})"), Error);
}

TEST_CASE("validate_config") {
  auto c = base("x");
  CHECK_NOTHROW(validate_config(c));
  c.regime = Regime::combined;
  c.pseudo_sources.clear();
  CHECK_THROWS_AS(validate_config(c), Error);
  c = base("x");
  c.abstain_threshold = 1.5;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = base("x");
  c.generator.kind = GeneratorConfig::Kind::external;
  CHECK_THROWS_AS(validate_config(c), Error);
}

TEST_CASE("run with no augmentation") {
  const auto out = scratch("none");
  const auto r = run(base(out));
  CHECK(r.n_pseudo == 0);
  CHECK(r.index_size == 361);
  for (const auto* f : {"prepared/train.marked.tsv", "train/training_manifest.json", "train/index.json",
                        "dev.generated.tsv", "test.generated.tsv", "report.json", "report.txt", "agreement.csv"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  const auto rep = nlohmann::json::parse(read_file(out / "report.json"));
  REQUIRE(rep["reports"].size() == 2);
  const auto& test = rep["reports"][1];
  CHECK(test["name"] == "test");
  CHECK(test["n_samples"] == 88);
  CHECK(test.contains("f1"));
}

TEST_CASE("run combined and multistage write pseudo data with provenance") {
  for (auto regime : {Regime::combined, Regime::multistage}) {
    const auto out = scratch(std::string(to_string(regime)));
    auto c = base(out);
    c.regime = regime;
    const auto r = run(c);
    CHECK(r.n_candidates > 0);
    CHECK(r.n_pseudo > 0);
    CHECK(r.index_size == 361 + r.n_pseudo);
    CHECK(fs::exists(out / "pseudo.tsv"));
    const auto pseudo = parse_fcg(read_file(out / "pseudo.tsv"), ParseOptions{true, false, "pseudo.tsv"});
    const auto prov = parse_provenance(read_file(out / "pseudo.provenance.jsonl"));
    REQUIRE(prov.size() == pseudo.samples.size());
    for (std::size_t i = 0; i < prov.size(); ++i) CHECK(prov[i].first == pseudo.samples[i].id);
    const auto manifest = nlohmann::json::parse(read_file(out / "train/training_manifest.json"));
    CHECK(manifest["stages"].size() == (regime == Regime::combined ? 1 : 2));

    auto capped = c;
    capped.out = scratch(std::string(to_string(regime)) + "-cap");
    capped.cap = 7;
    CHECK(run(capped).n_pseudo == 7);
  }
}

TEST_CASE("run is byte deterministic") {
  auto a = base(scratch("det-a"));
  auto b = base(scratch("det-b"));
  a.regime = b.regime = Regime::multistage;
  b.threads = 4;
  run(a);
  run(b);
  for (const auto& entry : fs::recursive_directory_iterator(a.out)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a.out);
    CHECK_MESSAGE(read_file(entry.path()) == read_file(b.out / rel), rel.string());
  }
}

TEST_CASE("test == train gives BLEU 1") {
  auto c = base(scratch("memo"));
  c.test = c.gold_train;
  c.labels.reset();
  c.categories.reset();
  run(c);
  const auto rep = nlohmann::json::parse(read_file(c.out / "report.json"));
  for (const auto& r : rep["reports"])
    if (r["name"] == "test") CHECK(r["corpus_bleu"]["value"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("stage failures name the stage") {
  auto c = base(scratch("fail"));
  c.regime = Regime::combined;
  c.lexicon = kFix / "no-such-lexicon.txt";
  CHECK(stage_of(c) == "annotate");

  c = base(scratch("fail2"));
  c.test = kFix / "missing.tsv";
  CHECK(stage_of(c) == "prepare");

  c = base(scratch("fail3"));
  c.abstain_threshold = -1;
  CHECK(stage_of(c) == "config");

  c = base(scratch("fail4"));
  c.generator.kind = GeneratorConfig::Kind::external;
  c.generator.endpoint = std::string(FCG_FAKE_EXTGEN) + " bad-handshake";
  CHECK(stage_of(c) == "train");
}

TEST_CASE("run through an external generator") {
  auto c = base(scratch("ext"));
  c.regime = Regime::multistage;
  c.generator.kind = GeneratorConfig::Kind::external;
  c.generator.endpoint = std::string(FCG_FAKE_EXTGEN) + " template";
  c.labels.reset();
  c.categories.reset();
  const auto r = run(c);
  CHECK(r.n_pseudo > 0);
  const auto gen = parse_fcg(read_file(c.out / "test.generated.tsv"), ParseOptions{true, false, "g"});
  CHECK(gen.samples[0].reference_comment == "Consider at .");
}

TEST_CASE("command line") {
  const std::string bin = FCG_LAB_BIN;
  const auto dir = scratch("cli");
  const std::string fx = kFix.string();
  CHECK(sh(bin + " --help") == 0);
  CHECK(sh(bin + " prepare --in " + fx + "/gold/dev.tsv --out " + (dir / "dev.marked").string()) == 0);
  CHECK(sh(bin + " annotate --in " + fx + "/pseudo/icnale_extra.m2 --out " + (dir / "cands.jsonl").string()) == 0);
  CHECK(sh(bin + " train --gold " + fx + "/gold/train.tsv --out " + (dir / "index.json").string()) == 0);
  CHECK(sh(bin + " augment --candidates " + (dir / "cands.jsonl").string() + " --model " +
           (dir / "index.json").string() + " --cap 5 --out " + (dir / "aug").string()) == 0);
  CHECK(parse_fcg(read_file(dir / "aug/pseudo.tsv"), ParseOptions{true}).samples.size() == 5);
  CHECK(sh(bin + " train --gold " + fx + "/gold/train.tsv --pseudo " + (dir / "aug/pseudo.tsv").string() +
           " --regime multistage --out " + (dir / "index2.json").string()) == 0);
  CHECK(sh(bin + " generate --in " + fx + "/gold/test.tsv --model " + (dir / "index2.json").string() + " --out " +
           (dir / "test.gen.tsv").string()) == 0);
  CHECK(sh(bin + " score --ref " + fx + "/gold/test.tsv --hyp " + (dir / "test.gen.tsv").string() + " --json " +
           (dir / "score.json").string()) == 0);
  CHECK(sh(bin + " analyze --ref " + fx + "/gold/test.tsv --hyp " + (dir / "test.gen.tsv").string() + " --labels " +
           fx + "/gold/test.labels.tsv --train " + fx + "/gold/train.tsv --out " + (dir / "an").string()) == 0);
  CHECK(fs::exists(dir / "an/agreement.csv"));
  CHECK(sh(bin + " generate --in " + fx + "/gold/test.tsv --out x") != 0);
  CHECK(sh(bin + " prepare --in " + fx + "/nope.tsv") != 0);

  const auto cfg = dir / "exp.json";
  write_file(cfg, nlohmann::json{{"gold_train", fx + "/gold/train.tsv"},
                                 {"test", fx + "/gold/test.tsv"},
                                 {"pseudo_sources", {{{"path", fx + "/pseudo/wil_extra.tsv"}, {"format", "tsv"}}}},
                                 {"lexicon", fx + "/missing-lexicon.txt"},
                                 {"regime", "combined"},
                                 {"out", (dir / "run").string()}}
                      .dump());
  const auto log = dir / "run.log";
  CHECK(std::system((bin + " run --config " + cfg.string() + " > " + log.string() + " 2>&1").c_str()) != 0);
  CHECK(read_file(log).find("annotate") != std::string::npos);
  CHECK(sh(bin + " run --config " + cfg.string() + " --regime none") == 0);
}
