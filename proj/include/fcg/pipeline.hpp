#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fcg/corpus.hpp"
#include "fcg/error.hpp"

namespace fcg {

// A failure inside one pipeline stage ("prepare", "annotate", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class Regime { none, combined, multistage };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);

struct PseudoSource {
  std::filesystem::path path;
  std::string format = "m2";  // "m2" or "tsv"
  std::string name;           // provenance label; defaults to the file stem
};

struct GeneratorConfig {
  enum class Kind { retrieval, external };
  Kind kind = Kind::retrieval;
  std::string endpoint;  // command line or host:port, for external
};

// One experiment (one row of a results table).
struct ExperimentConfig {
  std::filesystem::path gold_train;
  std::optional<std::filesystem::path> dev;
  std::filesystem::path test;
  std::vector<PseudoSource> pseudo_sources;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> categories;
  Regime regime = Regime::none;
  std::optional<std::size_t> cap;
  std::string marker = std::string(kDefaultMarker);
  double abstain_threshold = 0.0;
  GeneratorConfig generator;
  std::filesystem::path out = "out";
  // Reserved; every stage is deterministic.
  std::uint64_t seed = 0;
  std::size_t missing_window = 1;
  int m2_annotator = 0;
  bool snap = false;
  unsigned threads = 1;
};

// Relative paths are resolved against the directory holding the config file.
ExperimentConfig parse_config(std::string_view json, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws fcg::Error on a config that cannot run (before touching the disk).
void validate_config(const ExperimentConfig& config);

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::size_t n_candidates = 0;
  std::size_t n_pseudo = 0;
  std::size_t index_size = 0;
};

// prepare -> annotate -> augment -> train -> generate -> score -> analyze.
// Throws StageError naming the failing stage.
RunResult run(const ExperimentConfig& config);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace fcg
