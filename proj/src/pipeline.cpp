// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/pipeline.hpp"

#include <fstream>
#include <system_error>

#include "json.hpp"
#include "vocabxfer/corpus_stats.hpp"
#include "vocabxfer/file_io.hpp"
#include "vocabxfer/subword_trainer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorKind kind) {
  return kind == ErrorKind::kIo ? kExitIo : kExitValidation;
}

std::string FormatErrorLine(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

namespace {

fs::path Normalize(const fs::path& p) {
  std::error_code ec;
  fs::path out = fs::weakly_canonical(fs::absolute(p), ec);
  return ec ? fs::absolute(p).lexically_normal() : out;
}

WordCounts ReadCorpus(const std::vector<fs::path>& paths, bool lowercase) {
  WordCounts words(lowercase);
  for (const fs::path& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + p.string());
    words.AddStream(in);
    if (in.bad()) throw Error(ErrorKind::kIo, "read failed: " + p.string());
  }
  return words;
}

// Tracks published files so a failed run can take them back.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  ManifestEntry Write(std::string role, std::optional<std::size_t> size,
                      const std::string& name, const std::string& bytes) {
    const fs::path path = dir_ / name;
    WriteFileAtomic(path, bytes);
    written_.push_back(path);
    return ManifestEntry{std::move(role), size, name, Sha256Hex(bytes)};
  }

  void Rollback() noexcept {
    for (const fs::path& p : written_) {
      std::error_code ignored;
      fs::remove(p, ignored);
    }
    written_.clear();
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

std::string SizeSuffix(std::size_t size) { return std::to_string(size); }

}  // namespace

void ValidatePipelineConfig(const PipelineConfig& config) {
  if (config.corpus.empty()) throw Error(ErrorKind::kValidation, "no corpus given");
  if (config.sizes.empty()) throw Error(ErrorKind::kValidation, "no vocabulary sizes given");
  for (std::size_t i = 0; i < config.sizes.size(); ++i) {
    if (config.sizes[i] == 0) throw Error(ErrorKind::kValidation, "sizes must be positive");
    if (i > 0 && config.sizes[i] <= config.sizes[i - 1]) {
      throw Error(ErrorKind::kValidation, "sizes must be strictly increasing");
    }
  }
  if (config.out_dir.empty()) throw Error(ErrorKind::kValidation, "no output directory given");
  if (config.fallback.kind == FallbackStrategy::Kind::kRandomNormal && !config.fallback.seed) {
    throw Error(ErrorKind::kValidation, "random-normal fallback requires --seed");
  }

  std::vector<fs::path> inputs = config.corpus;
  inputs.push_back(config.old_vocab);
  inputs.push_back(config.old_embeddings);
  if (config.old_merges) inputs.push_back(*config.old_merges);
  const fs::path out = Normalize(config.out_dir);
  for (const fs::path& input : inputs) {
    if (!fs::is_regular_file(input)) {
      throw Error(ErrorKind::kIo, "input file not found: " + input.string());
    }
    const fs::path in = Normalize(input);
    if (in == out || in.parent_path() == out) {
      throw Error(ErrorKind::kValidation,
                  "output directory " + config.out_dir.string() + " must not contain input " +
                      input.string());
    }
  }
  if (fs::exists(config.out_dir) && !fs::is_directory(config.out_dir)) {
    throw Error(ErrorKind::kValidation,
                "output path exists and is not a directory: " + config.out_dir.string());
  }
}

PipelineResult RunPipeline(const PipelineConfig& config, std::ostream* log) {
  ValidatePipelineConfig(config);
  auto note = [&](const std::string& line) {
    if (log) *log << line << '\n' << std::flush;
  };

  const WordCounts words = ReadCorpus(config.corpus, config.lowercase);
  if (words.empty()) throw Error(ErrorKind::kValidation, "corpus contains no words");
  const Vocabulary old_vocab = LoadVocabulary(config.old_vocab, config.marker);
  const std::vector<MergeRule> old_merges =
      config.old_merges ? LoadMerges(*config.old_merges, config.marker) : std::vector<MergeRule>{};
  const EmbeddingMatrix old_matrix = LoadMatrix(config.old_embeddings);
  if (old_matrix.rows() != old_vocab.size()) {
    throw Error(ErrorKind::kSizeMismatch,
                "old embeddings have " + std::to_string(old_matrix.rows()) +
                    " rows but the old vocabulary has " + std::to_string(old_vocab.size()) +
                    " tokens");
  }
  const CorpusTokenizer old_tokenizer(old_vocab, old_merges);
  const TokenTrie old_trie(old_vocab);

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create " + config.out_dir.string() + ": " + ec.message());
  }

  ArtifactWriter writer(config.out_dir);
  PipelineResult result;
  try {
    nlohmann::ordered_json drift;
    drift["reports"] = nlohmann::ordered_json::array();
    for (std::size_t size : config.sizes) {
      const std::string suffix = SizeSuffix(size);
      TrainerConfig trainer;
      trainer.target_size = size;
      trainer.marker = config.marker;
      trainer.min_pair_frequency = config.min_pair_frequency;
      trainer.max_token_length = config.max_token_length;
      trainer.lowercase = config.lowercase;
      TrainResult trained = TrainVocabulary(words, trainer);
      for (const std::string& w : trained.warnings) note("warning: size " + suffix + ": " + w);
      note("size " + suffix + ": trained " + std::to_string(trained.vocab.size()) + " tokens, " +
           std::to_string(trained.merges.size()) + " merges");

      const std::string vocab_bytes = trained.vocab.Serialize();
      result.artifacts.push_back(writer.Write("vocab", size, "vocab-" + suffix + ".txt", vocab_bytes));
      result.artifacts.push_back(writer.Write("merges", size, "merges-" + suffix + ".txt",
                                              SerializeMerges(trained.merges)));

      const TransferPlan plan = BuildTransferPlan(trained.vocab, old_vocab, old_trie, config.mode);
      const PlanSummary summary = SummarizePlan(plan);
      note("size " + suffix + ": plan matched=" + std::to_string(summary.matched) +
           " averaged=" + std::to_string(summary.averaged) +
           " fallback=" + std::to_string(summary.fallback));
      result.artifacts.push_back(writer.Write("plan", size, "plan-" + suffix + ".json",
                                              SerializePlan(plan)));

      const EmbeddingMatrix matrix = ApplyTransfer(plan, old_vocab, trained.vocab, old_matrix,
                                                   config.fallback);
      result.artifacts.push_back(writer.Write("embeddings", size, "embeddings-" + suffix + ".vtem",
                                              SerializeMatrix(matrix)));
      result.artifacts.push_back(writer.Write("embeddings_text", size,
                                              "embeddings-" + suffix + ".txt",
                                              ExportMatrixText(matrix)));

      const CorpusTokenizer new_tokenizer(trained.vocab, trained.merges);
      const PlanSummary averaged_summary =
          config.mode == TransferMode::kAveraged
              ? summary
              : SummarizePlan(BuildTransferPlan(trained.vocab, old_vocab, old_trie,
                                                TransferMode::kAveraged));
      DriftOptions options;
      options.top_k = config.top_k;
      options.lowercase = config.lowercase;
      const DriftReport report =
          CompareVocabularies(words, old_tokenizer, new_tokenizer, options, &averaged_summary);
      nlohmann::ordered_json entry;
      entry["size"] = size;
      entry["vocab_size"] = trained.vocab.size();
      const nlohmann::ordered_json fields = DriftReportToJson(report);
      for (const auto& [key, value] : fields.items()) entry[key] = value;
      drift["reports"].push_back(std::move(entry));
      note("size " + suffix + ": fertility old=" + std::to_string(report.old_fertility) +
           " new=" + std::to_string(report.new_fertility));
    }
    const auto dump = [](const nlohmann::ordered_json& j) {
      return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    };
    result.artifacts.push_back(writer.Write("drift_report", std::nullopt, "drift.json", dump(drift)));

    nlohmann::ordered_json manifest;
    manifest["format"] = "vocabxfer-manifest/1";
    nlohmann::ordered_json cfg;
    cfg["mode"] = TransferModeName(config.mode);
    cfg["fallback"] = FallbackKindName(config.fallback.kind);
    cfg["seed"] = config.fallback.seed ? nlohmann::ordered_json(*config.fallback.seed)
                                       : nlohmann::ordered_json(nullptr);
    cfg["scale"] = config.fallback.scale ? nlohmann::ordered_json(*config.fallback.scale)
                                         : nlohmann::ordered_json(nullptr);
    cfg["sizes"] = config.sizes;
    cfg["marker"] = config.marker;
    cfg["min_pair_frequency"] = config.min_pair_frequency;
    cfg["max_token_length"] = config.max_token_length;
    cfg["lowercase"] = config.lowercase;
    manifest["config"] = std::move(cfg);

    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    auto add_input = [&](const std::string& role, const fs::path& p) {
      nlohmann::ordered_json e;
      e["role"] = role;
      e["path"] = p.string();
      e["sha256"] = Sha256File(p);
      inputs.push_back(std::move(e));
    };
    for (const fs::path& p : config.corpus) add_input("corpus", p);
    add_input("old_vocab", config.old_vocab);
    if (config.old_merges) add_input("old_merges", *config.old_merges);
    add_input("old_embeddings", config.old_embeddings);
    manifest["inputs"] = std::move(inputs);

    nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
    for (const ManifestEntry& a : result.artifacts) {
      nlohmann::ordered_json e;
      e["role"] = a.role;
      e["size"] = a.size ? nlohmann::ordered_json(*a.size) : nlohmann::ordered_json(nullptr);
      e["path"] = a.path;
      e["sha256"] = a.sha256;
      artifacts.push_back(std::move(e));
    }
    manifest["artifacts"] = std::move(artifacts);
    writer.Write("manifest", std::nullopt, "manifest.json", dump(manifest));
    result.manifest = config.out_dir / "manifest.json";
  } catch (...) {
    writer.Rollback();
    throw;
  }
  return result;
}

}  // namespace vocabxfer
