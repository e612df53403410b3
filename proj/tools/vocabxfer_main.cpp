// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

// vocabxfer: train corpus-specific vocabularies and transfer pretrained
// embeddings onto them.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "vocabxfer/corpus_stats.hpp"
#include "vocabxfer/embedding.hpp"
#include "vocabxfer/file_io.hpp"
#include "vocabxfer/pipeline.hpp"
#include "vocabxfer/subword_trainer.hpp"
#include "vocabxfer/transfer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace fs = std::filesystem;
using namespace vocabxfer;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void RequireFiles(std::initializer_list<const fs::path*> paths) {
  for (const fs::path* p : paths) {
    if (!p->empty() && !fs::is_regular_file(*p)) {
      throw Error(ErrorKind::kIo, "input file not found: " + p->string());
    }
  }
}

void PrintSummary(const PlanSummary& s) {
  std::cout << "matched " << s.matched << "\naveraged " << s.averaged << "\nfallback "
            << s.fallback << "\n";
  for (const auto& [len, count] : s.partition_lengths) {
    std::cout << "partition_length " << len << " " << count << "\n";
  }
}

FallbackStrategy MakeFallback(const std::string& name, const std::optional<std::uint64_t>& seed,
                              const std::optional<double>& scale) {
  FallbackStrategy f = FallbackStrategy::Parse(name);
  f.seed = seed;
  f.scale = scale;
  if (f.kind == FallbackStrategy::Kind::kRandomNormal && !f.seed) {
    throw UsageError("--fallback random-normal requires --seed");
  }
  return f;
}

WordCounts ReadWords(const std::vector<fs::path>& corpus, bool lowercase) {
  WordCounts words(lowercase);
  for (const fs::path& p : corpus) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + p.string());
    words.AddStream(in);
  }
  return words;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vocabulary transfer toolkit: train corpus-specific subword vocabularies and "
               "initialize their embeddings from a pretrained vocabulary."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // Shared trainer knobs.
  std::string marker = "##";
  std::uint64_t min_pair_frequency = 2;
  std::size_t max_token_length = 64;
  bool lowercase = false;
  auto add_trainer_flags = [&](CLI::App* cmd) {
    cmd->add_option("--marker", marker, "Continuation marker")->capture_default_str();
    cmd->add_option("--min-pair-frequency", min_pair_frequency)->capture_default_str();
    cmd->add_option("--max-token-length", max_token_length)->capture_default_str();
    cmd->add_flag("--lowercase", lowercase, "ASCII-lowercase words before training");
  };

  // train-vocab
  std::vector<fs::path> corpus;
  std::size_t size = 8000;
  fs::path out;
  fs::path merges_out;
  auto* train = app.add_subcommand("train-vocab", "Train a subword vocabulary on a corpus");
  train->add_option("--corpus", corpus, "Corpus text file(s)")->required();
  train->add_option("--size", size, "Target vocabulary size")->capture_default_str();
  train->add_option("--out", out, "Vocabulary output file")->required();
  train->add_option("--merges-out", merges_out, "Merge list output (default: <out>.merges)");
  add_trainer_flags(train);

  // plan
  fs::path old_vocab_path, new_vocab_path, old_merges_path, new_merges_path;
  std::string mode = "averaged";
  auto* plan_cmd = app.add_subcommand("plan", "Compute a transfer plan from old to new vocabulary");
  plan_cmd->add_option("--old-vocab", old_vocab_path)->required();
  plan_cmd->add_option("--new-vocab", new_vocab_path)->required();
  plan_cmd->add_option("--mode", mode, "matched|averaged")->capture_default_str();
  plan_cmd->add_option("--out", out, "Plan output file")->required();
  plan_cmd->add_option("--marker", marker)->capture_default_str();

  // apply
  fs::path plan_path, old_embeddings_path, text_out;
  std::string fallback = "global-mean";
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  auto* apply = app.add_subcommand("apply", "Materialize a plan into an embedding matrix");
  apply->add_option("--plan", plan_path)->required();
  apply->add_option("--old-vocab", old_vocab_path)->required();
  apply->add_option("--new-vocab", new_vocab_path)->required();
  apply->add_option("--old-embeddings", old_embeddings_path)->required();
  apply->add_option("--fallback", fallback, "global-mean|random-normal|zero")
      ->capture_default_str();
  apply->add_option("--seed", seed, "Seed for random-normal fallback");
  apply->add_option("--scale", scale, "Stddev for random-normal (default: per-dimension)");
  apply->add_option("--out", out, "Matrix output file")->required();
  apply->add_option("--text-out", text_out, "Also write a plain-text export");
  apply->add_option("--marker", marker)->capture_default_str();

  // stats
  std::size_t top_k = 20;
  auto* stats = app.add_subcommand("stats", "Report tokenization drift between two vocabularies");
  stats->add_option("--corpus", corpus)->required();
  stats->add_option("--old-vocab", old_vocab_path)->required();
  stats->add_option("--old-merges", old_merges_path, "Omit for longest-match tokenization");
  stats->add_option("--new-vocab", new_vocab_path)->required();
  stats->add_option("--new-merges", new_merges_path, "Omit for longest-match tokenization");
  stats->add_option("--top-k", top_k)->capture_default_str();
  stats->add_option("--out", out, "Report file (default: stdout)");
  stats->add_option("--marker", marker)->capture_default_str();
  stats->add_flag("--lowercase", lowercase);

  // pipeline
  std::vector<std::size_t> sizes = {8000, 16000, 32000};
  auto* pipeline = app.add_subcommand("pipeline", "Run train, plan, apply and stats per size");
  pipeline->add_option("--corpus", corpus)->required();
  pipeline->add_option("--old-vocab", old_vocab_path)->required();
  pipeline->add_option("--old-merges", old_merges_path);
  pipeline->add_option("--old-embeddings", old_embeddings_path)->required();
  pipeline->add_option("--size", sizes, "Vocabulary sizes, strictly increasing")
      ->capture_default_str();
  pipeline->add_option("--mode", mode)->capture_default_str();
  pipeline->add_option("--fallback", fallback)->capture_default_str();
  pipeline->add_option("--seed", seed);
  pipeline->add_option("--scale", scale);
  pipeline->add_option("--top-k", top_k)->capture_default_str();
  pipeline->add_option("--out", out, "Output directory")->required();
  add_trainer_flags(pipeline);

  // export-text
  fs::path embeddings_path;
  auto* export_text = app.add_subcommand("export-text", "Write a matrix as plain text");
  export_text->add_option("--embeddings", embeddings_path)->required();
  export_text->add_option("--out", out)->required();

  // init-embeddings
  std::size_t dim = 64;
  std::uint64_t init_seed = 0;
  double stddev = 0.02;
  auto* init = app.add_subcommand("init-embeddings", "Write a seeded random matrix for a vocabulary");
  init->add_option("--vocab", old_vocab_path)->required();
  init->add_option("--dim", dim)->capture_default_str();
  init->add_option("--seed", init_seed)->required();
  init->add_option("--stddev", stddev)->capture_default_str();
  init->add_option("--out", out)->required();
  init->add_option("--marker", marker)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << FormatErrorLine("usage", e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*train) {
      for (const fs::path& p : corpus) RequireFiles({&p});
      if (merges_out.empty()) merges_out = fs::path(out.string() + ".merges");
      TrainerConfig config;
      config.target_size = size;
      config.marker = marker;
      config.min_pair_frequency = min_pair_frequency;
      config.max_token_length = max_token_length;
      config.lowercase = lowercase;
      const TrainResult result = TrainVocabulary(ReadWords(corpus, lowercase), config);
      for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
      SaveVocabulary(result.vocab, out);
      try {
        SaveMerges(result.merges, merges_out);
      } catch (...) {
        std::error_code ignored;
        fs::remove(out, ignored);
        throw;
      }
      std::cout << "tokens " << result.vocab.size() << "\nmerges " << result.merges.size()
                << "\n";
    } else if (*plan_cmd) {
      RequireFiles({&old_vocab_path, &new_vocab_path});
      const TransferMode transfer_mode = ParseTransferMode(mode);
      const Vocabulary old_vocab = LoadVocabulary(old_vocab_path, marker);
      const Vocabulary new_vocab = LoadVocabulary(new_vocab_path, marker);
      const TransferPlan plan = BuildTransferPlan(new_vocab, old_vocab, transfer_mode);
      SavePlan(plan, out);
      PrintSummary(SummarizePlan(plan));
    } else if (*apply) {
      RequireFiles({&plan_path, &old_vocab_path, &new_vocab_path, &old_embeddings_path});
      const FallbackStrategy strategy = MakeFallback(fallback, seed, scale);
      const TransferPlan plan = LoadPlan(plan_path);
      const Vocabulary old_vocab = LoadVocabulary(old_vocab_path, marker);
      const Vocabulary new_vocab = LoadVocabulary(new_vocab_path, marker);
      const EmbeddingMatrix old_matrix = LoadMatrix(old_embeddings_path);
      const EmbeddingMatrix matrix = ApplyTransfer(plan, old_vocab, new_vocab, old_matrix, strategy);
      SaveMatrix(matrix, out);
      if (!text_out.empty()) SaveMatrixText(matrix, text_out);
      std::cout << "rows " << matrix.rows() << "\ndim " << matrix.dim() << "\n";
    } else if (*stats) {
      for (const fs::path& p : corpus) RequireFiles({&p});
      RequireFiles({&old_vocab_path, &new_vocab_path, &old_merges_path, &new_merges_path});
      const Vocabulary old_vocab = LoadVocabulary(old_vocab_path, marker);
      const Vocabulary new_vocab = LoadVocabulary(new_vocab_path, marker);
      auto merges_or_empty = [&](const fs::path& p) {
        return p.empty() ? std::vector<MergeRule>{} : LoadMerges(p, marker);
      };
      const CorpusTokenizer old_tok(old_vocab, merges_or_empty(old_merges_path));
      const CorpusTokenizer new_tok(new_vocab, merges_or_empty(new_merges_path));
      DriftOptions options;
      options.top_k = top_k;
      options.lowercase = lowercase;
      const DriftReport report =
          CompareVocabularies(ReadWords(corpus, lowercase), old_tok, new_tok, options);
      const std::string text = SerializeDriftReport(report);
      if (out.empty()) {
        std::cout << text;
      } else {
        WriteFileAtomic(out, text);
      }
    } else if (*pipeline) {
      PipelineConfig config;
      config.corpus = corpus;
      config.old_vocab = old_vocab_path;
      if (!old_merges_path.empty()) config.old_merges = old_merges_path;
      config.old_embeddings = old_embeddings_path;
      config.sizes = sizes;
      config.mode = ParseTransferMode(mode);
      config.fallback = MakeFallback(fallback, seed, scale);
      config.out_dir = out;
      config.marker = marker;
      config.min_pair_frequency = min_pair_frequency;
      config.max_token_length = max_token_length;
      config.lowercase = lowercase;
      config.top_k = top_k;
      const PipelineResult result = RunPipeline(config, &std::cerr);
      std::cout << result.manifest.string() << "\n";
    } else if (*export_text) {
      RequireFiles({&embeddings_path});
      SaveMatrixText(LoadMatrix(embeddings_path), out);
    } else if (*init) {
      RequireFiles({&old_vocab_path});
      const Vocabulary vocab = LoadVocabulary(old_vocab_path, marker);
      SaveMatrix(RandomMatrix(vocab.size(), dim, init_seed, stddev), out);
    }
  } catch (const UsageError& e) {
    std::cerr << FormatErrorLine("usage", e.what()) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << FormatErrorLine(ErrorKindName(e.kind()), e.what()) << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << FormatErrorLine("internal", e.what()) << "\n";
    return 1;
  }
  return kExitOk;
}
