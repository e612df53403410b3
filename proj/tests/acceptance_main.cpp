// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"
#include "test_util.hpp"
#include "vocabxfer/corpus_stats.hpp"
#include "vocabxfer/embedding.hpp"
#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"
#include "vocabxfer/subword_trainer.hpp"
#include "vocabxfer/token_trie.hpp"
#include "vocabxfer/transfer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace {

using namespace vocabxfer;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr int kPartitionInstances = 1000;
constexpr std::size_t kMaxAlphabet = 5;
constexpr std::size_t kMaxVocab = 40;
constexpr std::size_t kMaxTargetLength = 12;
constexpr double kPartitionBudgetSeconds = 10.0;
constexpr double kPipelineBudgetSeconds = 120.0;
constexpr std::uint32_t kMaxUlp = 1;
constexpr std::size_t kOldVocabSize = 4000;
constexpr std::size_t kDim = 64;

const std::string kData = VOCABXFER_TEST_DATA;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Distance in representable floats; both operands finite.
std::uint32_t UlpDistance(float a, float b) {
  auto key = [](float f) {
    const auto bits = std::bit_cast<std::int32_t>(f);
    return bits < 0 ? static_cast<std::int64_t>(INT32_MIN) - bits : static_cast<std::int64_t>(bits);
  };
  const std::int64_t d = key(a) - key(b);
  return static_cast<std::uint32_t>(d < 0 ? -d : d);
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome PartitionOracle() {
  std::mt19937_64 rng(20260414);
  const std::string letters = "abcde";
  std::uniform_int_distribution<std::size_t> alpha_size(1, kMaxAlphabet);
  std::uniform_int_distribution<std::size_t> vocab_size(2, kMaxVocab);
  std::uniform_int_distribution<std::size_t> target_len(1, kMaxTargetLength);
  int feasible_agree = 0, count_agree = 0, longest_agree = 0, feasible_total = 0;
  double solver_seconds = 0.0;
  const auto start = Clock::now();
  for (int i = 0; i < kPartitionInstances; ++i) {
    const std::string alphabet = letters.substr(0, alpha_size(rng));
    std::vector<std::string> surfaces =
        testing::RandomSurfaces(rng, alphabet, vocab_size(rng) - 1, 4, /*with_unk=*/true);
    const Vocabulary old_vocab = Vocabulary::FromSurfaces(surfaces);
    const bool cont = std::bernoulli_distribution(0.3)(rng);
    const std::string target = testing::RandomWord(rng, alphabet, 1, target_len(rng));

    const auto solve_start = Clock::now();
    const TokenTrie trie(old_vocab);
    const auto got = MinPartition(target, cont, trie);
    solver_seconds += Seconds(solve_start);

    const auto want = testing::EnumeratePartitions(old_vocab, target, cont);
    if (got.has_value() == want.feasible) ++feasible_agree;
    if (!want.feasible) {
      if (!got) {
        ++count_agree;
        ++longest_agree;
      }
      continue;
    }
    ++feasible_total;
    if (!got) continue;
    if (got->segments.size() == want.min_count) ++count_agree;
    std::size_t longest = 0;
    for (TokenId id : got->segments) longest = std::max(longest, old_vocab.token(id).normalized().size());
    if (longest == want.max_longest) ++longest_agree;
  }
  const double total = Seconds(start);
  std::ostringstream detail;
  detail << kPartitionInstances << " instances (" << feasible_total << " feasible), agreement "
         << "feasibility " << feasible_agree << " count " << count_agree << " longest "
         << longest_agree << ", solver " << solver_seconds << " s, total with oracle " << total
         << " s";
  const bool pass = feasible_agree == kPartitionInstances && count_agree == kPartitionInstances &&
                    longest_agree == kPartitionInstances && total < kPartitionBudgetSeconds;
  return {pass, detail.str()};
}

TrainResult TrainOn(const std::string& file, std::size_t size) {
  std::ifstream in(kData + "/" + file, std::ios::binary);
  TrainerConfig config;
  config.target_size = size;
  return TrainVocabulary(in, config);
}

Outcome SelfTransferIdentity() {
  const TrainResult old = TrainOn("milton_latin.txt", kOldVocabSize);
  const EmbeddingMatrix matrix = RandomMatrix(old.vocab.size(), kDim, 7);
  const TransferPlan plan = BuildTransferPlan(old.vocab, old.vocab, TransferMode::kMatched);
  const PlanSummary summary = SummarizePlan(plan);
  FallbackStrategy fallback;
  const EmbeddingMatrix out = ApplyTransfer(plan, old.vocab, old.vocab, matrix, fallback);
  const bool identical = SerializeMatrix(out) == SerializeMatrix(matrix);
  std::ostringstream detail;
  detail << old.vocab.size() << " tokens, matched " << summary.matched << " averaged "
         << summary.averaged << " fallback " << summary.fallback << ", bytes "
         << (identical ? "identical" : "differ");
  return {identical && summary.averaged == 0 && summary.fallback == 0 &&
              summary.matched == old.vocab.size(),
          detail.str()};
}

Outcome AveragingExactness() {
  const TrainResult old = TrainOn("milton_latin.txt", kOldVocabSize);
  const TrainResult fresh = TrainOn("milton_en.txt", 8000);
  const TransferPlan plan = BuildTransferPlan(fresh.vocab, old.vocab, TransferMode::kAveraged);
  FallbackStrategy fallback;

  // Every old row equal to the same awkward vector.
  std::vector<float> v(kDim);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<float> dist(-1e3f, 1e3f);
  for (float& x : v) x = dist(rng) / 3.0f;
  v[0] = 0.1f;
  v[1] = std::numeric_limits<float>::denorm_min();
  v[2] = 3.0e38f;
  std::vector<float> constant;
  for (std::size_t r = 0; r < old.vocab.size(); ++r) constant.insert(constant.end(), v.begin(), v.end());
  const EmbeddingMatrix flat(old.vocab.size(), kDim, std::move(constant));
  const EmbeddingMatrix flat_out = ApplyTransfer(plan, old.vocab, fresh.vocab, flat, fallback);

  std::size_t averaged = 0, exact = 0, multi_source = 0;
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    const InitDirective& d = plan.directives[i];
    if (d.kind != InitKind::kAveraged) continue;
    ++averaged;
    if (d.sources.size() > 1) ++multi_source;
    const auto row = flat_out.row(i);
    if (std::equal(row.begin(), row.end(), v.begin(), v.end(),
                   [](float a, float b) { return std::bit_cast<std::uint32_t>(a) ==
                                                 std::bit_cast<std::uint32_t>(b); })) {
      ++exact;
    }
  }

  const EmbeddingMatrix random = RandomMatrix(old.vocab.size(), kDim, 1234);
  const EmbeddingMatrix out = ApplyTransfer(plan, old.vocab, fresh.vocab, random, fallback);
  std::uint32_t worst = 0;
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    const InitDirective& d = plan.directives[i];
    if (d.kind != InitKind::kAveraged) continue;
    for (std::size_t k = 0; k < kDim; ++k) {
      double sum = 0.0;
      for (TokenId s : d.sources) sum += static_cast<double>(random.row(s)[k]);
      const float reference = static_cast<float>(sum / static_cast<double>(d.sources.size()));
      worst = std::max(worst, UlpDistance(out.row(i)[k], reference));
    }
  }
  std::ostringstream detail;
  detail << averaged << " averaged rows (" << multi_source << " multi-source), " << exact
         << " exact on equal sources, worst " << worst << " ulp vs 64-bit reference";
  return {averaged > 0 && multi_source > 0 && exact == averaged && worst <= kMaxUlp, detail.str()};
}

int RunCli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(VOCABXFER_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism() {
  testing::TempDir dir;
  const TrainResult old = TrainOn("milton_latin.txt", kOldVocabSize);
  SaveVocabulary(old.vocab, dir / "old_vocab.txt");
  SaveMerges(old.merges, dir / "old_merges.txt");
  SaveMatrix(RandomMatrix(old.vocab.size(), kDim, 42, 0.02), dir / "old.vtem");
  const fs::path corpus = kData + "/milton_en.txt";
  const std::string args = "pipeline --corpus " + corpus.string() + " --old-vocab " +
                           (dir / "old_vocab.txt").string() + " --old-merges " +
                           (dir / "old_merges.txt").string() + " --old-embeddings " +
                           (dir / "old.vtem").string() +
                           " --size 8000 --size 16000 --size 32000 --mode averaged --out ";
  double seconds[2] = {0, 0};
  for (int run = 0; run < 2; ++run) {
    const auto start = Clock::now();
    const std::string out = (dir / ("run" + std::to_string(run))).string();
    const int code = RunCli(args + out, dir / ("run" + std::to_string(run) + ".log"));
    seconds[run] = Seconds(start);
    if (code != 0) {
      return {false, "run " + std::to_string(run) + " exited " + std::to_string(code) + ": " +
                         ReadFile(dir / ("run" + std::to_string(run) + ".log"))};
    }
  }
  std::size_t compared = 0, differing = 0;
  std::ostringstream detail;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir / "run0")) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t other_count = std::distance(fs::directory_iterator(dir / "run1"), fs::directory_iterator{});
  for (const std::string& name : names) {
    ++compared;
    const fs::path b = dir / "run1" / name;
    if (!fs::exists(b) || ReadFile(dir / "run0" / name) != ReadFile(b)) {
      ++differing;
      detail << "differs: " << name << "; ";
    }
  }
  bool has_all = true;
  for (const char* size : {"8000", "16000", "32000"}) {
    for (const std::string& stem : {std::string("vocab-"), std::string("merges-"), std::string("plan-"),
                                    std::string("embeddings-")}) {
      const std::string ext = stem == "plan-" ? ".json" : stem == "embeddings-" ? ".vtem" : ".txt";
      if (!fs::exists(dir / "run0" / (stem + size + ext))) has_all = false;
    }
  }
  if (!fs::exists(dir / "run0" / "manifest.json")) has_all = false;
  std::size_t sizes_trained[3] = {0, 0, 0};
  int idx = 0;
  for (const char* size : {"8000", "16000", "32000"}) {
    const fs::path p = dir / "run0" / (std::string("vocab-") + size + ".txt");
    if (fs::exists(p)) sizes_trained[idx] = LoadVocabulary(p).size();
    ++idx;
  }
  detail << compared << " files compared, " << differing << " differ; vocab sizes "
         << sizes_trained[0] << "/" << sizes_trained[1] << "/" << sizes_trained[2] << "; runs "
         << seconds[0] << " s and " << seconds[1] << " s";
  const bool pass = has_all && differing == 0 && other_count == names.size() &&
                    seconds[0] < kPipelineBudgetSeconds && seconds[1] < kPipelineBudgetSeconds;
  return {pass, detail.str()};
}

bool ThrowsKind(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

Outcome FormatRoundTrips() {
  testing::TempDir dir;
  const TrainResult trained = TrainOn("milton_en.txt", 8000);
  SaveVocabulary(trained.vocab, dir / "v1.txt");
  SaveVocabulary(LoadVocabulary(dir / "v1.txt"), dir / "v2.txt");
  const bool vocab_ok = ReadFile(dir / "v1.txt") == ReadFile(dir / "v2.txt");

  SaveMatrix(RandomMatrix(trained.vocab.size(), kDim, 5), dir / "m1.vtem");
  SaveMatrix(LoadMatrix(dir / "m1.vtem"), dir / "m2.vtem");
  const std::string bytes = ReadFile(dir / "m1.vtem");
  const bool matrix_ok = bytes == ReadFile(dir / "m2.vtem");

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::string bad_version = bytes;
  bad_version[4] = 2;
  const std::string truncated = bytes.substr(0, bytes.size() - 3);
  std::string short_header = bytes.substr(0, 10);
  std::string row_claim = bytes;
  row_claim[8 + 7] = 0x7f;  // absurd row count
  std::string non_finite = bytes;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(non_finite.data() + 24 + 4 * 17, &nan, sizeof nan);

  int kinds_ok = 0;
  kinds_ok += ThrowsKind([&] { ParseMatrix(bad_magic); }, ErrorKind::kBadMagic);
  kinds_ok += ThrowsKind([&] { ParseMatrix(bad_version); }, ErrorKind::kBadVersion);
  kinds_ok += ThrowsKind([&] { ParseMatrix(truncated); }, ErrorKind::kSizeMismatch);
  kinds_ok += ThrowsKind([&] { ParseMatrix(short_header); }, ErrorKind::kSizeMismatch);
  kinds_ok += ThrowsKind([&] { ParseMatrix(row_claim); }, ErrorKind::kSizeMismatch);
  kinds_ok += ThrowsKind([&] { ParseMatrix(non_finite); }, ErrorKind::kNonFinite);
  kinds_ok += ThrowsKind([&] { ParseVocabulary("a\n\nb\n"); }, ErrorKind::kValidation);
  kinds_ok += ThrowsKind([&] { ParseVocabulary("a\nb\na\n"); }, ErrorKind::kValidation);
  std::ostringstream detail;
  detail << "vocab " << (vocab_ok ? "identical" : "differs") << ", matrix "
         << (matrix_ok ? "identical" : "differs") << ", " << kinds_ok << "/8 corruptions rejected with the declared kind";
  return {vocab_ok && matrix_ok && kinds_ok == 8, detail.str()};
}

Outcome DriftSanity() {
  const TrainResult old = TrainOn("milton_latin.txt", kOldVocabSize);
  const TrainResult fresh = TrainOn("milton_en.txt", 8000);
  WordCounts words;
  {
    std::ifstream in(kData + "/milton_en.txt", std::ios::binary);
    words.AddStream(in);
  }
  const CorpusTokenizer old_tok(old.vocab, old.merges);
  const CorpusTokenizer new_tok(fresh.vocab, fresh.merges);
  const DriftReport report = CompareVocabularies(words, old_tok, new_tok);
  const auto json = DriftReportToJson(report);
  const bool reported = json.contains("old_fertility") && json.contains("new_fertility") &&
                        std::isfinite(report.old_fertility) && report.old_fertility >= 1.0 &&
                        std::isfinite(report.new_fertility) && report.new_fertility >= 1.0;
  const DriftReport same = CompareVocabularies(words, new_tok, new_tok);
  std::ostringstream detail;
  detail.precision(17);
  detail << "unknown_rate_new " << report.unknown_rate_new << ", fertility old "
         << report.old_fertility << " new " << report.new_fertility << ", identical ratio "
         << same.ratio;
  return {report.unknown_rate_new == 0.0 && reported && same.ratio == 1.0, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"partition_oracle", PartitionOracle},     {"self_transfer_identity", SelfTransferIdentity},
      {"averaging_exactness", AveragingExactness}, {"determinism", Determinism},
      {"format_round_trips", FormatRoundTrips},  {"drift_sanity", DriftSanity},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
