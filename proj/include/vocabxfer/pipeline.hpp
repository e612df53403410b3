// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vocabxfer/embedding.hpp"
#include "vocabxfer/error.hpp"
#include "vocabxfer/transfer.hpp"

namespace vocabxfer {

// Process exit codes shared by every CLI subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;

int ExitCodeFor(ErrorKind kind);

// {"error":"<kind>","message":"..."} on one line.
std::string FormatErrorLine(std::string_view kind, std::string_view message);

struct PipelineConfig {
  std::vector<std::filesystem::path> corpus;
  std::filesystem::path old_vocab;
  std::optional<std::filesystem::path> old_merges;
  std::filesystem::path old_embeddings;
  std::vector<std::size_t> sizes = {8000, 16000, 32000};
  TransferMode mode = TransferMode::kAveraged;
  FallbackStrategy fallback;
  std::filesystem::path out_dir;

  std::string marker = "##";
  std::uint64_t min_pair_frequency = 2;
  std::size_t max_token_length = 64;
  bool lowercase = false;
  std::size_t top_k = 20;
};

struct ManifestEntry {
  std::string role;
  std::optional<std::size_t> size;
  std::string path;
  std::string sha256;
};

struct PipelineResult {
  std::filesystem::path manifest;
  std::vector<ManifestEntry> artifacts;
};

// Checks everything that can be checked before touching the output
// directory: sizes, path overlap, input existence, non-empty corpus.
void ValidatePipelineConfig(const PipelineConfig& config);

// Trains one vocabulary per size, plans and materializes its embeddings,
// writes a drift report covering every size and a manifest with SHA-256
// digests. Artifacts are published atomically; on failure every file written
// by this run is removed before the error propagates.
PipelineResult RunPipeline(const PipelineConfig& config, std::ostream* log = nullptr);

}  // namespace vocabxfer
