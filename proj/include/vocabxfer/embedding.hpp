// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocabxfer/transfer.hpp"
#include "vocabxfer/vocabulary.hpp"

namespace vocabxfer {

// Row-major float32 matrix; row i is the embedding of token id i.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  // Takes ownership of `data`; throws Error(kSizeMismatch) if
  // data.size() != rows * dim and Error(kNonFinite) on NaN/Inf.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct FallbackStrategy {
  enum class Kind { kGlobalMean, kRandomNormal, kZero };

  Kind kind = Kind::kGlobalMean;
  std::optional<std::uint64_t> seed;  // required for kRandomNormal
  // kRandomNormal: standard deviation. Defaults to the per-dimension standard
  // deviation of the old matrix; the mean is always the per-dimension mean.
  std::optional<double> scale;

  static FallbackStrategy Parse(std::string_view name);
};

std::string_view FallbackKindName(FallbackStrategy::Kind kind);

// Materializes a plan. Matched rows are copied bit for bit; averaged rows are
// accumulated in double and rounded once. Rows are independent of each
// other, so processing order does not affect the result.
EmbeddingMatrix ApplyTransfer(const TransferPlan& plan, const EmbeddingMatrix& old,
                              const FallbackStrategy& fallback);

// Same, after checking the plan's provenance digests against the supplied
// vocabularies (Error(kDigestMismatch)) and the old matrix shape.
EmbeddingMatrix ApplyTransfer(const TransferPlan& plan, const Vocabulary& old_vocab,
                              const Vocabulary& new_vocab, const EmbeddingMatrix& old,
                              const FallbackStrategy& fallback);

// Binary layout, all little-endian:
//   "VTEM" | version u32 (=1) | rows u64 | dim u64 | rows*dim f32 row-major
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

std::string SerializeMatrix(const EmbeddingMatrix& m);
EmbeddingMatrix ParseMatrix(std::string_view bytes);
EmbeddingMatrix LoadMatrix(const std::filesystem::path& path);
void SaveMatrix(const EmbeddingMatrix& m, const std::filesystem::path& path);

// One row per line, values separated by single spaces, shortest decimal
// form that round-trips to the same float.
std::string ExportMatrixText(const EmbeddingMatrix& m);
void SaveMatrixText(const EmbeddingMatrix& m, const std::filesystem::path& path);

// Seeded N(0, stddev) matrix; used for fixtures and demos.
EmbeddingMatrix RandomMatrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                             double stddev = 1.0);

}  // namespace vocabxfer
