// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/embedding.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <random>

#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"

namespace vocabxfer {
namespace {

constexpr char kMagic[4] = {'V', 'T', 'E', 'M'};
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8;

template <typename T>
void PutLe(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T GetLe(std::string_view in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

void CheckFinite(std::span<const float> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::kNonFinite,
                  "non-finite embedding value at flat index " + std::to_string(i));
    }
  }
}

struct ColumnMoments {
  std::vector<double> mean;
  std::vector<double> stddev;
};

ColumnMoments ComputeMoments(const EmbeddingMatrix& m) {
  ColumnMoments moments{std::vector<double>(m.dim(), 0.0), std::vector<double>(m.dim(), 0.0)};
  if (m.rows() == 0) {
    throw Error(ErrorKind::kValidation, "fallback statistics need a non-empty old matrix");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t d = 0; d < m.dim(); ++d) moments.mean[d] += row[d];
  }
  for (double& v : moments.mean) v /= static_cast<double>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t d = 0; d < m.dim(); ++d) {
      const double diff = row[d] - moments.mean[d];
      moments.stddev[d] += diff * diff;
    }
  }
  for (double& v : moments.stddev) v = std::sqrt(v / static_cast<double>(m.rows()));
  return moments;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {
  if (dim == 0) throw Error(ErrorKind::kValidation, "embedding dim must be at least 1");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (dim == 0) throw Error(ErrorKind::kValidation, "embedding dim must be at least 1");
  if (data_.size() != rows * dim) {
    throw Error(ErrorKind::kSizeMismatch, "embedding data has " + std::to_string(data_.size()) +
                                              " values, expected " + std::to_string(rows) +
                                              "x" + std::to_string(dim));
  }
  CheckFinite(data_);
}

std::string_view FallbackKindName(FallbackStrategy::Kind kind) {
  switch (kind) {
    case FallbackStrategy::Kind::kGlobalMean: return "global-mean";
    case FallbackStrategy::Kind::kRandomNormal: return "random-normal";
    case FallbackStrategy::Kind::kZero: return "zero";
  }
  return "unknown";
}

FallbackStrategy FallbackStrategy::Parse(std::string_view name) {
  FallbackStrategy s;
  if (name == "global-mean") {
    s.kind = Kind::kGlobalMean;
  } else if (name == "random-normal") {
    s.kind = Kind::kRandomNormal;
  } else if (name == "zero") {
    s.kind = Kind::kZero;
  } else {
    throw Error(ErrorKind::kValidation, "unknown fallback \"" + std::string(name) +
                                            "\" (global-mean|random-normal|zero)");
  }
  return s;
}

EmbeddingMatrix ApplyTransfer(const TransferPlan& plan, const EmbeddingMatrix& old,
                              const FallbackStrategy& fallback) {
  ValidatePlan(plan);
  if (old.dim() == 0) throw Error(ErrorKind::kValidation, "old matrix has no columns");
  if (fallback.kind == FallbackStrategy::Kind::kRandomNormal && !fallback.seed) {
    throw Error(ErrorKind::kValidation, "random-normal fallback requires an explicit seed");
  }
  if (fallback.scale && !(std::isfinite(*fallback.scale) && *fallback.scale >= 0.0)) {
    throw Error(ErrorKind::kValidation, "random-normal scale must be finite and >= 0");
  }

  const std::size_t dim = old.dim();
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    for (TokenId src : plan.directives[i].sources) {
      if (src >= old.rows()) {
        throw Error(ErrorKind::kOutOfRange, "directive " + std::to_string(i) + " references old id " +
                                                std::to_string(src) + " but the old matrix has " +
                                                std::to_string(old.rows()) + " rows");
      }
    }
  }

  bool needs_moments = false;
  for (const InitDirective& d : plan.directives) {
    needs_moments |= d.kind == InitKind::kFallback && fallback.kind != FallbackStrategy::Kind::kZero;
  }
  ColumnMoments moments;
  std::vector<float> mean_row;
  if (needs_moments) {
    moments = ComputeMoments(old);
    mean_row.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) mean_row[d] = static_cast<float>(moments.mean[d]);
  }

  std::vector<float> data(plan.directives.size() * dim, 0.0f);
  std::vector<double> acc(dim);
  for (std::size_t i = 0; i < plan.directives.size(); ++i) {
    const InitDirective& d = plan.directives[i];
    float* out = data.data() + i * dim;
    switch (d.kind) {
      case InitKind::kMatched: {
        const auto src = old.row(d.sources.front());
        std::memcpy(out, src.data(), dim * sizeof(float));
        break;
      }
      case InitKind::kAveraged: {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (TokenId src : d.sources) {
          const auto row = old.row(src);
          for (std::size_t k = 0; k < dim; ++k) acc[k] += row[k];
        }
        const auto n = static_cast<double>(d.sources.size());
        for (std::size_t k = 0; k < dim; ++k) out[k] = static_cast<float>(acc[k] / n);
        break;
      }
      case InitKind::kFallback:
        switch (fallback.kind) {
          case FallbackStrategy::Kind::kZero:
            break;
          case FallbackStrategy::Kind::kGlobalMean:
            std::memcpy(out, mean_row.data(), dim * sizeof(float));
            break;
          case FallbackStrategy::Kind::kRandomNormal: {
            // Per-row stream keyed by (seed, row) keeps rows independent.
            const std::uint64_t seed = *fallback.seed;
            std::seed_seq seq{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(i),
                              static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t k = 0; k < dim; ++k) {
              const double sd = fallback.scale ? *fallback.scale : moments.stddev[k];
              out[k] = static_cast<float>(moments.mean[k] + sd * normal(rng));
            }
            break;
          }
        }
        break;
    }
  }
  return EmbeddingMatrix(plan.directives.size(), dim, std::move(data));
}

EmbeddingMatrix ApplyTransfer(const TransferPlan& plan, const Vocabulary& old_vocab,
                              const Vocabulary& new_vocab, const EmbeddingMatrix& old,
                              const FallbackStrategy& fallback) {
  const std::string old_digest = old_vocab.Digest();
  const std::string new_digest = new_vocab.Digest();
  if (old_digest != plan.old_vocab_sha256) {
    throw Error(ErrorKind::kDigestMismatch, "old vocabulary digest " + old_digest +
                                                " does not match plan digest " +
                                                plan.old_vocab_sha256);
  }
  if (new_digest != plan.new_vocab_sha256) {
    throw Error(ErrorKind::kDigestMismatch, "new vocabulary digest " + new_digest +
                                                " does not match plan digest " +
                                                plan.new_vocab_sha256);
  }
  if (old.rows() != old_vocab.size()) {
    throw Error(ErrorKind::kSizeMismatch, "old matrix has " + std::to_string(old.rows()) +
                                              " rows but the old vocabulary has " +
                                              std::to_string(old_vocab.size()) + " tokens");
  }
  return ApplyTransfer(plan, old, fallback);
}

std::string SerializeMatrix(const EmbeddingMatrix& m) {
  std::string out;
  out.reserve(kHeaderSize + m.data().size() * 4);
  out.append(kMagic, 4);
  PutLe<std::uint32_t>(out, kMatrixFormatVersion);
  PutLe<std::uint64_t>(out, m.rows());
  PutLe<std::uint64_t>(out, m.dim());
  for (float v : m.data()) PutLe<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingMatrix ParseMatrix(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a VTEM matrix file");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorKind::kSizeMismatch, "truncated matrix header");
  }
  const auto version = GetLe<std::uint32_t>(bytes, 4);
  if (version != kMatrixFormatVersion) {
    throw Error(ErrorKind::kBadVersion, "unsupported matrix version " + std::to_string(version));
  }
  const auto rows = GetLe<std::uint64_t>(bytes, 8);
  const auto dim = GetLe<std::uint64_t>(bytes, 16);
  const std::size_t payload = bytes.size() - kHeaderSize;
  if (dim == 0 || (rows > 0 && dim > payload / 4 / rows) || rows * dim * 4 != payload) {
    throw Error(ErrorKind::kSizeMismatch,
                "header declares " + std::to_string(rows) + "x" + std::to_string(dim) +
                    " but payload holds " + std::to_string(payload) + " bytes");
  }
  std::vector<float> data(rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(GetLe<std::uint32_t>(bytes, kHeaderSize + 4 * i));
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

EmbeddingMatrix LoadMatrix(const std::filesystem::path& path) {
  try {
    return ParseMatrix(ReadFile(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void SaveMatrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeMatrix(m));
}

std::string ExportMatrixText(const EmbeddingMatrix& m) {
  std::string out;
  out.reserve(m.data().size() * 12);
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d > 0) out.push_back(' ');
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[d]);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

void SaveMatrixText(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  WriteFileAtomic(path, ExportMatrixText(m));
}

EmbeddingMatrix RandomMatrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                             double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<float> data(rows * dim);
  for (float& v : data) v = static_cast<float>(normal(rng));
  return EmbeddingMatrix(rows, dim, std::move(data));
}

}  // namespace vocabxfer
