// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/embedding.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "vocabxfer/error.hpp"
#include "vocabxfer/file_io.hpp"

namespace vocabxfer {
namespace {

using testing::TempDir;

TransferPlan PlanOf(std::vector<InitDirective> directives,
                    TransferMode mode = TransferMode::kAveraged) {
  TransferPlan plan;
  plan.mode = mode;
  for (std::size_t i = 0; i < directives.size(); ++i) plan.tokens.push_back("t" + std::to_string(i));
  plan.directives = std::move(directives);
  return plan;
}

ErrorKind KindOf(std::string_view bytes) {
  try {
    ParseMatrix(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::kValidation;
}

TEST(ApplyTransferTest, AveragesTwoRows) {
  const EmbeddingMatrix old(2, 2, {1.0f, 0.0f, 0.0f, 1.0f});
  const auto out = ApplyTransfer(PlanOf({{InitKind::kAveraged, {0, 1}}}), old, {});
  EXPECT_EQ(out.data(), (std::vector<float>{0.5f, 0.5f}));
}

TEST(ApplyTransferTest, GlobalMeanFallback) {
  // Column means of [(2,4),(0,0)] are (1,2).
  const EmbeddingMatrix old(2, 2, {2.0f, 4.0f, 0.0f, 0.0f});
  const auto out = ApplyTransfer(PlanOf({{InitKind::kFallback, {}}}), old, {});
  EXPECT_EQ(out.data(), (std::vector<float>{1.0f, 2.0f}));
}

TEST(ApplyTransferTest, ZeroFallback) {
  const EmbeddingMatrix old(1, 3, {2.0f, 4.0f, 5.0f});
  FallbackStrategy zero;
  zero.kind = FallbackStrategy::Kind::kZero;
  const auto out = ApplyTransfer(PlanOf({{InitKind::kFallback, {}}}), old, zero);
  EXPECT_EQ(out.data(), (std::vector<float>{0.0f, 0.0f, 0.0f}));
}

TEST(ApplyTransferTest, SelfTransferIsByteIdentical) {
  const EmbeddingMatrix old = RandomMatrix(300, 16, 42);
  std::vector<InitDirective> ds;
  for (TokenId i = 0; i < old.rows(); ++i) ds.push_back({InitKind::kMatched, {i}});
  const auto out = ApplyTransfer(PlanOf(ds, TransferMode::kMatched), old, {});
  EXPECT_EQ(SerializeMatrix(out), SerializeMatrix(old));
}

TEST(ApplyTransferTest, EqualSourcesAverageExactly) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> value(-1e4f, 1e4f);
  for (int round = 0; round < 200; ++round) {
    std::vector<float> row(7);
    for (float& v : row) v = value(rng);
    const std::size_t copies = 1 + round % 13;
    std::vector<float> data;
    for (std::size_t i = 0; i < copies; ++i) data.insert(data.end(), row.begin(), row.end());
    const EmbeddingMatrix old(copies, 7, data);
    std::vector<TokenId> sources;
    for (TokenId i = 0; i < copies; ++i) sources.push_back(i);
    sources.push_back(0);  // repeated segments are fine too
    const auto out = ApplyTransfer(PlanOf({{InitKind::kAveraged, sources}}), old, {});
    ASSERT_EQ(std::memcmp(out.row(0).data(), row.data(), row.size() * sizeof(float)), 0);
  }
}

TEST(ApplyTransferTest, AveragesWithinOneUlpOfReference) {
  std::mt19937_64 rng(9);
  const EmbeddingMatrix old = RandomMatrix(50, 32, 10);
  std::uniform_int_distribution<TokenId> pick(0, 49);
  std::vector<InitDirective> ds;
  for (int i = 0; i < 200; ++i) {
    std::vector<TokenId> src(1 + i % 6);
    for (TokenId& s : src) s = pick(rng);
    ds.push_back({InitKind::kAveraged, src});
  }
  const auto out = ApplyTransfer(PlanOf(ds), old, {});
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t d = 0; d < old.dim(); ++d) {
      long double ref = 0;
      for (TokenId s : ds[r].sources) ref += old.row(s)[d];
      ref /= ds[r].sources.size();
      const float got = out.row(r)[d];
      const float lo = std::nextafter(static_cast<float>(ref), -INFINITY);
      const float hi = std::nextafter(static_cast<float>(ref), INFINITY);
      ASSERT_TRUE(got >= lo && got <= hi) << r << "," << d;
    }
  }
}

TEST(ApplyTransferTest, RandomNormalIsSeededAndOrderIndependent) {
  const EmbeddingMatrix old = RandomMatrix(20, 8, 1);
  FallbackStrategy f;
  f.kind = FallbackStrategy::Kind::kRandomNormal;
  EXPECT_THROW(ApplyTransfer(PlanOf({{InitKind::kFallback, {}}}), old, f), Error);
  f.seed = 1234;
  std::vector<InitDirective> ds = {
      {InitKind::kFallback, {}}, {InitKind::kMatched, {3}}, {InitKind::kFallback, {}},
      {InitKind::kAveraged, {1, 2}}, {InitKind::kFallback, {}}};
  const auto a = ApplyTransfer(PlanOf(ds), old, f);
  const auto b = ApplyTransfer(PlanOf(ds), old, f);
  EXPECT_EQ(SerializeMatrix(a), SerializeMatrix(b));
  EXPECT_NE(std::vector<float>(a.row(0).begin(), a.row(0).end()),
            std::vector<float>(a.row(2).begin(), a.row(2).end()));
  f.seed = 1235;
  EXPECT_NE(SerializeMatrix(ApplyTransfer(PlanOf(ds), old, f)), SerializeMatrix(a));
}

TEST(ApplyTransferTest, PermutingDirectivesPermutesRows) {
  const EmbeddingMatrix old = RandomMatrix(30, 4, 5);
  std::vector<InitDirective> ds = {{InitKind::kMatched, {4}},
                                   {InitKind::kAveraged, {1, 2, 9}},
                                   {InitKind::kFallback, {}},
                                   {InitKind::kAveraged, {7, 7}},
                                   {InitKind::kMatched, {0}}};
  const std::vector<std::size_t> perm = {3, 0, 4, 2, 1};
  std::vector<InitDirective> permuted;
  for (std::size_t p : perm) permuted.push_back(ds[p]);
  const auto a = ApplyTransfer(PlanOf(ds), old, {});
  const auto b = ApplyTransfer(PlanOf(permuted), old, {});
  for (std::size_t i = 0; i < perm.size(); ++i) {
    ASSERT_EQ(std::memcmp(b.row(i).data(), a.row(perm[i]).data(), old.dim() * sizeof(float)), 0);
  }
}

TEST(ApplyTransferTest, RejectsOutOfRangeSources) {
  const EmbeddingMatrix old(2, 2, {1, 2, 3, 4});
  try {
    ApplyTransfer(PlanOf({{InitKind::kAveraged, {0, 2}}}), old, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOutOfRange);
  }
}

TEST(ApplyTransferTest, ChecksProvenanceDigests) {
  const Vocabulary old_vocab = Vocabulary::FromSurfaces({"a", "##b"});
  const Vocabulary new_vocab = Vocabulary::FromSurfaces({"ab"});
  const Vocabulary other = Vocabulary::FromSurfaces({"a", "##c"});
  const TransferPlan plan = BuildTransferPlan(new_vocab, old_vocab, TransferMode::kAveraged);
  const EmbeddingMatrix old(2, 1, {1.0f, 3.0f});
  const auto out = ApplyTransfer(plan, old_vocab, new_vocab, old, {});
  EXPECT_EQ(out.data(), std::vector<float>{2.0f});
  try {
    ApplyTransfer(plan, other, new_vocab, old, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDigestMismatch);
    EXPECT_NE(std::string(e.what()).find(other.Digest()), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(plan.old_vocab_sha256), std::string::npos);
  }
  EXPECT_THROW(ApplyTransfer(plan, old_vocab, old_vocab, old, {}), Error);
  const EmbeddingMatrix short_matrix(1, 1, {1.0f});
  EXPECT_THROW(ApplyTransfer(plan, old_vocab, new_vocab, short_matrix, {}), Error);
}

TEST(MatrixFormatTest, HeaderLayout) {
  const std::string bytes = SerializeMatrix(EmbeddingMatrix(1, 2, {0.5f, 0.5f}));
  ASSERT_EQ(bytes.size(), 4u + 4u + 8u + 8u + 8u);
  const std::string header("VTEM"
                           "\x01\x00\x00\x00"
                           "\x01\x00\x00\x00\x00\x00\x00\x00"
                           "\x02\x00\x00\x00\x00\x00\x00\x00",
                           24);
  EXPECT_EQ(bytes.substr(0, 24), header);
  // 0.5f = 0x3F000000, little-endian.
  EXPECT_EQ(bytes.substr(24), std::string("\x00\x00\x00\x3f\x00\x00\x00\x3f", 8));
}

TEST(MatrixFormatTest, RoundTripIsBitExact) {
  TempDir dir;
  const EmbeddingMatrix m = RandomMatrix(1000, 64, 77);
  SaveMatrix(m, dir / "m.vtem");
  const EmbeddingMatrix loaded = LoadMatrix(dir / "m.vtem");
  EXPECT_EQ(loaded, m);
  SaveMatrix(loaded, dir / "n.vtem");
  EXPECT_EQ(ReadFile(dir / "m.vtem"), ReadFile(dir / "n.vtem"));
}

TEST(MatrixFormatTest, ErrorKinds) {
  const std::string good = SerializeMatrix(EmbeddingMatrix(2, 2, {1, 2, 3, 4}));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(KindOf(bad_magic), ErrorKind::kBadMagic);
  EXPECT_EQ(KindOf("VT"), ErrorKind::kBadMagic);
  std::string bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(KindOf(bad_version), ErrorKind::kBadVersion);
  EXPECT_EQ(KindOf(good.substr(0, good.size() - 1)), ErrorKind::kSizeMismatch);
  EXPECT_EQ(KindOf(good.substr(0, 20)), ErrorKind::kSizeMismatch);
  EXPECT_EQ(KindOf(good + "xxxx"), ErrorKind::kSizeMismatch);
  std::string huge = good;
  huge[15] = '\x7f';  // rows near 2^63
  EXPECT_EQ(KindOf(huge), ErrorKind::kSizeMismatch);
  std::string nan = good;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 24, &q, 4);
  EXPECT_EQ(KindOf(nan), ErrorKind::kNonFinite);
  std::string inf = good;
  const float i = std::numeric_limits<float>::infinity();
  std::memcpy(inf.data() + 28, &i, 4);
  EXPECT_EQ(KindOf(inf), ErrorKind::kNonFinite);
}

TEST(MatrixFormatTest, TextExportRoundTripsFloats) {
  const EmbeddingMatrix m = RandomMatrix(20, 5, 3);
  const std::string text = ExportMatrixText(m);
  std::istringstream in(text);
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field;
    std::size_t d = 0;
    while (fields >> field) {
      ASSERT_EQ(std::strtof(field.c_str(), nullptr), m.row(r)[d]);
      ++d;
    }
    ASSERT_EQ(d, m.dim());
    ++r;
  }
  EXPECT_EQ(r, m.rows());
  EXPECT_EQ(ExportMatrixText(EmbeddingMatrix(1, 2, {0.5f, -1.0f})), "0.5 -1\n");
}

TEST(MatrixTest, ConstructorValidates) {
  EXPECT_THROW(EmbeddingMatrix(2, 2, {1.0f}), Error);
  EXPECT_THROW(EmbeddingMatrix(1, 0), Error);
  EXPECT_THROW(EmbeddingMatrix(1, 1, {std::numeric_limits<float>::infinity()}), Error);
}

}  // namespace
}  // namespace vocabxfer
