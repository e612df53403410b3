// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "vocabxfer/error.hpp"

namespace vocabxfer {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kBadVersion: return "bad_version";
    case ErrorKind::kSizeMismatch: return "size_mismatch";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kDigestMismatch: return "digest_mismatch";
    case ErrorKind::kOutOfRange: return "out_of_range";
  }
  return "unknown";
}

}  // namespace vocabxfer
