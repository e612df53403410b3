// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vocabxfer {

enum class ErrorKind {
  kValidation,      // malformed or contradictory input
  kIo,              // filesystem failure
  kBadMagic,        // matrix file does not start with "VTEM"
  kBadVersion,      // matrix file version not understood
  kSizeMismatch,    // header and payload disagree
  kNonFinite,       // NaN/Inf in embedding data
  kDigestMismatch,  // plan provenance does not match supplied vocabulary
  kOutOfRange,      // token id outside the matrix
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vocabxfer
