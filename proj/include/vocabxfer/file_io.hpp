// Copyright 2026 The vocabxfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vocabxfer {

std::string ReadFile(const std::filesystem::path& path);

// Writes bytes to a temporary sibling of `path` and renames it into place, so
// readers never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

}  // namespace vocabxfer
