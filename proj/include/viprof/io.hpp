// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace viprof::io {

/// Reads a whole file. Throws DataError mentioning the path on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_record(std::string_view line);

std::string csv_field(std::string_view value);

/// Splits text into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view text);

std::string_view trim(std::string_view s);

} // namespace viprof::io
