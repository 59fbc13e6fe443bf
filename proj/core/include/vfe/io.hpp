#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vfe::io {

// Whole-file read; throws Error(MissingFile) / Error(IoError).
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// Shortest decimal form with at most 9 significant digits (CSV precision).
std::string format_g9(double value);

}  // namespace vfe::io
