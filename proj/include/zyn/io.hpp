#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace zyn::io {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over path, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// One JSON value per non-blank line. Throws InvalidArgument naming the line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace zyn::io
