#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace bevkit {

using Json = nlohmann::json;

/// Compact single-line dump with sorted keys and every floating-point value
/// printed as 6-decimal fixed point. Byte-stable for equal inputs.
std::string canonical_dump(const Json& j);

/// Parses JSON text; wraps parser failures in ParseError.
Json parse_json(const std::string& text, const std::string& origin);

std::string read_text_file(const std::filesystem::path& path);
/// Throws IoError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

}  // namespace bevkit
