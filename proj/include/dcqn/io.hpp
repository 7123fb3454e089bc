#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dcqn {

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

}  // namespace dcqn
