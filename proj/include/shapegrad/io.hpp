#pragma once

#include <string>

namespace shapegrad {

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Whole-file read; throws InvalidInput when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace shapegrad
