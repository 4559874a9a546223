#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dmcca {

/// Shortest decimal string that parses back to the exact same double.
std::string to_string_roundtrip(double value);

/// Writes `content` to `path` via a temp file in the same directory plus an
/// atomic rename, so readers never observe a partially written file.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace dmcca
