#pragma once

#include <string>
#include <vector>

namespace hmpnn {

// Shortest decimal form that parses back to the same double. Used by every
// CSV and JSON writer so repeated runs produce byte-identical files.
std::string format_double(double v);

// Writes content to a temp file in the target directory, then renames it
// over path. Readers never observe a half-written file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);
bool file_exists(const std::string& path);

// Minimal CSV: comma separated cells, no quoting, trailing \r tolerated.
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

double parse_double(const std::string& cell, const std::string& context);
long parse_long(const std::string& cell, const std::string& context);

}  // namespace hmpnn
