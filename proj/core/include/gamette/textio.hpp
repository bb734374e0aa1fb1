#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gamette {

/// Shortest text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);
long long parse_integer(std::string_view text, std::string_view what);
unsigned long long parse_unsigned(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated text without quoting. Blank lines and lines starting with
/// '#' are skipped; every row must match the header width.
CsvTable read_csv(std::istream& in);

}  // namespace gamette
