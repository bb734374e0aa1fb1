#include "gamette/textio.hpp"

#include <charconv>
#include <istream>

#include "gamette/error.hpp"

namespace gamette {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw validation_error("not a number: '" + std::string(text) + "'");
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw validation_error("bad integer for " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

unsigned long long parse_unsigned(std::string_view text, std::string_view what) {
  unsigned long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw validation_error("bad unsigned integer for " + std::string(what) + ": '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto cells = split(text, ',');
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw validation_error("csv: row " + std::to_string(table.rows.size() + 1) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw validation_error("csv: missing header");
  return table;
}

}  // namespace gamette
