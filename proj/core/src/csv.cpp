#include "shiftdom/csv.hpp"

#include "shiftdom/errors.hpp"
#include "shiftdom/scalar.hpp"

#include <cstdio>

namespace shiftdom {

std::string scalar_to_string(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : arity_(header.size()) {
  if (header.empty()) throw ConfigError("csv: empty header");
  append_line(header);
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != arity_)
    throw ConfigError("csv: row arity does not match the header");
  append_line(cells);
}

void CsvWriter::append_line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\r") != std::string::npos)
      throw ConfigError("csv: cell contains a separator");
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
}

} // namespace shiftdom
